"""Command-line entry point: ``twistorcount <subcommand> [--config FILE] [overrides]``.

Every run resolves a single configuration (a JSON file plus flag overrides),
validates all of it, computes everything in memory and only then writes the
artifacts.  Exit codes:

* 0 success
* 2 configuration error (nothing is written)
* 3 precondition failure (e.g. plane not positive definite, vector not isotropic)
* 4 internal-consistency failure (e.g. oracle mismatch, failed certificate)
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PRECONDITION = 3
EXIT_CONSISTENCY = 4

SUBCOMMANDS = ("enumerate", "count", "equidist", "orbit", "constant", "report", "oracle-check")
# fields that steer execution but cannot change any output byte
RUNTIME_ONLY = ("workers", "output_dir")


class ConfigError(ValueError):
    pass


class PreconditionError(ValueError):
    pass


class ConsistencyFailure(RuntimeError):
    pass


@dataclass
class RunConfig:
    lattice: dict = field(default_factory=lambda: {"kind": "k3"})
    plane: dict = field(default_factory=lambda: {"seed": 0})
    thresholds: list = field(default_factory=lambda: ["1"])
    weights: list = field(default_factory=list)
    genericity_bound: int = 2
    prime_cutoff: int = 1000
    output_dir: str = "twistorcount-out"
    workers: int = 1
    limit: int | None = None
    l_max: int = 4
    vectors: list = field(default_factory=list)
    orbit_sample: int = 0
    fitted_constant: float | None = None
    oracle_seeds: int = 10

    def echo(self) -> dict:
        out = asdict(self)
        for key in RUNTIME_ONLY:
            out.pop(key)
        return out


# config parsing ----------------------------------------------------------------

def _rational(x, what: str) -> Fraction:
    try:
        if isinstance(x, bool):
            raise TypeError
        if isinstance(x, (list, tuple)):
            if len(x) != 2:
                raise ValueError
            num, den = x
            if not all(isinstance(t, int) and not isinstance(t, bool) for t in (num, den)):
                raise TypeError
            return Fraction(num, den)
        if isinstance(x, float):
            return Fraction(repr(x))
        if isinstance(x, (int, str)):
            return Fraction(x)
    except (TypeError, ValueError, ZeroDivisionError):
        pass
    raise ConfigError(f"{what}: cannot read {x!r} as a rational")


def _integer(x, what: str, minimum: int | None = None) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise ConfigError(f"{what} must be an integer, got {x!r}")
    if minimum is not None and x < minimum:
        raise ConfigError(f"{what} must be >= {minimum}")
    return x


def _int_vector(v, what: str) -> list[int]:
    if isinstance(v, str):
        v = v.replace(",", " ").split()
        try:
            v = [int(t) for t in v]
        except ValueError:
            raise ConfigError(f"{what}: not a list of integers") from None
    if not isinstance(v, list) or not all(isinstance(t, int) and not isinstance(t, bool) for t in v):
        raise ConfigError(f"{what}: not a list of integers")
    return v


def _weight_flag(text: str) -> list:
    parts = text.split(",")
    try:
        return [int(parts[0]), int(parts[1]), float(parts[2])] if len(parts) == 3 else None
    except ValueError:
        raise ConfigError(f"--weight expects L,M,C, got {text!r}") from None


def _parse_lattice_flag(text: str) -> dict:
    kind, _, rest = text.partition(":")
    if kind == "k3" and not rest:
        return {"kind": "k3"}
    if kind == "diagonal":
        try:
            p, q = (int(t) for t in rest.split(","))
        except ValueError:
            raise ConfigError("--lattice diagonal:P,Q expects two integers") from None
        return {"kind": "diagonal", "p": p, "q": q}
    if kind == "file" and rest:
        return {"kind": "file", "path": rest}
    raise ConfigError(f"--lattice: cannot parse {text!r} (k3 | diagonal:P,Q | file:PATH)")


def _validate(cfg: RunConfig, sub: str) -> None:
    lat = cfg.lattice
    if not isinstance(lat, dict) or lat.get("kind") not in ("k3", "diagonal", "file"):
        raise ConfigError("lattice must be {kind: k3 | diagonal | file}")
    if lat["kind"] == "diagonal":
        _integer(lat.get("p"), "lattice.p", 1)
        _integer(lat.get("q"), "lattice.q", 1)
    if lat["kind"] == "file" and not isinstance(lat.get("path"), str):
        raise ConfigError("lattice.path must be a string")

    pl = cfg.plane
    if not isinstance(pl, dict) or len(pl) == 0:
        raise ConfigError("plane must be a mapping")
    keys = set(pl) - {"tilt"}
    if keys not in ({"basis"}, {"seed"}, {"axis"}, {"random_exact"}, {"standard"}):
        raise ConfigError("plane needs exactly one of basis | seed | axis | random_exact | standard")
    if "basis" in pl:
        basis = pl["basis"]
        if not isinstance(basis, list) or not basis or not all(isinstance(b, list) and b for b in basis):
            raise ConfigError("plane.basis must be a non-empty list of vectors")
        if len({len(b) for b in basis}) != 1:
            raise ConfigError("plane.basis vectors have different lengths")
        pl["basis"] = [[str(_rational(x, "plane.basis")) for x in b] for b in basis]
    if "seed" in pl:
        _integer(pl["seed"], "plane.seed", 0)
    if "random_exact" in pl:
        _integer(pl["random_exact"], "plane.random_exact", 0)
    if "tilt" in pl:
        t = pl["tilt"]
        if isinstance(t, bool) or not isinstance(t, (int, float)) or not 0 <= t < 1:
            raise ConfigError("plane.tilt must lie in [0, 1)")

    if not isinstance(cfg.thresholds, list) or not cfg.thresholds:
        raise ConfigError("thresholds must be a non-empty list")
    ths = [_rational(v, "thresholds") for v in cfg.thresholds]
    if any(v <= 0 for v in ths) or any(b <= a for a, b in zip(ths, ths[1:])):
        raise ConfigError("thresholds must be positive and strictly increasing")
    cfg.thresholds = [str(v) for v in ths]

    if not isinstance(cfg.weights, list):
        raise ConfigError("weights must be a list of [l, m, c]")
    for w in cfg.weights:
        if not (isinstance(w, list) and len(w) == 3):
            raise ConfigError("each weight is [l, m, c]")
        l = _integer(w[0], "weight l", 0)
        m = _integer(w[1], "weight m")
        if abs(m) > l or isinstance(w[2], bool) or not isinstance(w[2], (int, float)):
            raise ConfigError(f"bad weight {w!r}")

    _integer(cfg.genericity_bound, "genericity_bound", 0)
    _integer(cfg.prime_cutoff, "prime_cutoff", 3)
    _integer(cfg.workers, "workers", 1)
    _integer(cfg.l_max, "l_max", 1)
    _integer(cfg.orbit_sample, "orbit_sample", 0)
    _integer(cfg.oracle_seeds, "oracle_seeds", 0)
    if cfg.limit is not None:
        _integer(cfg.limit, "limit", 0)
    if not isinstance(cfg.output_dir, str) or not cfg.output_dir:
        raise ConfigError("output_dir must be a non-empty string")
    if not isinstance(cfg.vectors, list):
        raise ConfigError("vectors must be a list")
    cfg.vectors = [_int_vector(v, "vectors") for v in cfg.vectors]
    if cfg.fitted_constant is not None:
        if isinstance(cfg.fitted_constant, bool) or not isinstance(cfg.fitted_constant, (int, float)):
            raise ConfigError("fitted_constant must be a number")
        if not math.isfinite(cfg.fitted_constant) or cfg.fitted_constant < 0:
            raise ConfigError("fitted_constant must be finite and non-negative")
    if sub == "orbit" and not cfg.vectors and cfg.orbit_sample == 0:
        raise ConfigError("orbit needs vectors or orbit_sample > 0")


def resolve_config(args: argparse.Namespace) -> RunConfig:
    data: dict = {}
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
    known = set(RunConfig.__dataclass_fields__)
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    cfg = RunConfig(**data)
    if args.lattice is not None:
        cfg.lattice = _parse_lattice_flag(args.lattice)
    if args.plane_seed is not None:
        cfg.plane = {"seed": args.plane_seed}
    if args.axis_plane:
        cfg.plane = {"axis": True}
    if args.V is not None:
        cfg.thresholds = [args.V]
    if args.thresholds is not None:
        cfg.thresholds = [t for t in args.thresholds.split(",") if t]
    for name in ("workers", "limit", "prime_cutoff", "genericity_bound", "output_dir", "l_max",
                 "orbit_sample", "fitted_constant"):
        value = getattr(args, name)
        if value is not None:
            setattr(cfg, name, value)
    if args.weight:
        cfg.weights = [_weight_flag(w) for w in args.weight]
    if args.vector:
        cfg.vectors = list(args.vector)
    _validate(cfg, args.subcommand)
    return cfg


# building objects ------------------------------------------------------------------

def build_lattice(cfg: RunConfig):
    from .lattice import GramLattice, LatticeError, build_diagonal_lattice, build_k3_lattice

    conf = cfg.lattice
    if conf["kind"] == "k3":
        return build_k3_lattice()
    if conf["kind"] == "diagonal":
        return build_diagonal_lattice(conf["p"], conf["q"])
    try:
        return GramLattice.load(conf["path"])
    except OSError as exc:
        raise ConfigError(f"cannot read lattice file: {exc}") from None
    except (LatticeError, ValueError) as exc:
        raise ConfigError(f"malformed lattice file: {exc}") from None


def build_plane(cfg: RunConfig, lattice):
    from .plane import k3_standard_plane, plane_from_config, random_exact_plane

    conf = cfg.plane
    if "basis" in conf:
        if len(conf["basis"][0]) != lattice.rank:
            raise ConfigError("plane.basis vectors do not match the lattice rank")
        if len(conf["basis"]) != lattice.signature[0]:
            raise ConfigError("plane.basis must have as many vectors as the positive index")
    if "random_exact" in conf:
        return random_exact_plane(lattice, conf["random_exact"])
    if "standard" in conf:
        if lattice.rank != 22:
            raise PreconditionError("the standard plane is defined for the K3 lattice")
        return k3_standard_plane(lattice)
    return plane_from_config(lattice, conf)


def _thresholds(cfg: RunConfig) -> list[Fraction]:
    return [Fraction(v) for v in cfg.thresholds]


def _weight(cfg: RunConfig):
    from .sphere import WeightFunction

    w = WeightFunction.constant(0.0)
    for l, m, c in cfg.weights:
        w = w + WeightFunction.harmonic(l, m, float(c))
    return w


# subcommands: each returns {filename: text} -------------------------------------------

def _header(cfg: RunConfig) -> str:
    return "# config: " + json.dumps(cfg.echo(), sort_keys=True) + "\n"


def _json(cfg: RunConfig, payload: dict) -> str:
    return json.dumps({"config": cfg.echo(), **payload}, indent=2, sort_keys=True) + "\n"


def cmd_enumerate(cfg: RunConfig) -> dict[str, str]:
    from .enumeration import enumerate_isotropic

    lat = build_lattice(cfg)
    plane = build_plane(cfg, lat)
    V = _thresholds(cfg)[-1]
    iso = enumerate_isotropic(lat, plane, V, workers=cfg.workers)
    meta = {"config": cfg.echo(), "count": len(iso), "boundary_uncertain": int(iso.uncertain.sum())}
    return {
        "records.csv": _header(cfg) + iso.to_csv(cfg.limit),
        "records.jsonl": json.dumps(meta, sort_keys=True) + "\n" + iso.to_jsonl(cfg.limit),
    }


def cmd_count(cfg: RunConfig) -> dict[str, str]:
    from .counting import count_table, weighted_count
    from .enumeration import enumerate_isotropic

    lat = build_lattice(cfg)
    plane = build_plane(cfg, lat)
    ths = _thresholds(cfg)
    iso = enumerate_isotropic(lat, plane, ths[-1], workers=cfg.workers)
    table = count_table(iso, ths)
    summary = table.summary()
    if cfg.weights:
        w = _weight(cfg)
        rows = []
        for V, N in zip(ths, table.counts):
            s = weighted_count(iso, w, V)
            rows.append({"V": str(V), "weighted": s, "N_times_integral": N * w.integral})
        summary["weighted_counts"] = rows
    return {"counts.csv": _header(cfg) + table.to_csv(), "counts.json": _json(cfg, summary)}


def cmd_equidist(cfg: RunConfig) -> dict[str, str]:
    from .enumeration import enumerate_isotropic
    from .sphere import equator_pole_consistency, is_antipodally_closed, mollweide_dump, weyl_sums, weyl_table_csv

    lat = build_lattice(cfg)
    plane = build_plane(cfg, lat)
    if plane.rank != 3:
        raise PreconditionError("equidistribution lives on S^2: the plane must be 3-dimensional")
    ths = _thresholds(cfg)
    iso = enumerate_isotropic(lat, plane, ths[-1], workers=cfg.workers)
    rows, summary = [], []
    for V in ths:
        certain, _ = iso.mask_within(V)
        pts = iso.directions[certain]
        table = weyl_sums(pts, cfg.l_max) if len(pts) else []
        rows.append((float(V), table))
        worst = max((abs(s) for _, _, s in table), default=0.0) / max(len(pts), 1)
        summary.append({"V": str(V), "N": int(len(pts)), "max_normalized_weyl_sum": worst,
                        "antipodally_closed": bool(is_antipodally_closed(pts)) if len(pts) else True})
    payload = {"thresholds": summary}
    if cfg.weights:
        pole, equator = equator_pole_consistency(iso.directions, _weight(cfg))
        payload["equator_pole"] = {"pole_side": pole, "equator_side": equator}
    dump = mollweide_dump(iso.directions, np.sqrt(iso.snorm_float))
    if cfg.limit is not None:
        dump = dump[:cfg.limit]
    points = "lon,lat,V\n" + "".join(f"{a!r},{b!r},{c!r}\n" for a, b, c in dump)
    return {
        "weyl.csv": _header(cfg) + weyl_table_csv(rows),
        "points.csv": _header(cfg) + points,
        "equidist.json": _json(cfg, payload),
    }


def cmd_orbit(cfg: RunConfig) -> dict[str, str]:
    from .enumeration import enumerate_isotropic
    from .lattice import quadratic_value
    from .orbits import complement_inertia, hyperbolic_splitting, reduce_to_standard, verify_isometry

    lat = build_lattice(cfg)
    vectors = [tuple(v) for v in cfg.vectors]
    for v in vectors:
        if len(v) != lat.rank:
            raise ConfigError(f"vector {list(v)} does not match the lattice rank {lat.rank}")
    if cfg.orbit_sample:
        plane = build_plane(cfg, lat)
        iso = enumerate_isotropic(lat, plane, _thresholds(cfg)[-1], workers=cfg.workers)
        vectors += [tuple(int(x) for x in row) for row in iso.vectors[:cfg.orbit_sample]]
    out = []
    for v in vectors:
        cert = hyperbolic_splitting(lat, v)
        gamma = reduce_to_standard(lat, v)
        if not verify_isometry(lat, gamma) or quadratic_value(lat, gamma.apply(v)) != 0:
            raise ConsistencyFailure(f"reduction of {list(v)} failed verification")
        out.append({
            "vector": list(v),
            "certificate": cert.to_json(),
            "complement_inertia": list(complement_inertia(cert)),
            "reduction": json.loads(gamma.to_json()),
            "generators": len(gamma.provenance),
        })
    return {"orbit.json": _json(cfg, {"vectors": out})}


def cmd_constant(cfg: RunConfig) -> dict[str, str]:
    from .counting import count_table, ratio_ladder
    from .enumeration import enumerate_isotropic
    from .tamagawa import constant_report

    lat = build_lattice(cfg)
    rel = None
    if cfg.fitted_constant is not None:
        fitted = float(cfg.fitted_constant)
    else:
        plane = build_plane(cfg, lat)
        ths = _thresholds(cfg)
        table = count_table(enumerate_isotropic(lat, plane, ths[-1], workers=cfg.workers), ths)
        fitted = table.fitted_constant()
        # spread of N(V) / V^(p+q-2) over the upper half of the ladder
        upper = ratio_ladder(table)[len(ths) // 2:]
        if len(upper) >= 2 and fitted > 0:
            rel = float(np.std(upper, ddof=1) / np.mean(upper))
    report = constant_report(fitted, cfg.prime_cutoff, relative_stderr=rel, gram=lat.gram)
    return {"constant.json": _json(cfg, report.to_json())}


def cmd_report(cfg: RunConfig) -> dict[str, str]:
    from .k3 import fibration_report

    lat = build_lattice(cfg)
    plane = build_plane(cfg, lat)
    if plane.rank != 3:
        raise PreconditionError("fibration reports need a 3-dimensional plane")
    rep = fibration_report(lat, plane, _thresholds(cfg)[-1], cfg.genericity_bound, cfg.workers, cfg.limit)
    return {"report.json": _json(cfg, rep)}


def _oracle_cases(cfg: RunConfig):
    from .lattice import build_diagonal_lattice
    from .plane import axis_plane, random_exact_plane

    if cfg.lattice["kind"] != "k3":
        lat = build_lattice(cfg)
        yield lat, build_plane(cfg, lat)
        return
    # default suite: rank <= 5 lattices, axis plane plus seeded exact planes
    for p, q in ((2, 3), (1, 2), (1, 3), (2, 2)):
        lat = build_diagonal_lattice(p, q)
        yield lat, axis_plane(lat)
        for seed in range(cfg.oracle_seeds):
            yield lat, random_exact_plane(lat, seed)


def cmd_oracle_check(cfg: RunConfig) -> dict[str, str]:
    from .enumeration import ORACLE_MAX_RANK, brute_force_oracle, enumerate_isotropic

    cases, mismatches = [], 0
    for lat, plane in _oracle_cases(cfg):
        if lat.rank > ORACLE_MAX_RANK:
            raise PreconditionError(f"brute force is limited to rank {ORACLE_MAX_RANK}")
        if not plane.is_exact:
            raise PreconditionError("oracle comparison needs an exact plane")
        for V in _thresholds(cfg):
            got = list(enumerate_isotropic(lat, plane, V, workers=cfg.workers))
            want = brute_force_oracle(lat, plane, V)
            ok = got == want
            mismatches += not ok
            cases.append({"lattice": lat.name, "plane": plane.describe(), "V": str(V),
                          "enumerated": len(got), "oracle": len(want), "match": ok})
    files = {"oracle.json": _json(cfg, {"cases": cases, "mismatches": mismatches})}
    if mismatches:
        raise ConsistencyFailure(f"{mismatches} oracle mismatches", files)
    return files


COMMANDS = {
    "enumerate": cmd_enumerate,
    "count": cmd_count,
    "equidist": cmd_equidist,
    "orbit": cmd_orbit,
    "constant": cmd_constant,
    "report": cmd_report,
    "oracle-check": cmd_oracle_check,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="twistorcount", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON run configuration")
        sp.add_argument("--lattice", help="k3 | diagonal:P,Q | file:PATH")
        sp.add_argument("--plane-seed", type=int, help="seeded random (float) plane")
        sp.add_argument("--axis-plane", action="store_true", help="span of the first p coordinates")
        sp.add_argument("--V", help="single threshold (rational, e.g. 3/2)")
        sp.add_argument("--thresholds", help="comma-separated increasing thresholds")
        sp.add_argument("--output-dir")
        sp.add_argument("--workers", type=int)
        sp.add_argument("--limit", type=int, help="cap on records written")
        sp.add_argument("--prime-cutoff", type=int)
        sp.add_argument("--genericity-bound", type=int)
        sp.add_argument("--l-max", type=int)
        sp.add_argument("--orbit-sample", type=int)
        sp.add_argument("--fitted-constant", type=float)
        sp.add_argument("--weight", action="append", help="harmonic term L,M,C (repeatable)")
        sp.add_argument("--vector", action="append", help="comma-separated integer vector (repeatable)")
    return parser


def _write(out_dir: Path, files: dict[str, str]) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, text in files.items():
        (out_dir / name).write_text(text)


def main(argv=None) -> int:
    from .k3 import ConsistencyError
    from .lattice import LatticeError
    from .orbits import ReductionError
    from .plane import PlaneError
    from .sphere import SphereError
    from .tamagawa import ConstantError

    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        cfg = resolve_config(args)
        files = COMMANDS[args.subcommand](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (PreconditionError, LatticeError, PlaneError, SphereError, ConstantError) as exc:
        print(f"precondition failed: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except ConsistencyFailure as exc:
        print(f"consistency failure: {exc.args[0]}", file=sys.stderr)
        if len(exc.args) > 1:
            _write(Path(cfg.output_dir), exc.args[1])
        return EXIT_CONSISTENCY
    except (ConsistencyError, ReductionError, AssertionError) as exc:
        print(f"consistency failure: {exc}", file=sys.stderr)
        return EXIT_CONSISTENCY
    _write(Path(cfg.output_dir), files)
    for name in files:
        print(Path(cfg.output_dir) / name)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

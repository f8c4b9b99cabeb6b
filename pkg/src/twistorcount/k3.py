"""Reading enumeration output as fibrations of a twistor family of K3 surfaces.

Each primitive isotropic ``e`` is the fiber class of an elliptic fibration
at the complex structure ``u_e = e_P / |e|_P`` with fiber volume ``|e|_P``;
``e`` and ``-e`` give one special Lagrangian fibration for the equator with
poles ``+-u_e``.  The correspondence needs a generic plane, which is only
checked up to a bound; failures downgrade the labels, never the counts.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .enumeration import IsotropicSet, enumerate_isotropic
from .lattice import GramLattice
from .plane import TwistorPlane, genericity_witness_search

GENERIC = "GENERIC_UP_TO_BOUND"
NON_GENERIC = "NON_GENERIC"
SINGULAR_FIBERS_NOTE = "each elliptic fibration has 24 singular fibers counted with multiplicity (not computed)"
NON_GENERIC_DISCLAIMER = (
    "a (-2)-vector shares a proportional projection with another lattice vector; "
    "the fibration reading of these lattice counts may overcount"
)


class ConsistencyError(RuntimeError):
    pass


@dataclass(frozen=True)
class FibrationRecord:
    fiber_class: tuple[int, ...]
    pole: tuple[float, float, float]
    volume: float


@dataclass(frozen=True)
class SLagRecord:
    pair: tuple[tuple[int, ...], tuple[int, ...]]
    equator_normal: tuple[float, float, float]
    volume: float


@dataclass
class GenericityStatus:
    status: str
    bound: int
    witnesses: list

    def to_json(self) -> dict:
        out = {"status": self.status, "bound": self.bound, "witness_count": len(self.witnesses)}
        if self.status == NON_GENERIC:
            out["disclaimer"] = NON_GENERIC_DISCLAIMER
            w = self.witnesses[0]
            out["example_witness"] = {"x": list(w.x), "v": list(w.v)}
        return out


def check_genericity(plane: TwistorPlane, bound: int, workers: int = 1) -> GenericityStatus:
    """Witness search on the exact plane (float planes are searched via their dyadic basis)."""
    if bound <= 0:
        return GenericityStatus("UNCHECKED", 0, [])
    witnesses = genericity_witness_search(plane.exact_twin(), bound, workers=workers, max_witnesses=1)
    return GenericityStatus(NON_GENERIC if witnesses else GENERIC, bound, witnesses)


def _require_three_plane(plane: TwistorPlane):
    if plane.rank != 3:
        raise ValueError("twistor planes are 3-dimensional")


def _records_from(iso: IsotropicSet) -> list[FibrationRecord]:
    vols = np.sqrt(iso.snorm_float)
    return [
        FibrationRecord(tuple(int(x) for x in iso.vectors[i]), tuple(float(x) for x in iso.directions[i]), float(vols[i]))
        for i in range(len(iso))
    ]


def elliptic_fibrations(lattice: GramLattice, plane: TwistorPlane, V, genericity_bound: int = 2,
                        workers: int = 1, records: IsotropicSet | None = None):
    """``(records, genericity)``: one elliptic fibration per primitive isotropic vector."""
    _require_three_plane(plane)
    status = check_genericity(plane, genericity_bound, workers)
    iso = records if records is not None else enumerate_isotropic(lattice, plane, V, workers=workers)
    return _records_from(iso), status


def _pair_up(iso: IsotropicSet) -> list[SLagRecord]:
    index = {tuple(int(x) for x in row): i for i, row in enumerate(iso.vectors)}
    vols = np.sqrt(iso.snorm_float)
    out = []
    for e, i in index.items():
        neg = tuple(-x for x in e)
        j = index.get(neg)
        if j is None:
            raise ConsistencyError(f"{e} has no partner {neg}")
        if e > neg:  # keep the lexicographically smaller member first
            continue
        if iso.snorm[i] != iso.snorm[j]:
            raise ConsistencyError(f"volumes differ within the pair {e}")
        normal = iso.directions[i] if iso.directions[i][np.flatnonzero(iso.directions[i])[0]] > 0 else -iso.directions[i]
        out.append(SLagRecord((e, neg), tuple(float(x) for x in normal), float(vols[i])))
    out.sort(key=lambda r: r.pair[0])
    return out


def slag_fibrations(lattice: GramLattice, plane: TwistorPlane, V, genericity_bound: int = 2,
                    workers: int = 1, records: IsotropicSet | None = None):
    """``(records, genericity)`` with ``{e, -e}`` merged into one special Lagrangian fibration."""
    _require_three_plane(plane)
    status = check_genericity(plane, genericity_bound, workers)
    iso = records if records is not None else enumerate_isotropic(lattice, plane, V, workers=workers)
    recs = _pair_up(iso)
    if 2 * len(recs) != len(iso):
        raise ConsistencyError("sLag pairing did not halve the count")
    return recs, status


def minimizing_surface_classes(lattice: GramLattice, plane: TwistorPlane, V, workers: int = 1,
                               records: IsotropicSet | None = None) -> list[tuple[tuple[int, ...], float]]:
    """Homology classes of volume-minimizing tori: the fiber classes with their volumes."""
    iso = records if records is not None else enumerate_isotropic(lattice, plane, V, workers=workers)
    return [(r.fiber_class, r.volume) for r in _records_from(iso)]


def fibration_report(lattice: GramLattice, plane: TwistorPlane, V, genericity_bound: int = 2,
                     workers: int = 1, limit: int | None = None) -> dict:
    iso = enumerate_isotropic(lattice, plane, V, workers=workers)
    ell, status = elliptic_fibrations(lattice, plane, V, genericity_bound, workers, records=iso)
    slag, _ = slag_fibrations(lattice, plane, V, 0, workers, records=iso)
    shown = ell if limit is None else ell[:limit]
    return {
        "summary": {
            "V": str(V),
            "N_elliptic": len(ell),
            "N_slag": len(slag),
            "boundary_uncertain": int(iso.uncertain.sum()),
            "genericity": status.to_json(),
            "notes": [SINGULAR_FIBERS_NOTE],
        },
        "records": [
            {
                "fiber_class": list(r.fiber_class),
                "pole_lon": math.degrees(math.atan2(r.pole[1], r.pole[0])),
                "pole_lat": math.degrees(math.asin(max(-1.0, min(1.0, r.pole[2])))),
                "volume": r.volume,
            }
            for r in shown
        ],
    }


def report_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"

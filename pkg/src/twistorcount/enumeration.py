"""Primitive isotropic vectors of bounded seminorm.

For isotropic ``e`` the majorant satisfies ``Q_P(e) = 2 |e|_P^2``, so the
set ``{q(e) = 0, |e|_P <= V}`` is the isotropic part of the ellipsoid
``Q_P <= 2 V^2``.  The search runs on that ellipsoid (see :mod:`search`);
membership, primitivity and isotropy are then re-checked exactly.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

import numpy as np

from .lattice import GramLattice, LatticeError
from .plane import TwistorPlane
from .search import ellipsoid_candidates, precondition, sort_rows

ORACLE_MAX_RANK = 7


@dataclass(frozen=True)
class EnumRecord:
    vector: tuple[int, ...]
    snorm_sq: Fraction | float
    hitting_time: float
    direction: tuple[float, ...]
    boundary_uncertain: bool = False
    snorm_halfwidth: float = 0.0

    def csv_row(self) -> list[str]:
        return [
            " ".join(map(str, self.vector)),
            str(self.snorm_sq) if isinstance(self.snorm_sq, Fraction) else repr(self.snorm_sq),
            repr(self.hitting_time),
            " ".join(repr(x) for x in self.direction),
            str(int(self.boundary_uncertain)),
        ]

    def to_json(self) -> dict:
        return {
            "vector": list(self.vector),
            "snorm_sq": str(self.snorm_sq) if isinstance(self.snorm_sq, Fraction) else self.snorm_sq,
            "hitting_time": self.hitting_time,
            "direction": list(self.direction),
            "boundary_uncertain": self.boundary_uncertain,
        }


CSV_HEADER = ["vector", "snorm_sq", "hitting_time", "direction", "boundary_uncertain"]


class IsotropicSet:
    """Primitive isotropic vectors with ``|e|_P <= V``, held as arrays.

    Iterating yields :class:`EnumRecord` in lexicographic order of
    coordinates.  ``snorm`` holds Fractions in exact mode and floats (with
    ``halfwidth``) in float mode.
    """

    def __init__(self, plane: TwistorPlane, bound: Fraction | float, vectors: np.ndarray, snorm, halfwidth: np.ndarray,
                 uncertain: np.ndarray):
        self.plane = plane
        self.bound = bound
        self.vectors = vectors
        self.snorm = snorm
        self.halfwidth = halfwidth
        self.uncertain = uncertain
        self.directions = plane.directions(vectors) if len(vectors) else np.zeros((0, plane.rank))
        self.snorm_float = np.array([float(s) for s in snorm]) if len(vectors) else np.zeros(0)

    @property
    def exact(self) -> bool:
        return self.plane.is_exact

    def __len__(self) -> int:
        return len(self.vectors)

    def record(self, i: int) -> EnumRecord:
        s = self.snorm[i]
        return EnumRecord(
            vector=tuple(int(x) for x in self.vectors[i]),
            snorm_sq=s,
            hitting_time=0.5 * math.log(s),
            direction=tuple(float(x) for x in self.directions[i]),
            boundary_uncertain=bool(self.uncertain[i]),
            snorm_halfwidth=float(self.halfwidth[i]),
        )

    def __iter__(self) -> Iterator[EnumRecord]:
        return (self.record(i) for i in range(len(self)))

    def records(self, limit: int | None = None) -> list[EnumRecord]:
        return [self.record(i) for i in range(len(self) if limit is None else min(limit, len(self)))]

    def mask_within(self, bound) -> tuple[np.ndarray, np.ndarray]:
        """Masks ``(certain, uncertain)`` for membership at a smaller bound."""
        b2 = Fraction(bound) ** 2 if self.exact else float(bound) ** 2
        if self.exact:
            certain = np.array([s <= b2 for s in self.snorm], dtype=bool)
            return certain, np.zeros(len(self), dtype=bool)
        s, hw = self.snorm_float, self.halfwidth
        certain = s + hw <= b2
        uncertain = ~certain & (s - hw <= b2)
        return certain, uncertain

    def restrict(self, bound) -> IsotropicSet:
        certain, uncertain = self.mask_within(bound)
        keep = certain | uncertain
        return IsotropicSet(
            self.plane, bound, self.vectors[keep],
            [s for s, k in zip(self.snorm, keep) if k], self.halfwidth[keep], uncertain[keep],
        )

    def to_csv(self, limit: int | None = None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for rec in itertools.islice(iter(self), limit):
            w.writerow(rec.csv_row())
        return buf.getvalue()

    def to_jsonl(self, limit: int | None = None) -> str:
        return "".join(json.dumps(rec.to_json()) + "\n" for rec in itertools.islice(iter(self), limit))


def _check_bound(V):
    if isinstance(V, float):
        V = Fraction(V)
    V = Fraction(V)
    if V <= 0:
        raise LatticeError("V must be positive")
    return V


def _primitive_isotropic(lattice: GramLattice, cand: np.ndarray) -> np.ndarray:
    if len(cand) == 0:
        return cand
    q = np.einsum("ij,jk,ik->i", cand, lattice.array, cand)
    g = np.gcd.reduce(cand, axis=1)
    return cand[(q == 0) & (g == 1)]


def _classify(plane: TwistorPlane, V: Fraction, cand: np.ndarray):
    """Exact (or interval) membership ``|e|_P <= V`` for candidate rows."""
    if plane.is_exact:
        v2 = V * V
        snorm = [plane.exact_seminorm_sq(tuple(int(x) for x in row)) for row in cand]
        keep = np.array([s <= v2 for s in snorm], dtype=bool)
        snorm = [s for s, k in zip(snorm, keep) if k]
        n_keep = int(keep.sum())
        return cand[keep], snorm, np.zeros(n_keep), np.zeros(n_keep, dtype=bool)
    v2 = float(V) ** 2
    s, hw = plane.seminorms_float(cand)
    certain = s + hw <= v2
    uncertain = ~certain & (s - hw <= v2)
    keep = certain | uncertain
    return cand[keep], [float(x) for x in s[keep]], hw[keep], uncertain[keep]


def enumerate_isotropic(lattice: GramLattice, plane: TwistorPlane, V, workers: int = 1,
                        split_depth: int = 2) -> IsotropicSet:
    """Every primitive ``e`` with ``q(e) = 0`` and ``|e|_P <= V`` (both signs), in lexicographic order.

    In float mode vectors whose seminorm interval straddles ``V^2`` are kept
    and flagged ``boundary_uncertain``.
    """
    if plane.lattice.gram != lattice.gram:
        raise LatticeError("plane belongs to a different lattice")
    V = _check_bound(V)
    pre = _preconditioned(plane)
    radius2 = 2 * float(V) ** 2
    cand = ellipsoid_candidates(pre, radius2, isotropic=True, workers=workers, split_depth=split_depth)
    cand = _primitive_isotropic(lattice, cand)
    vecs, snorm, hw, unc = _classify(plane, V, cand)
    return IsotropicSet(plane, V, vecs, snorm, hw, unc)


_PRE_CACHE: dict[int, tuple[TwistorPlane, object]] = {}


def _preconditioned(plane: TwistorPlane):
    hit = _PRE_CACHE.get(id(plane))
    if hit is not None and hit[0] is plane:
        return hit[1]
    pre = precondition(plane.majorant, plane.lattice.gram, exact=plane.is_exact)
    if len(_PRE_CACHE) > 32:
        _PRE_CACHE.clear()
    _PRE_CACHE[id(plane)] = (plane, pre)
    return pre


def oracle_box(plane: TwistorPlane, V) -> list[int]:
    """Per-coordinate bounds ``|e_i| <= V sqrt(2 (Q^-1)_ii)`` of the ellipsoid ``Q <= 2V^2``."""
    from .plane import _finv

    qinv = _finv(plane.majorant)
    V = Fraction(V)
    out = []
    for i in range(plane.lattice.rank):
        t = 2 * V * V * qinv[i][i]  # bound^2, exact
        b = math.isqrt(t.numerator // t.denominator)
        while Fraction((b + 1) ** 2) <= t:
            b += 1
        out.append(b)
    return out


def brute_force_oracle(lattice: GramLattice, plane: TwistorPlane, V) -> list[EnumRecord]:
    """Box scan over the ellipsoid's bounding box; exact filters; lexicographic order."""
    if lattice.rank > ORACLE_MAX_RANK:
        raise LatticeError(f"oracle limited to rank <= {ORACLE_MAX_RANK}")
    if not plane.is_exact:
        raise LatticeError("oracle needs an exact plane")
    V = _check_bound(V)
    box = oracle_box(plane, V)
    axes = [np.arange(-b, b + 1, dtype=np.int64) for b in box]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, lattice.rank)
    # meshgrid with ij indexing already yields lexicographic order
    q = np.einsum("ij,jk,ik->i", grid, lattice.array, grid)
    grid = grid[q == 0]
    grid = grid[np.any(grid != 0, axis=1)]
    grid = grid[np.gcd.reduce(grid, axis=1) == 1]
    v2 = V * V
    keep = [row for row in grid if plane.exact_seminorm_sq(tuple(int(x) for x in row)) <= v2]
    if not keep:
        return []
    arr = sort_rows(np.array(keep, dtype=np.int64))
    snorm = [plane.exact_seminorm_sq(tuple(int(x) for x in row)) for row in arr]
    res = IsotropicSet(plane, V, arr, snorm, np.zeros(len(arr)), np.zeros(len(arr), dtype=bool))
    return list(res)

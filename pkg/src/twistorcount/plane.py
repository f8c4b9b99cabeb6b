"""Positive-definite planes ``P`` inside ``L (x) R`` and the seminorm they define.

A plane carries the data needed downstream:

* ``pair_matrix`` A (r x n) with ``c = A e`` the pairings of ``e`` with the basis,
* ``gram_p`` H = B^T G B and its inverse, so ``|e|_P^2 = c^T H^-1 c``,
* the projector ``pi = B H^-1 A`` and the majorant ``Q = 2 A^T H^-1 A - G``,
* a float frame matrix M (r x n) with ``M e`` the coordinates of ``e_P`` in an
  orthonormal frame of ``P``.

Exact planes keep A, H, pi and Q as Fractions.  Float planes are spanned by a
float64 basis; their seminorms come with a rounding half-width.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import numpy as np

from .lattice import (
    GramLattice,
    LatticeError,
    as_vector,
    first_nonpositive_minor,
    inertia,
    quadratic_value,
)

EXACT = "exact"
FLOAT = "float"

# Float-mode half-widths are eps * FLOAT_SAFETY * n * cond(H) times the
# natural magnitude of the computation.
FLOAT_SAFETY = 64.0
RANDOM_TILT = 0.6
MAX_RESAMPLES = 16


class PlaneError(ValueError):
    pass


def _fmul(a, b):
    m, k, n = len(a), len(b), len(b[0])
    return [[sum(a[i][t] * b[t][j] for t in range(k) if a[i][t]) for j in range(n)] for i in range(m)]


def _ftranspose(a):
    return [list(col) for col in zip(*a)]


def _finv(a):
    n = len(a)
    m = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(a)]
    for col in range(n):
        piv = next(r for r in range(col, n) if m[r][col] != 0)
        m[col], m[piv] = m[piv], m[col]
        p = m[col][col]
        m[col] = [x / p for x in m[col]]
        for r in range(n):
            if r != col and m[r][col] != 0:
                f = m[r][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[col])]
    return [row[n:] for row in m]


def _lcm_denominator(rows) -> int:
    den = 1
    for row in rows:
        for x in row:
            den = math.lcm(den, Fraction(x).denominator)
    return den


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (tuple, list)) and len(x) == 2:
        return Fraction(int(x[0]), int(x[1]))
    if isinstance(x, str):
        try:
            return Fraction(x)
        except (ValueError, ZeroDivisionError):
            raise PlaneError(f"cannot read {x!r} as an exact rational") from None
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    raise PlaneError(f"cannot read {x!r} as an exact rational")


@dataclass(frozen=True)
class GenericityWitness:
    """A (-2)-vector ``x`` and a vector ``v`` whose projections to P are dependent."""

    x: tuple[int, ...]
    v: tuple[int, ...]
    bound: int


class TwistorPlane:
    """A positive-definite r-plane in ``L (x) R``; immutable after construction."""

    def __init__(self, lattice: GramLattice, basis, mode: str = EXACT, descriptor: dict | None = None):
        self.lattice = lattice
        self.mode = mode
        n = lattice.rank
        if mode == EXACT:
            self.basis = tuple(tuple(_as_fraction(x) for x in b) for b in basis)
        elif mode == FLOAT:
            self.basis = tuple(tuple(float(x) for x in b) for b in basis)
        else:
            raise PlaneError(f"unknown mode {mode!r}")
        self.rank = len(self.basis)
        if self.rank == 0:
            raise PlaneError("empty basis")
        if any(len(b) != n for b in self.basis):
            raise PlaneError("basis vector length does not match the lattice rank")
        self.descriptor = descriptor or {"mode": mode, "basis": [[str(x) for x in b] for b in self.basis]}
        if mode == EXACT:
            self._build_exact()
        else:
            self._build_float()
        self.margin = np.finfo(float).eps * FLOAT_SAFETY * n * self.cond if mode == FLOAT else 0.0

    # construction -----------------------------------------------------------

    def _build_exact(self):
        g = self.lattice.gram
        bt = [list(b) for b in self.basis]  # r x n
        a = _fmul(bt, [list(row) for row in g])  # A = B^T G
        h = _fmul(a, _ftranspose(bt))
        k = first_nonpositive_minor(_scaled_integer(h))
        if k is not None:
            raise PlaneError(f"span is not positive definite: leading principal minor of order {k} is not positive")
        hinv = _finv(h)
        self.pair_matrix = tuple(tuple(row) for row in a)
        self.gram_p = tuple(tuple(row) for row in h)
        self.gram_p_inv = tuple(tuple(row) for row in hinv)
        ha = _fmul(hinv, a)
        proj = _fmul(_ftranspose(bt), ha)
        maj = _fmul(_ftranspose(a), ha)
        n = self.lattice.rank
        maj = [[2 * maj[i][j] - g[i][j] for j in range(n)] for i in range(n)]
        self.projector = tuple(tuple(row) for row in proj)
        self.majorant = tuple(tuple(row) for row in maj)
        # integer scaling for fast exact seminorms
        self._a_den = _lcm_denominator(a)
        self._a_int = [[int(x * self._a_den) for x in row] for row in a]
        self._h_den = _lcm_denominator(hinv)
        self._hinv_int = [[int(x * self._h_den) for x in row] for row in hinv]
        hf = np.array([[float(x) for x in row] for row in h])
        af = np.array([[float(x) for x in row] for row in a])
        self._finish_frame(hf, af)
        if inertia(_scaled_integer(maj)) != (n, 0, 0):
            raise PlaneError("majorant is not positive definite (plane dimension must equal the positive index)")

    def _build_float(self):
        g = self.lattice.array.astype(float)
        bt = np.array(self.basis)
        a = bt @ g
        h = a @ bt.T
        h = (h + h.T) / 2
        try:
            np.linalg.cholesky(h)
        except np.linalg.LinAlgError:
            raise PlaneError("span is not positive definite") from None
        self.pair_matrix = a
        self.gram_p = h
        self.gram_p_inv = np.linalg.inv(h)
        self.projector = bt.T @ self.gram_p_inv @ a
        self._finish_frame(h, a)
        maj = 2 * self.frame.T @ self.frame - g
        self.majorant = (maj + maj.T) / 2
        try:
            np.linalg.cholesky(self.majorant)
        except np.linalg.LinAlgError:
            raise PlaneError("majorant is not positive definite (plane dimension must equal the positive index)") from None

    def _finish_frame(self, hf, af):
        chol = np.linalg.cholesky(hf)
        self.frame = np.linalg.solve(chol, af)  # r x n, rows orthonormal under G
        ev = np.linalg.eigvalsh(hf)
        self.cond = float(ev[-1] / ev[0])

    # queries ----------------------------------------------------------------

    @property
    def is_exact(self) -> bool:
        return self.mode == EXACT

    @cached_property
    def majorant_float(self) -> np.ndarray:
        if self.is_exact:
            return np.array([[float(x) for x in row] for row in self.majorant])
        return self.majorant

    def pairings(self, e) -> list:
        e = as_vector(e)
        if self.is_exact:
            return [Fraction(sum(x * y for x, y in zip(row, e)), self._a_den) for row in self._a_int]
        return list(self.pair_matrix @ np.array(e, dtype=float))

    def seminorm_sq(self, e):
        """``|e|_P^2``: a Fraction (exact mode) or ``(value, half_width)`` (float mode)."""
        e = as_vector(e)
        if len(e) != self.lattice.rank:
            raise LatticeError("dimension mismatch")
        if self.is_exact:
            return self.exact_seminorm_sq(e)
        y, bound = self._frame_coords_with_bound(np.array([e], dtype=np.int64))
        return float(np.sum(y[0] ** 2)), float(bound[0])

    def exact_seminorm_sq(self, e) -> Fraction:
        c = [sum(x * y for x, y in zip(row, e)) for row in self._a_int]
        num = sum(c[i] * sum(self._hinv_int[i][j] * c[j] for j in range(self.rank)) for i in range(self.rank))
        return Fraction(num, self._h_den * self._a_den ** 2)

    def majorant_value(self, e):
        e = as_vector(e)
        if self.is_exact:
            return 2 * self.exact_seminorm_sq(e) - quadratic_value(self.lattice, e)
        return float(np.array(e) @ self.majorant @ np.array(e))

    def project(self, e):
        """``pi_P e`` in lattice coordinates."""
        e = as_vector(e)
        if self.is_exact:
            return tuple(sum(p * x for p, x in zip(row, e)) for row in self.projector)
        return self.projector @ np.array(e, dtype=float)

    def frame_coords(self, vectors: np.ndarray) -> np.ndarray:
        """Coordinates of the projections in the orthonormal frame (rows in, rows out).

        Accumulates column by column without BLAS so each row's result is the
        same whatever the batch it is computed in.
        """
        vectors = np.asarray(vectors)
        out = np.zeros((len(vectors), self.rank))
        for j in range(vectors.shape[1]):
            col = vectors[:, j].astype(float)
            out += col[:, None] * self.frame[None, :, j]
        return out

    def _frame_coords_with_bound(self, vectors: np.ndarray):
        y = self.frame_coords(vectors)
        mag = np.abs(vectors).astype(float) @ np.abs(self.frame).T
        bound = 2.0 * self.margin * np.sum(mag * (np.abs(y) + mag * self.margin), axis=1)
        return y, bound

    def seminorms_float(self, vectors: np.ndarray):
        """Float seminorms and rounding half-widths for many vectors."""
        y, bound = self._frame_coords_with_bound(np.asarray(vectors))
        return np.sum(y ** 2, axis=1), bound

    def directions(self, vectors: np.ndarray) -> np.ndarray:
        y = self.frame_coords(vectors)
        norms = np.sqrt(np.sum(y ** 2, axis=1))
        if np.any(norms == 0):
            raise PlaneError("zero projection has no direction")
        return y / norms[:, None]

    def direction(self, e) -> np.ndarray:
        e = as_vector(e)
        if self.is_exact and self.exact_seminorm_sq(e) == 0:
            raise PlaneError("zero projection has no direction")
        return self.directions(np.array([e], dtype=np.int64))[0]

    def exact_twin(self) -> TwistorPlane:
        """The same plane with its (dyadic) float basis read as exact rationals."""
        if self.is_exact:
            return self
        basis = [[Fraction(x) for x in b] for b in self.basis]
        return TwistorPlane(self.lattice, basis, EXACT, descriptor=self.descriptor)

    def describe(self) -> dict:
        return dict(self.descriptor)


def _scaled_integer(m):
    den = _lcm_denominator(m)
    return [[int(Fraction(x) * den) for x in row] for row in m]


def make_plane(lattice: GramLattice, basis: Sequence[Sequence]) -> TwistorPlane:
    """Exact plane spanned by rational basis vectors.

    Entries may be ints, Fractions, strings like ``"3/5"`` or
    ``(numerator, denominator)`` pairs.
    """
    basis = [[_as_fraction(x) for x in b] for b in basis]
    desc = {"mode": EXACT, "basis": [[str(x) for x in b] for b in basis]}
    return TwistorPlane(lattice, basis, EXACT, descriptor=desc)


def axis_plane(lattice: GramLattice, r: int | None = None) -> TwistorPlane:
    """Plane spanned by the first ``r`` basis vectors (r defaults to the positive index)."""
    r = lattice.signature[0] if r is None else r
    basis = [[int(i == j) for j in range(lattice.rank)] for i in range(r)]
    return make_plane(lattice, basis)


def random_plane(lattice: GramLattice, seed: int, tilt: float = RANDOM_TILT) -> TwistorPlane:
    """Float plane of dimension p drawn deterministically from ``seed``.

    Starts from the positive eigenspace of the Gram matrix and applies a
    random hyperbolic tilt towards the negative eigenspace: with u_i, w_j
    q-orthonormal eigenvectors, ``b_i = u_i + sum_j A_ji w_j`` where the
    largest singular value of A equals ``tilt`` (< 1 keeps the span positive).
    """
    if not 0 <= tilt < 1:
        raise PlaneError("tilt must lie in [0, 1)")
    p, _, q = lattice.signature
    g = lattice.array.astype(float)
    evals, evecs = np.linalg.eigh(g)
    pos = evecs[:, evals > 0] / np.sqrt(evals[evals > 0])
    neg = evecs[:, evals < 0] / np.sqrt(-evals[evals < 0])
    rng = np.random.default_rng(seed)
    for _ in range(MAX_RESAMPLES):
        rot, _ = np.linalg.qr(rng.standard_normal((p, p)))
        a = rng.standard_normal((q, p))
        smax = np.linalg.svd(a, compute_uv=False)[0]
        if smax < 1e-8:
            continue
        a *= tilt / smax
        basis = (pos @ rot + neg @ a @ rot).T
        h = basis @ g @ basis.T
        if np.linalg.eigvalsh((h + h.T) / 2)[0] > 1e-6:
            desc = {"mode": FLOAT, "seed": int(seed), "tilt": tilt}
            return TwistorPlane(lattice, basis, FLOAT, descriptor=desc)
    raise PlaneError("could not draw a non-degenerate plane")


def plane_from_config(lattice: GramLattice, conf: dict) -> TwistorPlane:
    """Build a plane from a config mapping: ``{"basis": [...]}``, ``{"seed": s}`` or ``{"axis": true}``."""
    if "basis" in conf:
        return make_plane(lattice, conf["basis"])
    if "seed" in conf:
        return random_plane(lattice, int(conf["seed"]), float(conf.get("tilt", RANDOM_TILT)))
    if conf.get("axis"):
        return axis_plane(lattice)
    raise PlaneError(f"unrecognised plane config {conf!r}")


def _canonical_sign(v: tuple[int, ...]) -> tuple[int, ...]:
    for x in v:
        if x:
            return v if x > 0 else tuple(-y for y in v)
    return v


def _rank_two(u, v) -> bool:
    n = len(u)
    return any(u[i] * v[j] != u[j] * v[i] for i in range(n) for j in range(i + 1, n))


def genericity_witness_search(plane: TwistorPlane, height_bound: int, workers: int = 1,
                              max_witnesses: int | None = None) -> list[GenericityWitness]:
    """All pairs ``(x, v)`` with ``q(x) = -2``, ``Q_P(x), Q_P(v) <= height_bound^2``,
    ``x, v`` linearly independent and ``pi_P x, pi_P v`` linearly dependent.

    Vectors are taken up to sign (first nonzero coordinate positive).  An empty
    result certifies nothing beyond the bound.
    """
    from .search import ellipsoid_candidates, precondition

    if not plane.is_exact:
        raise PlaneError("genericity search needs an exact plane; proportionality is undecidable in floating point")
    if height_bound < 1:
        raise PlaneError("height bound must be positive")
    lat = plane.lattice
    pre = precondition(plane.majorant, lat.gram, exact=True)
    cand = ellipsoid_candidates(pre, float(height_bound) ** 2, isotropic=False, workers=workers)
    r2 = Fraction(height_bound) ** 2
    vecs = []
    for row in cand:
        e = _canonical_sign(tuple(int(x) for x in row))
        if e != tuple(int(x) for x in row):
            continue
        if plane.majorant_value(e) <= r2:
            vecs.append(e)
    if not vecs:
        return []
    arr = np.array(vecs, dtype=np.int64)
    qv = np.einsum("ij,jk,ik->i", arr, lat.array, arr)
    y = plane.frame_coords(arr)
    ny = np.sum(y ** 2, axis=1)
    witnesses = []
    for ix in np.flatnonzero(qv == -2):
        # float prefilter: Gram determinant of the two projections
        dots = y @ y[ix]
        gdet = ny[ix] * ny - dots ** 2
        scale = ny[ix] * ny + 1.0
        close = np.flatnonzero(gdet <= 1e-6 * scale)
        x = vecs[ix]
        cx = plane.pairings(x)
        for iv in close:
            v = vecs[iv]
            if not _rank_two(x, v):
                continue
            cv = plane.pairings(v)
            if _rank_two(cx, cv):
                continue
            witnesses.append(GenericityWitness(x, v, height_bound))
            if max_witnesses is not None and len(witnesses) >= max_witnesses:
                return witnesses
    return witnesses


def random_exact_plane(lattice: GramLattice, seed: int, denominator: int = 5, max_numerator: int = 2,
                       retries: int = 100) -> TwistorPlane:
    """Seeded exact plane for lattices whose first p coordinates span a positive block.

    ``b_i = sum_k R_ik e_k + sum_j (A_ij / denominator) e_(p+j)`` with small
    integer ``R`` (k < p) and ``A``; draws are retried until the span is
    positive definite.
    """
    p = lattice.signature[0]
    n = lattice.rank
    axis = [[lattice.gram[i][j] for j in range(p)] for i in range(p)]
    if first_nonpositive_minor(axis) is not None:
        raise PlaneError("first p coordinates do not span a positive block")
    rng = np.random.default_rng(seed)
    for _ in range(retries):
        rmat = rng.integers(-1, 2, size=(p, p)) + np.eye(p, dtype=np.int64) * 2
        if round(abs(np.linalg.det(rmat))) == 0:
            continue
        amat = rng.integers(-max_numerator, max_numerator + 1, size=(p, n - p))
        basis = [[Fraction(int(rmat[i, k])) for k in range(p)] + [Fraction(int(amat[i, j]), denominator) for j in range(n - p)]
                 for i in range(p)]
        try:
            plane = make_plane(lattice, basis)
        except PlaneError:
            continue
        plane.descriptor["seed"] = int(seed)
        return plane
    raise PlaneError("no positive definite draw within the retry budget")


def k3_standard_plane(lattice: GramLattice) -> TwistorPlane:
    """``span(f1 + g1, f2 + g2, f3 + g3)`` in the K3 basis order."""
    basis = [[int(j in (2 * i, 2 * i + 1)) for j in range(lattice.rank)] for i in range(3)]
    return make_plane(lattice, basis)

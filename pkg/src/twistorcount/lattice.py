"""Integral lattices given by symmetric Gram matrices.

Everything here is exact: Python integers and ``fractions.Fraction``.
Vectors are plain tuples of ints in the coordinates of the lattice basis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np

Matrix = tuple[tuple[int, ...], ...]
Vector = tuple[int, ...]

U_GRAM: Matrix = ((0, 1), (1, 0))

# E8 in the root basis: nodes 0-1-2-3-4-5-6 form a chain, node 7 hangs off node 4.
_E8_EDGES = [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (4, 7)]

EXCLUDED_FROM_THEOREM = "excluded from theorem"


class LatticeError(ValueError):
    """Raised when a lattice operation's precondition fails."""


def _as_matrix(rows) -> Matrix:
    m = tuple(tuple(int(x) for x in row) for row in rows)
    if any(len(r) != len(m) for r in m):
        raise LatticeError("Gram matrix must be square")
    return m


def as_vector(v) -> Vector:
    return tuple(int(x) for x in v)


def is_symmetric(m) -> bool:
    n = len(m)
    return all(m[i][j] == m[j][i] for i in range(n) for j in range(i + 1, n))


def determinant(m) -> int:
    """Exact integer determinant (Bareiss fraction-free elimination)."""
    a = [list(map(int, row)) for row in m]
    n = len(a)
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def ldl_pivots(m) -> tuple[list[Fraction], int]:
    """Diagonal pivots of a symmetric congruence diagonalisation.

    Returns ``(pivots, nzero)`` where ``pivots`` are the nonzero diagonal
    entries found and ``nzero`` the dimension of the radical.  Uses symmetric
    pivoting; when every remaining diagonal entry vanishes an off-diagonal
    entry is folded onto the diagonal by ``e_i -> e_i + e_j``.
    """
    if not is_symmetric(m):
        raise LatticeError("matrix is not symmetric")
    a = [[Fraction(x) for x in row] for row in m]
    pivots: list[Fraction] = []
    while a:
        n = len(a)
        k = next((i for i in range(n) if a[i][i] != 0), None)
        if k is None:
            pair = next(((i, j) for i in range(n) for j in range(i + 1, n) if a[i][j] != 0), None)
            if pair is None:
                return pivots, n
            i, j = pair
            # congruence by e_i -> e_i + e_j; new a_ii = 2 a_ij
            for r in range(n):
                a[r][i] += a[r][j]
            for c in range(n):
                a[i][c] += a[j][c]
            k = i
        d = a[k][k]
        pivots.append(d)
        rest = [r for r in range(n) if r != k]
        a = [[a[r][c] - a[r][k] * a[k][c] / d for c in rest] for r in rest]
    return pivots, 0


def inertia(m) -> tuple[int, int, int]:
    """Exact ``(p, z, q)``: numbers of positive, zero and negative eigenvalues."""
    pivots, nzero = ldl_pivots(m)
    p = sum(1 for d in pivots if d > 0)
    return p, nzero, len(pivots) - p


def leading_minors(m) -> list[Fraction]:
    """Leading principal minors computed exactly."""
    return [Fraction(determinant([row[:k] for row in m[:k]])) for k in range(1, len(m) + 1)]


def first_nonpositive_minor(m) -> int | None:
    """Index ``k`` (1-based size) of the first leading minor that is not positive."""
    for k, minor in enumerate(leading_minors(m), start=1):
        if minor <= 0:
            return k
    return None


def is_even_unimodular(gram) -> bool:
    n = len(gram)
    return all(gram[i][i] % 2 == 0 for i in range(n)) and abs(determinant(gram)) == 1


@dataclass(frozen=True)
class GramLattice:
    """An integral lattice given by its symmetric Gram matrix."""

    gram: Matrix
    name: str = ""
    warnings: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "gram", _as_matrix(self.gram))
        if self.rank == 0:
            raise LatticeError("zero rank lattice")
        if not is_symmetric(self.gram):
            raise LatticeError("Gram matrix is not symmetric")

    @property
    def rank(self) -> int:
        return len(self.gram)

    @cached_property
    def signature(self) -> tuple[int, int, int]:
        return inertia(self.gram)

    @cached_property
    def determinant(self) -> int:
        return determinant(self.gram)

    @property
    def parity(self) -> str:
        return "even" if all(self.gram[i][i] % 2 == 0 for i in range(self.rank)) else "odd"

    @property
    def is_even(self) -> bool:
        return self.parity == "even"

    @property
    def is_unimodular(self) -> bool:
        return abs(self.determinant) == 1

    @cached_property
    def array(self) -> np.ndarray:
        """Gram matrix as an int64 array (entries are small)."""
        a = np.array(self.gram, dtype=np.int64)
        a.setflags(write=False)
        return a

    def describe(self) -> dict:
        p, z, q = self.signature
        return {
            "name": self.name,
            "rank": self.rank,
            "signature": [p, z, q],
            "parity": self.parity,
            "determinant": self.determinant,
        }

    def to_text(self) -> str:
        lines = [str(self.rank)]
        lines += [" ".join(str(x) for x in row) for row in self.gram]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, name: str = "") -> GramLattice:
        tokens = text.split()
        if not tokens:
            raise LatticeError("empty matrix file")
        n = int(tokens[0])
        entries = [int(t) for t in tokens[1:]]
        if n <= 0 or len(entries) != n * n:
            raise LatticeError(f"expected {n * n} entries after the size line, got {len(entries)}")
        return cls(tuple(tuple(entries[i * n:(i + 1) * n]) for i in range(n)), name=name)

    @classmethod
    def load(cls, path) -> GramLattice:
        path = Path(path)
        return cls.from_text(path.read_text(), name=path.stem)

    def save(self, path) -> None:
        Path(path).write_text(self.to_text())


def block_diagonal(*blocks) -> Matrix:
    n = sum(len(b) for b in blocks)
    out = [[0] * n for _ in range(n)]
    off = 0
    for b in blocks:
        k = len(b)
        for i in range(k):
            for j in range(k):
                out[off + i][off + j] = int(b[i][j])
        off += k
    return _as_matrix(out)


def e8_gram() -> Matrix:
    g = [[0] * 8 for _ in range(8)]
    for i in range(8):
        g[i][i] = 2
    for i, j in _E8_EDGES:
        g[i][j] = g[j][i] = -1
    g = _as_matrix(g)
    # pins the matrix down to isometry
    assert determinant(g) == 1 and inertia(g) == (8, 0, 0) and is_even_unimodular(g)
    return g


def negated(m) -> Matrix:
    return tuple(tuple(-x for x in row) for row in m)


def build_k3_lattice() -> GramLattice:
    """``U + U + U + (-E8) + (-E8)`` in that basis order.

    Coordinates 0..5 are ``f1, g1, f2, g2, f3, g3`` with ``f_i . g_i = 1``;
    coordinates 6..13 and 14..21 are the two negated E8 root bases.
    """
    minus_e8 = negated(e8_gram())
    lat = GramLattice(block_diagonal(U_GRAM, U_GRAM, U_GRAM, minus_e8, minus_e8), name="K3")
    assert lat.is_even and lat.determinant == -1 and lat.signature == (3, 0, 19)
    return lat


def build_diagonal_lattice(p: int, q: int) -> GramLattice:
    """The odd unimodular lattice ``diag(+1 x p, -1 x q)``.

    ``(2, 2)`` is built but carries the ``EXCLUDED_FROM_THEOREM`` warning.
    """
    if p < 0 or q < 0:
        raise LatticeError("p and q must be non-negative")
    if p + q == 0:
        raise LatticeError("zero rank lattice")
    if p < 1 or q < 1:
        raise LatticeError("need p >= 1 and q >= 1 for an indefinite lattice")
    n = p + q
    gram = tuple(tuple((1 if i < p else -1) if i == j else 0 for j in range(n)) for i in range(n))
    warnings = (EXCLUDED_FROM_THEOREM,) if (p, q) == (2, 2) else ()
    return GramLattice(gram, name=f"I({p},{q})", warnings=warnings)


def _check_dim(lat: GramLattice, *vs) -> None:
    for v in vs:
        if len(v) != lat.rank:
            raise LatticeError(f"vector of length {len(v)} in a rank {lat.rank} lattice")


def bilinear_value(lat: GramLattice, v, w) -> int:
    _check_dim(lat, v, w)
    g = lat.gram
    return sum(int(v[i]) * sum(g[i][j] * int(w[j]) for j in range(lat.rank) if g[i][j]) for i in range(lat.rank) if v[i])


def quadratic_value(lat: GramLattice, v) -> int:
    return bilinear_value(lat, v, v)


def gram_times(lat: GramLattice, v) -> Vector:
    """``gram . v`` as a vector of pairings with the basis."""
    _check_dim(lat, v)
    return tuple(sum(g_ij * int(x) for g_ij, x in zip(row, v)) for row in lat.gram)


def content(v) -> int:
    return math.gcd(*(int(x) for x in v))


def is_primitive(v) -> bool:
    c = content(v)
    if c == 0:
        raise LatticeError("the zero vector has no primitivity")
    return c == 1


def extended_gcd_combination(values: Sequence[int]) -> tuple[int, list[int]]:
    """Return ``(g, coeffs)`` with ``sum(c * v) == g == gcd(values)`` and ``g >= 0``."""
    g, coeffs = 0, [0] * len(values)
    for i, a in enumerate(values):
        a = int(a)
        if a == 0:
            continue
        # g_new = s*g + t*a
        old_r, r = g, a
        old_s, s = 1, 0
        old_t, t = 0, 1
        while r:
            quo = old_r // r
            old_r, r = r, old_r - quo * r
            old_s, s = s, old_s - quo * s
            old_t, t = t, old_t - quo * t
        if old_r < 0:
            old_r, old_s, old_t = -old_r, -old_s, -old_t
        coeffs = [c * old_s for c in coeffs]
        coeffs[i] = old_t
        g = old_r
    return g, coeffs


def dual_pairing_solve(lat: GramLattice, w) -> Vector:
    """An integral ``x`` with ``x . w == 1``."""
    w = as_vector(w)
    _check_dim(lat, w)
    if not any(w) or not is_primitive(w):
        raise LatticeError(f"{w} is not primitive")
    if not lat.is_unimodular:
        raise LatticeError("lattice is not unimodular")
    gw = gram_times(lat, w)
    g, x = extended_gcd_combination(gw)
    assert g == 1, "unimodular lattice with primitive w must give gcd 1"
    x = tuple(x)
    assert bilinear_value(lat, x, w) == 1
    return x


def column_hermite_transform(m) -> tuple[list[list[int]], list[list[int]], int]:
    """Unimodular ``U`` with ``M U = [H | 0]`` (column echelon form).

    Returns ``(MU, U, rank)``; the last ``n - rank`` columns of ``U`` span the
    integer kernel of ``M`` and, ``U`` being unimodular, the span is saturated.
    """
    a = [list(map(int, row)) for row in m]
    k = len(a)
    n = len(a[0]) if k else 0
    u = [[int(i == j) for j in range(n)] for i in range(n)]

    def col_op(j1, j2, p, q, r, s):
        # (c_j1, c_j2) <- (p c_j1 + q c_j2, r c_j1 + s c_j2)
        for mat in (a, u):
            for row in mat:
                x, y = row[j1], row[j2]
                row[j1], row[j2] = p * x + q * y, r * x + s * y

    piv = 0
    for i in range(k):
        if piv >= n:
            break
        for j in range(piv + 1, n):
            if a[i][j] == 0:
                continue
            x, y = a[i][piv], a[i][j]
            g, (s, t) = extended_gcd_combination([x, y])
            # unimodular 2x2: [[s, -y/g], [t, x/g]] has determinant 1
            col_op(piv, j, s, t, -y // g, x // g)
        if a[i][piv] != 0:
            if a[i][piv] < 0:
                col_op(piv, piv, -1, 0, -1, 0)
            piv += 1
    return a, u, piv


def saturated_kernel_basis(m) -> list[Vector]:
    """Rows spanning ``ker(M) ∩ Z^n``, saturated."""
    m = [list(map(int, row)) for row in m]
    if not m:
        raise LatticeError("need at least one row")
    n = len(m[0])
    _, u, rank = column_hermite_transform(m)
    basis = [tuple(u[i][j] for i in range(n)) for j in range(rank, n)]
    for b in basis:
        assert all(sum(r[i] * b[i] for i in range(n)) == 0 for r in m)
    return basis


def sublattice_gram(lat: GramLattice, basis) -> Matrix:
    return tuple(tuple(bilinear_value(lat, b, c) for c in basis) for b in basis)


def standard_vector(n: int, i: int, scale: int = 1) -> Vector:
    return tuple(scale if j == i else 0 for j in range(n))

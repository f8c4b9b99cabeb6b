"""Integral isometries moving primitive isotropic vectors to the standard one.

The lattice must start with two orthogonal hyperbolic planes
``U1 = <f1, g1>`` (coordinates 0, 1) and ``U2 = <f2, g2>`` (coordinates 2, 3),
orthogonal to the remaining coordinates ``M``.

Reduction of a primitive isotropic ``w = a f1 + b g1 + c f2 + d g2 + u``:

1. make ``b != 0`` with coordinate permutations (or one transvection when
   ``w`` lies in ``M``);
2. ``E(f1, t)`` with ``t`` in ``U2 + M`` adds ``b * t`` to the ``U2 + M`` part,
   so that part is reduced modulo ``b`` to entries of size at most ``|b|/2``;
3. if something survives, a permutation (after at most one ``E(f2, t)``
   pulling content out of ``M``) moves a nonzero entry smaller than ``|b|``
   into the ``g1`` slot; repeat.  ``|b|`` halves each round;
4. at the end ``w = +-g1``, finished by a sign change and ``f1 <-> g1``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .lattice import (
    GramLattice,
    LatticeError,
    as_vector,
    bilinear_value,
    dual_pairing_solve,
    extended_gcd_combination,
    gram_times,
    inertia,
    is_even_unimodular,
    is_primitive,
    quadratic_value,
    saturated_kernel_basis,
    sublattice_gram,
)

STEP_BOUND = 64


class ReductionError(RuntimeError):
    """Reduction did not finish within the step bound; carries the partial state."""

    def __init__(self, message, partial_vector=None, partial=None):
        super().__init__(message)
        self.partial_vector = partial_vector
        self.partial = partial


def _identity(n: int) -> np.ndarray:
    m = np.zeros((n, n), dtype=object)
    for i in range(n):
        m[i, i] = 1
    return m


def _gram_obj(lat: GramLattice) -> np.ndarray:
    return np.array([[int(x) for x in row] for row in lat.gram], dtype=object)


@dataclass(frozen=True)
class Isometry:
    """Integer matrix (acting on column vectors) with its generator history."""

    matrix: tuple[tuple[int, ...], ...]
    provenance: tuple[dict, ...] = field(default=())

    @property
    def array(self) -> np.ndarray:
        return np.array(self.matrix, dtype=object)

    def apply(self, v) -> tuple[int, ...]:
        return tuple(int(x) for x in self.array.dot(np.array(as_vector(v), dtype=object)))

    def compose(self, other: Isometry) -> Isometry:
        """``self o other`` (apply ``other`` first)."""
        return Isometry(_freeze(self.array.dot(other.array)), other.provenance + self.provenance)

    def inverse(self, lat: GramLattice) -> Isometry:
        """``G^-1 gamma^T G``; generator history is inverted step by step."""
        g = _gram_obj(lat)
        ginv = _integer_inverse(lat)
        inv = ginv.dot(self.array.T).dot(g)
        prov = tuple(_invert_step(s) for s in reversed(self.provenance))
        return Isometry(_freeze(inv), prov)

    def to_json(self) -> str:
        return json.dumps({"matrix": [list(r) for r in self.matrix], "provenance": list(self.provenance)})

    @classmethod
    def from_json(cls, text: str) -> Isometry:
        d = json.loads(text)
        return cls(tuple(tuple(int(x) for x in r) for r in d["matrix"]), tuple(d.get("provenance", ())))


def _freeze(m) -> tuple[tuple[int, ...], ...]:
    return tuple(tuple(int(x) for x in row) for row in m)


def _integer_inverse(lat: GramLattice) -> np.ndarray:
    if not lat.is_unimodular:
        raise LatticeError("inverse needs a unimodular lattice")
    from .plane import _finv

    inv = _finv(lat.gram)
    assert all(x.denominator == 1 for row in inv for x in row)
    return np.array([[int(x) for x in row] for row in inv], dtype=object)


def _invert_step(step: dict) -> dict:
    if step["type"] == "transvection":
        return {"type": "transvection", "f": step["f"], "a": [-x for x in step["a"]]}
    if step["type"] == "permutation":
        perm = step["perm"]
        inv = [0] * len(perm)
        for i, p in enumerate(perm):
            inv[p] = i
        return {"type": "permutation", "perm": inv}
    return dict(step)  # sign changes are involutions


def verify_isometry(lat: GramLattice, gamma: Isometry | np.ndarray) -> bool:
    m = gamma.array if isinstance(gamma, Isometry) else np.array(gamma, dtype=object)
    if m.shape != (lat.rank, lat.rank):
        return False
    g = _gram_obj(lat)
    return bool(np.all(m.T.dot(g).dot(m) == g))


def transvection_matrix(lat: GramLattice, f, a) -> np.ndarray:
    """Matrix of ``v -> v - (a.v) f + (f.v) a - q(a)/2 (f.v) f``."""
    f, a = as_vector(f), as_vector(a)
    if quadratic_value(lat, f) != 0:
        raise LatticeError(f"f is not isotropic: q(f) = {quadratic_value(lat, f)}")
    fa = bilinear_value(lat, f, a)
    if fa != 0:
        raise LatticeError(f"a is not orthogonal to f: f.a = {fa}")
    qa = quadratic_value(lat, a)
    if qa % 2:
        raise LatticeError(f"q(a) = {qa} is odd; need an even lattice")
    n = lat.rank
    ga = np.array(gram_times(lat, a), dtype=object)
    gf = np.array(gram_times(lat, f), dtype=object)
    fv = np.array(f, dtype=object)
    av = np.array(a, dtype=object)
    m = _identity(n) - np.outer(fv, ga) + np.outer(av, gf) - (qa // 2) * np.outer(fv, gf)
    return m


def eichler_transvection(lat: GramLattice, f, a) -> Isometry:
    m = transvection_matrix(lat, f, a)
    iso = Isometry(_freeze(m), ({"type": "transvection", "f": list(as_vector(f)), "a": list(as_vector(a))},))
    assert verify_isometry(lat, iso)
    assert iso.apply(f) == as_vector(f)
    return iso


def permutation_isometry(lat: GramLattice, perm) -> Isometry:
    """Coordinate permutation ``e_i -> e_perm[i]``; must preserve the Gram matrix."""
    n = lat.rank
    m = np.zeros((n, n), dtype=object)
    for i, p in enumerate(perm):
        m[p, i] = 1
    iso = Isometry(_freeze(m), ({"type": "permutation", "perm": list(perm)},))
    if not verify_isometry(lat, iso):
        raise LatticeError("permutation does not preserve the form")
    return iso


def sign_isometry(lat: GramLattice, coords) -> Isometry:
    n = lat.rank
    m = _identity(n)
    for c in coords:
        m[c, c] = -1
    iso = Isometry(_freeze(m), ({"type": "sign", "coords": list(coords)},))
    if not verify_isometry(lat, iso):
        raise LatticeError("sign change does not preserve the form")
    return iso


def compose_provenance(lat: GramLattice, provenance) -> Isometry:
    """Rebuild an isometry from its generator list (applied in order)."""
    total = Isometry(_freeze(_identity(lat.rank)))
    for step in provenance:
        if step["type"] == "transvection":
            g = eichler_transvection(lat, step["f"], step["a"])
        elif step["type"] == "permutation":
            g = permutation_isometry(lat, step["perm"])
        elif step["type"] == "sign":
            g = sign_isometry(lat, step["coords"])
        else:
            raise ValueError(f"unknown generator {step!r}")
        total = g.compose(total)
    return total


@dataclass(frozen=True)
class SplittingCertificate:
    w: tuple[int, ...]
    x: tuple[int, ...]
    k: int
    x1: tuple[int, ...]
    complement_basis: tuple[tuple[int, ...], ...]
    complement_gram: tuple[tuple[int, ...], ...]

    def to_json(self) -> dict:
        return {
            "w": list(self.w), "x": list(self.x), "k": self.k, "x1": list(self.x1),
            "complement_basis": [list(b) for b in self.complement_basis],
            "complement_gram": [list(r) for r in self.complement_gram],
        }


def _require_primitive_isotropic(lat: GramLattice, w) -> tuple[int, ...]:
    w = as_vector(w)
    if len(w) != lat.rank:
        raise LatticeError("dimension mismatch")
    if not any(w) or not is_primitive(w):
        raise LatticeError(f"{w} is not primitive")
    if quadratic_value(lat, w) != 0:
        raise LatticeError(f"{w} is not isotropic")
    return w


def hyperbolic_splitting(lat: GramLattice, w) -> SplittingCertificate:
    """``L = <w, x1> + W^perp`` with ``<w, x1>`` a hyperbolic plane."""
    if not (lat.is_even and lat.is_unimodular):
        raise LatticeError("hyperbolic splitting needs an even unimodular lattice")
    w = _require_primitive_isotropic(lat, w)
    x = dual_pairing_solve(lat, w)
    qx = quadratic_value(lat, x)
    k = qx // 2
    x1 = tuple(xi - k * wi for xi, wi in zip(x, w))
    rows = [gram_times(lat, w), gram_times(lat, x1)]
    basis = tuple(saturated_kernel_basis(rows))
    cgram = sublattice_gram(lat, basis)
    assert quadratic_value(lat, x1) == 0 and bilinear_value(lat, w, x1) == 1
    assert all(bilinear_value(lat, b, w) == 0 and bilinear_value(lat, b, x1) == 0 for b in basis)
    assert len(basis) == lat.rank - 2
    assert is_even_unimodular(cgram)
    return SplittingCertificate(w, x, k, x1, basis, cgram)


def _check_two_planes(lat: GramLattice) -> None:
    g = lat.gram
    if lat.rank < 4:
        raise LatticeError("need two hyperbolic planes in coordinates 0..3")
    u = ((0, 1, 0, 0), (1, 0, 0, 0), (0, 0, 0, 1), (0, 0, 1, 0))
    if any(g[i][j] != u[i][j] for i in range(4) for j in range(4)):
        raise LatticeError("coordinates 0..3 are not U + U")
    if any(g[i][j] for i in range(4) for j in range(4, lat.rank)):
        raise LatticeError("U + U block is not orthogonal to the rest")
    if not lat.is_even:
        raise LatticeError("transvections need an even lattice")


def _nearest_quotient(x: int, b: int) -> int:
    return round(Fraction(x, b))


class _Reducer:
    def __init__(self, lat: GramLattice, w, step_bound: int):
        self.lat = lat
        self.n = lat.rank
        self.w = list(w)
        self.gamma = Isometry(_freeze(_identity(self.n)))
        self.step_bound = step_bound

    def apply(self, iso: Isometry):
        if len(self.gamma.provenance) >= self.step_bound:
            raise ReductionError(
                f"no reduction within {self.step_bound} generator applications",
                partial_vector=tuple(self.w), partial=self.gamma,
            )
        self.w = list(iso.apply(self.w))
        self.gamma = iso.compose(self.gamma)

    def unit(self, i: int, scale: int = 1) -> tuple[int, ...]:
        return tuple(scale if j == i else 0 for j in range(self.n))

    def swap(self, *pairs):
        perm = list(range(self.n))
        for i, j in pairs:
            perm[i], perm[j] = perm[j], perm[i]
        self.apply(permutation_isometry(self.lat, perm))

    def pull_from_m(self, f_index: int, sign: int):
        """``E(e_f, t)`` with ``t`` in M chosen so ``t.u = -sign * gcd``; adds ``sign*gcd`` at ``e_f``."""
        gu = gram_times(self.lat, [0, 0, 0, 0] + self.w[4:])
        c, coeffs = extended_gcd_combination(gu[4:])
        t = tuple([0, 0, 0, 0] + [-sign * x for x in coeffs])
        self.apply(eichler_transvection(self.lat, self.unit(f_index), t))
        return c

    def run(self) -> Isometry:
        w = self.w
        if w[0] == 0 and w[1] == 0:
            if w[2] or w[3]:
                self.swap((0, 2), (1, 3))
            else:
                self.pull_from_m(0, 1)  # puts gcd(u) at f1
        if self.w[1] == 0:
            self.swap((0, 1))
        while True:
            b = self.w[1]
            t = [0, 0] + [-_nearest_quotient(x, b) for x in self.w[2:]]
            if any(t):
                self.apply(eichler_transvection(self.lat, self.unit(0), t))
            rest = self.w[2:]
            if not any(rest):
                break
            if self.w[3]:
                self.swap((0, 2), (1, 3))
            elif self.w[2]:
                self.swap((0, 3), (1, 2))
            else:
                self.pull_from_m(2, 1)
                if abs(self.w[2]) >= abs(b):
                    raise ReductionError("M part not reducible (M is not unimodular?)",
                                         partial_vector=tuple(self.w), partial=self.gamma)
                self.swap((0, 3), (1, 2))
        # w = a f1 + b g1 with b = +-1 and a = 0
        assert self.w[0] == 0 and abs(self.w[1]) == 1, self.w
        if self.w[1] == -1:
            self.apply(sign_isometry(self.lat, (0, 1)))
        self.swap((0, 1))
        return self.gamma


def reduce_to_standard(lat: GramLattice, w, step_bound: int = STEP_BOUND) -> Isometry:
    """An isometry ``gamma`` with ``gamma w = f1`` built from transvections and permutations."""
    _check_two_planes(lat)
    w = _require_primitive_isotropic(lat, w)
    gamma = _Reducer(lat, w, step_bound).run()
    assert gamma.apply(w) == tuple(int(i == 0) for i in range(lat.rank))
    assert verify_isometry(lat, gamma)
    return gamma


def map_between(lat: GramLattice, v, w) -> Isometry:
    """An isometry sending ``v`` to ``w`` (both primitive isotropic)."""
    gv = reduce_to_standard(lat, v)
    gw = reduce_to_standard(lat, w)
    gamma = gw.inverse(lat).compose(gv)
    assert gamma.apply(v) == as_vector(w)
    assert verify_isometry(lat, gamma)
    return gamma


def determinant_sign(gamma: Isometry) -> int:
    from .lattice import determinant

    return determinant(gamma.matrix)


def complement_inertia(cert: SplittingCertificate) -> tuple[int, int, int]:
    return inertia(cert.complement_gram)

"""Real spherical harmonics, Weyl sums and the Funk transform on S^2.

Harmonics are normalised against the unit-mass measure on the sphere, so
``Y_00 = 1`` and ``mean(Y_lm^2) = 1``.  They are evaluated as polynomials in
Cartesian coordinates, which makes ``Y(-u) == (-1)^l Y(u)`` hold bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

UNIT_TOL = 1e-9


class SphereError(ValueError):
    pass


def _as_points(u) -> np.ndarray:
    pts = np.atleast_2d(np.asarray(u, dtype=float))
    if pts.shape[1] != 3:
        raise SphereError("points must be 3-vectors")
    return pts


def _legendre_derivative(l: int, m: int, z: np.ndarray) -> np.ndarray:
    """``d^m P_l / dz^m`` via the three-term recurrence in l."""
    prev = np.full_like(z, float(math.prod(range(1, 2 * m, 2))))  # (2m-1)!!
    if l == m:
        return prev
    cur = (2 * m + 1) * z * prev
    for k in range(m + 2, l + 1):
        prev, cur = cur, ((2 * k - 1) * z * cur - (k + m - 1) * prev) / (k - m)
    return cur


def real_spherical_harmonic(l: int, m: int, u) -> np.ndarray | float:
    """Real harmonic ``Y_lm`` at unit vector(s) ``u`` (unit-mass normalisation)."""
    if l < 0 or abs(m) > l:
        raise SphereError(f"need |m| <= l, got l={l}, m={m}")
    pts = _as_points(u)
    if np.any(np.abs(np.sum(pts ** 2, axis=1) - 1) > UNIT_TOL):
        raise SphereError("points must be unit vectors")
    x, y, z = pts[:, 0], pts[:, 1], pts[:, 2]
    am = abs(m)
    norm = math.sqrt((2 * l + 1) * math.factorial(l - am) / math.factorial(l + am))
    radial = _legendre_derivative(l, am, z)
    if am == 0:
        val = norm * radial
    else:
        re = np.ones_like(x)
        im = np.zeros_like(x)
        for _ in range(am):
            re, im = re * x - im * y, re * y + im * x
        val = math.sqrt(2) * norm * radial * (re if m > 0 else im)
    return float(val[0]) if np.ndim(u) == 1 else val


def harmonic_indices(l_max: int, l_min: int = 1) -> list[tuple[int, int]]:
    return [(l, m) for l in range(l_min, l_max + 1) for m in range(-l, l + 1)]


@dataclass(frozen=True)
class WeightFunction:
    """A finite real harmonic expansion ``sum c * Y_lm`` on S^2.

    With the unit-mass normalisation the integral of the weight against the
    normalised area measure is the ``(0, 0)`` coefficient.
    """

    coefficients: tuple[tuple[int, int, float], ...]

    def __post_init__(self):
        coeffs = tuple((int(l), int(m), float(c)) for l, m, c in self.coefficients)
        for l, m, _ in coeffs:
            if l < 0 or abs(m) > l:
                raise SphereError(f"invalid harmonic index ({l}, {m})")
        object.__setattr__(self, "coefficients", coeffs)

    @classmethod
    def constant(cls, c: float = 1.0) -> WeightFunction:
        return cls(((0, 0, c),))

    @classmethod
    def harmonic(cls, l: int, m: int, c: float = 1.0) -> WeightFunction:
        return cls(((l, m, c),))

    def __add__(self, other: WeightFunction) -> WeightFunction:
        return WeightFunction(self.coefficients + other.coefficients)

    def scaled(self, a: float) -> WeightFunction:
        return WeightFunction(tuple((l, m, a * c) for l, m, c in self.coefficients))

    def __call__(self, u) -> np.ndarray | float:
        pts = _as_points(u)
        out = np.zeros(len(pts))
        for l, m, c in self.coefficients:
            out = out + c * real_spherical_harmonic(l, m, pts)
        return float(out[0]) if np.ndim(u) == 1 else out

    @property
    def integral(self) -> float:
        """Mean of the weight over the sphere (unit total measure)."""
        return math.fsum(c for l, _, c in self.coefficients if l == 0)

    def funk(self) -> WeightFunction:
        """Exact Funk transform: each degree is scaled by its eigenvalue."""
        return WeightFunction(tuple((l, m, c * funk_scalar(l)) for l, m, c in self.coefficients))


def funk_eigenvalue(n: int) -> Fraction:
    """Eigenvalue on degree-2n harmonics: ``(-1)^n (1*3*...*(2n-1)) / (2*4*...*(2n))``."""
    if n < 0:
        raise SphereError("n must be non-negative")
    val = Fraction(1)
    for i in range(1, n + 1):
        val *= Fraction(2 * i - 1, 2 * i)
    return -val if n % 2 else val


def funk_scalar(degree: int) -> float:
    """Eigenvalue on harmonics of the given degree (zero on odd degrees)."""
    return 0.0 if degree % 2 else float(funk_eigenvalue(degree // 2))


def _equator_frame(u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    u = u / np.linalg.norm(u)
    helper = np.array([1.0, 0.0, 0.0]) if abs(u[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    a = np.cross(u, helper)
    a /= np.linalg.norm(a)
    b = np.cross(u, a)
    return a, b


def equator_points(u, quad_points: int) -> np.ndarray:
    a, b = _equator_frame(np.asarray(u, dtype=float))
    t = 2 * np.pi * np.arange(quad_points) / quad_points
    pts = np.cos(t)[:, None] * a + np.sin(t)[:, None] * b
    return pts / np.linalg.norm(pts, axis=1)[:, None]


def funk_transform_numeric(f, u, quad_points: int = 256) -> float:
    """Average of ``f`` over the great circle with pole ``u`` (trapezoidal rule)."""
    if quad_points < 8:
        raise SphereError("need at least 8 quadrature points")
    vals = f(equator_points(u, quad_points))
    return math.fsum(vals) / quad_points


def weyl_sums(points, l_max: int) -> list[tuple[int, int, float]]:
    """``(l, m, |S_lm| / N)`` for ``1 <= l <= l_max``, with ``S_lm = sum_u Y_lm(u)``."""
    pts = _as_points(points)
    if len(pts) == 0:
        raise SphereError("empty direction set")
    out = []
    for l, m in harmonic_indices(l_max):
        s = math.fsum(real_spherical_harmonic(l, m, pts))
        out.append((l, m, abs(s) / len(pts)))
    return out


def is_antipodally_closed(points, tol: float = 1e-12) -> bool:
    pts = _as_points(points)
    keys = {tuple(np.round(p / tol).astype(np.int64)) for p in pts}
    return all(tuple(np.round(-p / tol).astype(np.int64)) in keys for p in pts)


def equator_pole_consistency(points, f: WeightFunction, quad_points: int = 256) -> tuple[float, float]:
    """Pole side ``sum (Funk f)(u)`` (via eigenvalues) against the equator side
    ``sum_u mean_{equator(u)} f`` (via quadrature)."""
    pts = _as_points(points)
    if not is_antipodally_closed(pts, tol=1e-9):
        raise SphereError("direction set is not closed under antipodes")
    pole_side = math.fsum(f.funk()(pts))
    equator_side = math.fsum(funk_transform_numeric(f, p, quad_points) for p in pts)
    return pole_side, equator_side


def fibonacci_sphere(n: int) -> np.ndarray:
    """Quasi-uniform points (golden-angle spiral)."""
    i = np.arange(n) + 0.5
    z = 1 - 2 * i / n
    r = np.sqrt(1 - z ** 2)
    phi = np.pi * (3 - math.sqrt(5)) * i
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)


def mollweide_dump(points, volumes: Sequence[float] | None = None) -> list[tuple[float, float, float]]:
    """``(longitude, latitude, V)`` in degrees for external plotting."""
    pts = _as_points(points)
    lon = np.degrees(np.arctan2(pts[:, 1], pts[:, 0]))
    lat = np.degrees(np.arcsin(np.clip(pts[:, 2], -1, 1)))
    vols = np.zeros(len(pts)) if volumes is None else np.asarray(volumes, dtype=float)
    return list(zip(lon.tolist(), lat.tolist(), vols.tolist()))


def weyl_table_csv(rows: Iterable[tuple[float, list[tuple[int, int, float]]]]) -> str:
    lines = ["V,l,m,weyl_sum"]
    for V, table in rows:
        lines += [f"{V!r},{l},{m},{s!r}" for l, m, s in table]
    return "\n".join(lines) + "\n"

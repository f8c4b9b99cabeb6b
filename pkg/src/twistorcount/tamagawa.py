"""The transcendental family of the leading constant.

``C = Vol Y / (20 Vol X)`` is known only up to a rational factor; what can
be computed is the zeta/pi family ``(pi^20 zeta(11))^-1`` and the p-adic
local volumes ``p^-dim * #O(F_p)`` whose products carry the zeta values.

Local volumes are ratios of group orders, so the rank-22 and rank-20
products are compared prime by prime: ``vol_22(p) / vol_20(p) =
(1 - p^-11)(1 - p^-20) / (1 - p^-10)``, which converges like ``p^-10``.
The prime 2 is left out (folded into the undetermined rational factor).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .lattice import determinant


class ConstantError(ValueError):
    pass


PLUS, MINUS = "plus", "minus"


def zeta(s: int, tol: float = 1e-12) -> tuple[float, float]:
    """``(value, half_width)`` for ``zeta(s)``.

    Partial sum to K terms plus the midpoint of the integral tail bracket
    ``[(K+1)^(1-s)/(s-1), K^(1-s)/(s-1)]``; the half-width covers the
    bracket and the floating-point rounding of the partial sum.
    """
    if s < 2:
        raise ConstantError("zeta(s) needs s >= 2")
    if tol < 1e-14:
        raise ConstantError("tolerances below 1e-14 are beyond double precision")
    k = max(1, math.ceil((tol / 2) ** (-1.0 / s)))
    while True:
        lo = (k + 1) ** (1 - s) / (s - 1)
        hi = k ** (1 - s) / (s - 1)
        if (hi - lo) / 2 <= tol / 2:
            break
        k *= 2
    terms = np.arange(1, k + 1, dtype=float) ** (-float(s))
    partial = math.fsum(terms)
    rounding = 4 * np.finfo(float).eps * partial
    return partial + (lo + hi) / 2, (hi - lo) / 2 + rounding


def primes_up_to(n: int) -> list[int]:
    if n < 2:
        return []
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for i in range(2, math.isqrt(n) + 1):
        if sieve[i]:
            sieve[i * i::i] = False
    return [int(p) for p in np.flatnonzero(sieve)]


def _is_odd_prime(p: int) -> bool:
    return p > 2 and all(p % d for d in range(2, math.isqrt(p) + 1))


def orthogonal_group_order(l: int, kind: str, p: int) -> int:
    """``#O^(+-)_(2l)(F_p) = 2 p^(l(l-1)) (p^l -+ 1) prod_{i<l} (p^(2i) - 1)``.

    ``plus`` is the split form (maximal Witt index), ``minus`` the non-split one.
    """
    if l < 1:
        raise ConstantError("l must be positive")
    if not _is_odd_prime(p):
        raise ConstantError(f"{p} is not an odd prime")
    if kind not in (PLUS, MINUS):
        raise ConstantError(f"kind must be {PLUS!r} or {MINUS!r}")
    sign = -1 if kind == PLUS else 1
    order = 2 * p ** (l * (l - 1)) * (p ** l + sign)
    for i in range(1, l):
        order *= p ** (2 * i) - 1
    return order


def odd_orthogonal_group_order(l: int, p: int) -> int:
    """``#O_(2l+1)(F_p) = 2 p^(l^2) prod_{i<=l} (p^(2i) - 1)``."""
    if not _is_odd_prime(p):
        raise ConstantError(f"{p} is not an odd prime")
    order = 2 * p ** (l * l)
    for i in range(1, l + 1):
        order *= p ** (2 * i) - 1
    return order


def legendre(a: int, p: int) -> int:
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


def form_type(gram, p: int) -> str:
    """Split (``plus``) iff ``(-1)^l det`` is a square mod p, for rank ``2l``."""
    n = len(gram)
    if n % 2:
        raise ConstantError("type is defined for even rank only")
    det = determinant(gram)
    if det % p == 0:
        raise ConstantError(f"form is degenerate mod {p}")
    return PLUS if legendre((-1) ** (n // 2) * det, p) == 1 else MINUS


def group_order(gram, p: int) -> int:
    n = len(gram)
    if determinant(gram) % p == 0:
        raise ConstantError(f"form is degenerate mod {p}")
    if n % 2:
        return odd_orthogonal_group_order(n // 2, p)
    return orthogonal_group_order(n // 2, form_type(gram, p), p)


def local_volume(gram, p: int) -> Fraction:
    """``p^-dim O * #O(F_p)`` with ``dim O = n(n-1)/2``."""
    if p == 2:
        raise ConstantError("p = 2 is folded into the rational factor")
    n = len(gram)
    return Fraction(group_order(gram, p), p ** (n * (n - 1) // 2))


# independent finite-field oracles --------------------------------------------

def count_isometries_exhaustive(gram, p: int) -> int:
    """Scan every ``n x n`` matrix over ``F_p`` (only sensible for n = 2)."""
    b = np.array(gram, dtype=np.int64) % p
    n = len(b)
    count = 0
    for entries in itertools.product(range(p), repeat=n * n):
        m = np.array(entries, dtype=np.int64).reshape(n, n)
        if np.array_equal((m.T @ b @ m) % p, b):
            count += 1
    return count


def count_isometries_backtracking(gram, p: int) -> int:
    """Choose images of basis vectors one at a time, pruning on pairings."""
    b = np.array(gram, dtype=np.int64) % p
    n = len(b)
    vecs = np.array(list(itertools.product(range(p), repeat=n)), dtype=np.int64)
    bv = (vecs @ b) % p  # rows: B v
    norms = np.einsum("ij,ij->i", bv, vecs) % p

    def extend(chosen: list[int]) -> int:
        j = len(chosen)
        if j == n:
            return 1
        ok = norms == b[j, j]
        for i, c in enumerate(chosen):
            ok &= (vecs @ bv[c]) % p == b[i, j]
        return sum(extend(chosen + [int(k)]) for k in np.flatnonzero(ok))

    return extend([])


# products and report -----------------------------------------------------------

def _ratio_factor(p: int) -> float:
    return (1 - p ** -11.0) * (1 - p ** -20.0) / (1 - p ** -10.0)


def truncated_ratio_product(cutoff: int) -> tuple[float, float]:
    """``prod_{2 < p <= cutoff} vol_22(p) / vol_20(p)`` and a tail bound.

    Each factor exceeds 1, so the product increases with the cutoff; the
    remaining relative tail is below ``2 cutoff^-9 / 9``; the returned bound
    adds the floating-point rounding of the product.
    """
    logs = [math.log(_ratio_factor(p)) for p in primes_up_to(cutoff) if p > 2]
    rounding = 4 * np.finfo(float).eps * (len(logs) + 1)
    return math.exp(math.fsum(logs)), 2.0 * cutoff ** -9.0 / 9.0 + rounding


def truncated_single_product(gram, cutoff: int) -> tuple[float, float]:
    """``prod_{2 < p <= cutoff} vol(p) / 2`` for one form, with a relative tail bound.

    The leading defect of each factor is ``p^-2``, so the tail is only
    ``O(1 / cutoff)``: usable as a sanity value, not as a precise one.
    """
    logs = [math.log(float(local_volume(gram, p)) / 2) for p in primes_up_to(cutoff) if p > 2]
    return math.exp(math.fsum(logs)), 2.0 / cutoff


def family_value() -> float:
    """``(pi^20 zeta(11))^-1``."""
    z11, _ = zeta(11)
    return 1.0 / (math.pi ** 20 * z11)


@dataclass
class ConstantReport:
    zeta_values: dict[int, tuple[float, float]]
    local_volumes: dict[int, Fraction]
    truncated_product: float
    truncation_bound: float
    family_value: float
    fitted_constant: float
    fitted_ratio: float
    fitted_ratio_stderr: float | None = None
    prime_cutoff: int = 1000
    warnings: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "zeta_values": {str(k): {"value": v, "error_bound": e} for k, (v, e) in self.zeta_values.items()},
            "local_volumes": {str(p): str(v) for p, v in self.local_volumes.items()},
            "truncated_product": self.truncated_product,
            "truncation_bound": self.truncation_bound,
            "truncated_product_direction": "increasing in the prime cutoff",
            "family_value": self.family_value,
            "fitted_constant": self.fitted_constant,
            "fitted_ratio": self.fitted_ratio,
            "fitted_ratio_stderr": self.fitted_ratio_stderr,
            "fitted_ratio_note": "empirical candidate for the undetermined rational factor; not asserted",
            "prime_cutoff": self.prime_cutoff,
            "warnings": self.warnings,
        }


def constant_report(fitted_C: float, prime_cutoff: int = 1000, relative_stderr: float | None = None,
                    gram=None, local_volume_primes: int = 50) -> ConstantReport:
    """Assemble the constant family around an empirical ``C``.

    ``relative_stderr`` (of the fitted constant) is carried over to the ratio.
    """
    from .lattice import build_k3_lattice

    gram = build_k3_lattice().gram if gram is None else gram
    zetas = {s: zeta(s) for s in sorted({2, 4, 6, 10, 11, 20})}
    fam = 1.0 / (math.pi ** 20 * zetas[11][0])
    prod, bound = truncated_ratio_product(prime_cutoff)
    locs = {p: local_volume(gram, p) for p in primes_up_to(local_volume_primes) if p > 2}
    ratio = fitted_C / fam
    warnings = []
    if fitted_C == 0:
        warnings.append("degenerate data: fitted constant is zero")
    stderr = None if relative_stderr is None else abs(ratio) * relative_stderr
    return ConstantReport(zetas, locs, prod, bound, fam, fitted_C, ratio, stderr, prime_cutoff, warnings)

"""Driver for ellipsoid enumeration under a positive-definite majorant.

The majorant is LLL-preconditioned, factored, and the compiled kernel is run
over independent top-level subtrees.  Subtree results are concatenated in a
fixed order and sorted, so the output does not depend on the worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import _kernel
from .lll import lll_reduce_gram

# Additive slack used for float pruning.  Exact membership is always decided
# afterwards, so this only has to dominate the rounding of the factorisation.
PRUNE_TOL = 1e-7


def exact_ldl(m) -> tuple[list[Fraction], list[list[Fraction]]]:
    """``m = L D L^T`` over the rationals; returns ``(d, L)``. ``m`` must be positive definite."""
    n = len(m)
    a = [[Fraction(x) for x in row] for row in m]
    lo = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    d: list[Fraction] = []
    for j in range(n):
        dj = a[j][j] - sum(lo[j][k] ** 2 * d[k] for k in range(j))
        if dj <= 0:
            raise ValueError(f"form is not positive definite (pivot {j} = {dj})")
        d.append(dj)
        for i in range(j + 1, n):
            lo[i][j] = (a[i][j] - sum(lo[i][k] * lo[j][k] * d[k] for k in range(j))) / dj
    return d, lo


@dataclass(frozen=True)
class Preconditioned:
    """A majorant in an LLL-reduced basis, ready for the kernel."""

    transform: np.ndarray  # columns: reduced basis in lattice coordinates
    d: np.ndarray
    mu: np.ndarray
    gq: np.ndarray  # indefinite form in the reduced basis (int64)


def precondition(majorant, gram, exact: bool) -> Preconditioned:
    """LLL-reduce ``majorant`` and factor it.

    With ``exact`` the reduced majorant is factored in rationals and the
    pivots and multipliers are rounded to floats only at the end.
    """
    gram = np.asarray(gram, dtype=np.int64)
    mf = np.array([[float(x) for x in row] for row in majorant])
    t, _ = lll_reduce_gram(mf)
    n = t.shape[0]
    if exact:
        tl = [[int(x) for x in row] for row in t]
        mq = [[Fraction(x) for x in row] for row in majorant]
        # reduced = T^T M T
        mt = [[sum(mq[i][k] * tl[k][j] for k in range(n) if tl[k][j]) for j in range(n)] for i in range(n)]
        red = [[sum(tl[k][i] * mt[k][j] for k in range(n) if tl[k][i]) for j in range(n)] for i in range(n)]
        dd, lo = exact_ldl(red)
        d = np.array([float(x) for x in dd])
        mu = np.zeros((n, n))
        for i in range(n):
            for j in range(i + 1, n):
                mu[i, j] = float(lo[j][i])
    else:
        red = t.T.astype(float) @ mf @ t.astype(float)
        red = (red + red.T) / 2
        r = np.linalg.cholesky(red).T
        d = np.diag(r) ** 2
        mu = r / np.diag(r)[:, None]
        mu = np.triu(mu, 1)
    gq = t.T @ gram @ t
    return Preconditioned(transform=t, d=d, mu=mu, gq=np.ascontiguousarray(gq, dtype=np.int64))


def _prefixes(pre: Preconditioned, limit: float, depth: int, bottom: int) -> list[np.ndarray]:
    """Valid value prefixes for the top ``depth`` levels, in canonical order."""
    n = len(pre.d)
    depth = max(0, min(depth, n - 1 - bottom))
    out: list[list[int]] = []

    def rec(prefix: list[int], part: float):
        if len(prefix) == depth:
            out.append(list(prefix))
            return
        k = n - 1 - len(prefix)
        y = np.zeros(n)
        for t, v in enumerate(prefix):
            y[n - 1 - t] = v
        c = float(pre.mu[k, k + 1:] @ y[k + 1:]) if k + 1 < n else 0.0
        rem = limit - part
        if rem < 0:
            return
        s = math.sqrt(rem / pre.d[k])
        lo = math.ceil(-c - s - PRUNE_TOL)
        hi = math.floor(-c + s + PRUNE_TOL)
        for v in range(lo, hi + 1):
            rec(prefix + [v], part + pre.d[k] * (v + c) ** 2)

    rec([], 0.0)
    return [np.array(p, dtype=np.int64) for p in out]


def ellipsoid_candidates(
    pre: Preconditioned,
    radius2: float,
    isotropic: bool,
    workers: int = 1,
    split_depth: int = 2,
) -> np.ndarray:
    """Lattice vectors (rows, lattice coordinates) with majorant value about ``<= radius2``.

    The result is a superset of the exact ball (float pruning with slack),
    sorted lexicographically.  In isotropic mode every row satisfies
    ``q(e) = 0`` exactly.
    """
    n = len(pre.d)
    limit = float(radius2) * (1 + 1e-12) + PRUNE_TOL
    bottom = 1 if isotropic else 0
    tasks = _prefixes(pre, limit, split_depth, bottom)

    def run(prefix):
        return _kernel.search(pre.d, pre.mu, pre.gq, limit, PRUNE_TOL, prefix, isotropic)

    if workers > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, tasks))
    else:
        parts = [run(p) for p in tasks]
    parts = [p for p in parts if len(p)]
    if not parts:
        return np.zeros((0, n), dtype=np.int64)
    ys = np.concatenate(parts)
    es = ys @ pre.transform.T
    return sort_rows(es)


def sort_rows(a: np.ndarray) -> np.ndarray:
    """Rows in lexicographic order of coordinates."""
    if len(a) == 0:
        return a
    order = np.lexsort(a.T[::-1])
    return a[order]

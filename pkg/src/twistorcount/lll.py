"""LLL reduction of a positive-definite Gram matrix.

Only used to precondition enumeration, so plain floating point is enough:
the transform is an integer unimodular matrix whatever rounding happens,
and exactness is recovered downstream.
"""

from __future__ import annotations

import numpy as np


def lll_reduce_gram(gram, delta: float = 0.99, max_swaps: int = 100_000):
    """Return ``(T, reduced)`` with ``reduced = T.T @ gram @ T`` LLL-reduced.

    ``T`` is an int64 unimodular matrix whose columns are the new basis
    vectors written in the old coordinates.
    """
    q0 = np.array(gram, dtype=float)
    n = q0.shape[0]
    t = np.eye(n, dtype=np.int64)
    if n < 2:
        return t, q0.copy()
    q = q0.copy()
    k, swaps = 1, 0
    while k < n:
        for j in range(k - 1, -1, -1):
            r = np.linalg.cholesky(q[: k + 1, : k + 1]).T
            m = int(np.rint(r[j, k] / r[j, j]))
            if m:
                t[:, k] -= m * t[:, j]
                q = t.T @ q0 @ t
        r = np.linalg.cholesky(q[: k + 1, : k + 1]).T
        if r[k, k] ** 2 + r[k - 1, k] ** 2 >= delta * r[k - 1, k - 1] ** 2:
            k += 1
        else:
            t[:, [k - 1, k]] = t[:, [k, k - 1]]
            q = t.T @ q0 @ t
            k = max(k - 1, 1)
            swaps += 1
            if swaps > max_swaps:
                raise RuntimeError("LLL did not converge")
    return t, q

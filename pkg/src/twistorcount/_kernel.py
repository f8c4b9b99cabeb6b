"""Compiled depth-first ellipsoid enumeration.

The positive-definite form is given in LDL shape

    Q(y) = sum_i d[i] * (y[i] + sum_{j>i} mu[i, j] * y[j]) ** 2

and levels are fixed from ``n - 1`` down to ``0``.  In isotropic mode the
bottom level is not scanned: ``q(y) = 0`` is solved for ``y[0]`` over the
integers using the integral indefinite form ``gq``.

Pruning is done in floating point with an additive slack ``tol``; callers
decide membership exactly on the returned candidates.
"""

import math

import numpy as np
from numba import njit


@njit(cache=True)
def _isqrt(v):
    r = np.int64(math.sqrt(float(v)))
    while r * r > v:
        r -= 1
    while (r + 1) * (r + 1) <= v:
        r += 1
    return r


@njit(cache=True)
def _push(buf, count, y):
    if count == buf.shape[0]:
        bigger = np.empty((2 * buf.shape[0], buf.shape[1]), dtype=np.int64)
        bigger[:count] = buf[:count]
        buf = bigger
    buf[count, :] = y
    return buf, count + 1


@njit(cache=True)
def _center(mu, y, k, n):
    c = 0.0
    for j in range(k + 1, n):
        c += mu[k, j] * y[j]
    return c


@njit(cache=True)
def _qrow(gq, y, k, n):
    s = 0
    for j in range(k + 1, n):
        s += gq[k, j] * y[j]
    return s


@njit(cache=True, nogil=True)
def search(d, mu, gq, radius2, tol, prefix, isotropic):
    """Enumerate integer ``y`` with ``Q(y) <= radius2`` (up to ``tol``).

    ``prefix`` fixes ``y[n-1], y[n-2], ...`` in that order.  Returns an int64
    array of candidate rows; the zero vector is never returned.
    """
    n = d.shape[0]
    y = np.zeros(n, dtype=np.int64)
    part = np.zeros(n + 1)
    qpart = np.zeros(n + 1, dtype=np.int64)
    hi = np.zeros(n, dtype=np.int64)
    buf = np.empty((64, n), dtype=np.int64)
    count = 0
    limit = radius2 + tol

    npre = prefix.shape[0]
    for t in range(npre):
        k = n - 1 - t
        c = _center(mu, y, k, n)
        y[k] = prefix[t]
        part[k] = part[k + 1] + d[k] * (y[k] + c) ** 2
        if part[k] > limit:
            return buf[:0]
        qpart[k] = qpart[k + 1] + gq[k, k] * y[k] * y[k] + 2 * y[k] * _qrow(gq, y, k, n)

    top = n - 1 - npre
    bottom = 1 if isotropic else 0

    if top < bottom:
        # everything above the bottom is fixed by the prefix
        if isotropic and top == 0:
            buf, count = _last_layer(d, mu, gq, y, part, qpart, limit, tol, buf, count)
        elif not isotropic and top < 0:
            nz = False
            for j in range(n):
                if y[j] != 0:
                    nz = True
            if nz:
                buf, count = _push(buf, count, y)
        return buf[:count]

    k = top
    c = _center(mu, y, k, n)
    rem = limit - part[k + 1]
    if rem < 0:
        return buf[:0]
    s = math.sqrt(rem / d[k])
    y[k] = np.int64(math.ceil(-c - s - tol)) - 1
    hi[k] = np.int64(math.floor(-c + s + tol))
    while True:
        y[k] += 1
        if y[k] > hi[k]:
            k += 1
            if k > top:
                break
            continue
        c = _center(mu, y, k, n)
        part[k] = part[k + 1] + d[k] * (y[k] + c) ** 2
        if part[k] > limit:
            continue
        qpart[k] = qpart[k + 1] + gq[k, k] * y[k] * y[k] + 2 * y[k] * _qrow(gq, y, k, n)
        if k == bottom:
            if isotropic:
                buf, count = _last_layer(d, mu, gq, y, part, qpart, limit, tol, buf, count)
            else:
                nz = False
                for j in range(n):
                    if y[j] != 0:
                        nz = True
                        break
                if nz:
                    buf, count = _push(buf, count, y)
        else:
            k -= 1
            c = _center(mu, y, k, n)
            rem = limit - part[k + 1]
            s = math.sqrt(rem / d[k]) if rem > 0 else 0.0
            y[k] = np.int64(math.ceil(-c - s - tol)) - 1
            hi[k] = np.int64(math.floor(-c + s + tol))
    return buf[:count]


@njit(cache=True)
def _last_layer(d, mu, gq, y, part, qpart, limit, tol, buf, count):
    n = d.shape[0]
    c0 = _center(mu, y, 0, n)
    rem = limit - part[1]
    if rem < 0:
        return buf, count
    s = math.sqrt(rem / d[0])
    lo = np.int64(math.ceil(-c0 - s - tol))
    hi = np.int64(math.floor(-c0 + s + tol))
    a = gq[0, 0]
    b = _qrow(gq, y, 0, n)
    c = qpart[1]
    # q(y) = a*y0^2 + 2*b*y0 + c
    rest_zero = True
    for j in range(1, n):
        if y[j] != 0:
            rest_zero = False
            break
    if a != 0:
        disc = b * b - a * c
        if disc < 0:
            return buf, count
        r = _isqrt(disc)
        if r * r != disc:
            return buf, count
        for sgn in (1, -1):
            if sgn == -1 and r == 0:
                break
            num = -b + sgn * r
            if num % a != 0:
                continue
            y0 = num // a
            if y0 < lo or y0 > hi:
                continue
            if y0 == 0 and rest_zero:
                continue
            y[0] = y0
            buf, count = _push(buf, count, y)
    elif b != 0:
        if c % (2 * b) == 0:
            y0 = -(c // (2 * b))
            if lo <= y0 <= hi and not (y0 == 0 and rest_zero):
                y[0] = y0
                buf, count = _push(buf, count, y)
    elif c == 0:
        for y0 in range(lo, hi + 1):
            if y0 == 0 and rest_zero:
                continue
            y[0] = y0
            buf, count = _push(buf, count, y)
    y[0] = 0
    return buf, count

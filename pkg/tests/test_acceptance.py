"""Acceptance criteria 1-10.  Each test prints one ``criterion N: PASS|FAIL`` line."""

import hashlib
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from twistorcount.counting import count_table, fit_exponent, two_point_slope
from twistorcount.enumeration import brute_force_oracle, enumerate_isotropic
from twistorcount.k3 import elliptic_fibrations, slag_fibrations
from twistorcount.lattice import U_GRAM, build_diagonal_lattice, build_k3_lattice, inertia, is_even_unimodular
from twistorcount.orbits import hyperbolic_splitting, reduce_to_standard, verify_isometry
from twistorcount.plane import axis_plane, random_exact_plane, random_plane
from twistorcount.sphere import WeightFunction, funk_transform_numeric, weyl_sums, weyl_table_csv
from twistorcount.tamagawa import (
    MINUS,
    PLUS,
    count_isometries_backtracking,
    count_isometries_exhaustive,
    orthogonal_group_order,
    truncated_ratio_product,
    zeta,
)

K3_SEED = 7
# Largest threshold used for the K3 run: ~5.8e5 vectors in ~17 s per pass on
# one core; V = 2.2 already needs ~3.9e6 records (see the README).
V_MAX = Fraction(2)
V_HALF = V_MAX / Fraction(math.sqrt(2))
N_MIN = 10 ** 4


def report(capsys, n, ok, detail):
    with capsys.disabled():
        print(f"\ncriterion {n}: {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, detail


def _artifacts(iso) -> dict:
    ths = [V_HALF, V_MAX]
    rows = []
    for V in ths:
        certain, _ = iso.mask_within(V)
        rows.append((float(V), weyl_sums(iso.directions[certain], 4)))
    texts = {
        "records.csv": iso.to_csv(),
        "records.jsonl": iso.to_jsonl(),
        "counts.csv": count_table(iso, ths).to_csv(),
        "weyl.csv": weyl_table_csv(rows),
    }
    return {k: hashlib.sha256(v.encode()).hexdigest() for k, v in texts.items()}


@pytest.fixture(scope="module")
def k3_run():
    lat = build_k3_lattice()
    plane = random_plane(lat, K3_SEED)
    t = time.perf_counter()
    iso = enumerate_isotropic(lat, plane, V_MAX, workers=1)
    elapsed = time.perf_counter() - t
    hashes1 = _artifacts(iso)
    iso8 = enumerate_isotropic(lat, plane, V_MAX, workers=8)
    hashes8 = _artifacts(iso8)
    del iso8
    return {"lattice": lat, "plane": plane, "iso": iso, "elapsed": elapsed, "hashes": (hashes1, hashes8)}


def test_criterion_1_oracle_equivalence(capsys):
    t = time.perf_counter()
    mismatches, checked = [], 0
    for p, q in ((2, 3), (1, 2)):
        lat = build_diagonal_lattice(p, q)
        for seed in range(20):
            plane = random_exact_plane(lat, seed)
            for V in (1, 2, 3, 5):
                got = [r.csv_row() for r in enumerate_isotropic(lat, plane, V)]
                want = [r.csv_row() for r in brute_force_oracle(lat, plane, V)]
                checked += 1
                if got != want:
                    mismatches.append((p, q, seed, V))
    i23 = build_diagonal_lattice(2, 3)
    n1 = len(enumerate_isotropic(i23, axis_plane(i23), 1))
    elapsed = time.perf_counter() - t
    ok = not mismatches and n1 == 24 and elapsed < 60
    report(capsys, 1, ok, f"{checked} cases, mismatches={mismatches}, N(1)={n1}, {elapsed:.1f}s")


def test_criterion_2_low_rank_exponent(capsys):
    lat = build_diagonal_lattice(2, 3)
    plane = random_exact_plane(lat, 0)
    t = time.perf_counter()
    ths = [10, 14, 20, 28, 40]
    table = count_table(enumerate_isotropic(lat, plane, ths[-1]), ths)
    slope, stderr = fit_exponent(table)
    elapsed = time.perf_counter() - t
    ok = 2.7 <= slope <= 3.3 and elapsed < 600
    report(capsys, 2, ok, f"slope={slope:.4f}+-{stderr:.4f} vs 3, counts={table.counts}, {elapsed:.1f}s")


def test_criterion_3_k3_exponent(capsys, k3_run):
    iso = k3_run["iso"]
    table = count_table(iso, [V_HALF, V_MAX])
    n_lo, n_hi = table.counts
    slope = two_point_slope(n_lo, n_hi, V_HALF, V_MAX)
    ok = n_hi >= N_MIN and 17 <= slope <= 23 and k3_run["elapsed"] < 1800 and sum(table.uncertain) == 0
    report(capsys, 3, ok, f"N({float(V_HALF):.4f})={n_lo}, N({V_MAX})={n_hi}, slope={slope:.3f} vs 20, "
                          f"uncertain={table.uncertain}, {k3_run['elapsed']:.1f}s")


def test_criterion_4_equidistribution(capsys, k3_run):
    iso = k3_run["iso"]
    norm = {}
    for V in (V_HALF, V_MAX):
        certain, _ = iso.mask_within(V)
        pts = iso.directions[certain]
        norm[V] = {(l, m): abs(s) / len(pts) for l, m, s in weyl_sums(pts, 4)}
    worst = max(norm[V_MAX].values())
    trend_bad = [k for k, v in norm[V_MAX].items() if v > 1.5 * norm[V_HALF][k]]
    ok = worst <= 0.1 and not trend_bad
    report(capsys, 4, ok, f"max |S|/N at V_max={worst:.2e}, at V_max/sqrt2={max(norm[V_HALF].values()):.2e}, "
                          f"trend violations={trend_bad}")


def test_criterion_5_funk_spectrum(capsys):
    rng = np.random.default_rng(0)
    dirs = rng.normal(size=(6, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    dirs = np.vstack([dirs, [[0.0, 0.0, 1.0]]])
    worst_even, worst_odd = 0.0, 0.0
    for l, lam in ((2, -0.5), (4, 0.375)):
        for m in range(-l, l + 1):
            f = WeightFunction.harmonic(l, m)
            for u in dirs:
                worst_even = max(worst_even, abs(funk_transform_numeric(f, u, 512) - lam * f(u)))
    for l in (1, 3):
        for m in range(-l, l + 1):
            f = WeightFunction.harmonic(l, m)
            for u in dirs:
                worst_odd = max(worst_odd, abs(funk_transform_numeric(f, u, 512)))
    ok = worst_even < 1e-6 and worst_odd < 1e-6
    report(capsys, 5, ok, f"max eigen residual={worst_even:.1e}, max odd image={worst_odd:.1e}")


def _sample(iso, k, seed):
    idx = np.sort(np.random.default_rng(seed).choice(len(iso), size=k, replace=False))
    return [tuple(int(x) for x in iso.vectors[i]) for i in idx]


def test_criterion_6_orbit_transitivity(capsys, k3_run):
    lat = k3_run["lattice"]
    f1 = tuple(int(i == 0) for i in range(22))
    bad, max_steps, max_time = [], 0, 0.0
    for w in _sample(k3_run["iso"], 100, 1):
        t = time.perf_counter()
        gamma = reduce_to_standard(lat, w)
        dt = time.perf_counter() - t
        steps = len(gamma.provenance)
        max_steps, max_time = max(max_steps, steps), max(max_time, dt)
        if not (verify_isometry(lat, gamma) and gamma.apply(w) == f1 and steps <= 64 and dt <= 5):
            bad.append(w)
    report(capsys, 6, not bad, f"100 vectors, failures={len(bad)}, max generators={max_steps}, "
                               f"max time={max_time:.3f}s")


def test_criterion_7_splitting_certificates(capsys, k3_run):
    lat = k3_run["lattice"]
    bad = []
    for w in _sample(k3_run["iso"], 50, 2):
        cert = hyperbolic_splitting(lat, w)
        if not (is_even_unimodular(cert.complement_gram) and inertia(cert.complement_gram) == (2, 0, 18)):
            bad.append(w)
    report(capsys, 7, not bad, f"50 vectors, failures={len(bad)}")


def test_criterion_8_constant_family(capsys):
    closed = {2: math.pi ** 2 / 6, 4: math.pi ** 4 / 90, 6: math.pi ** 6 / 945}
    zeta_err = max(abs(zeta(s)[0] - v) for s, v in closed.items())
    nonsplit = {3: [[1, 0], [0, 1]], 5: [[1, 0], [0, -2]], 7: [[1, 0], [0, 1]]}
    orders_ok = all(
        orthogonal_group_order(1, PLUS, p) == count_isometries_exhaustive(U_GRAM, p)
        and orthogonal_group_order(1, MINUS, p) == count_isometries_exhaustive(nonsplit[p], p)
        for p in (3, 5, 7)
    )
    split4 = [[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]]
    nonsplit4 = [[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]
    orders_ok &= count_isometries_backtracking(split4, 3) == orthogonal_group_order(2, PLUS, 3)
    orders_ok &= count_isometries_backtracking(nonsplit4, 3) == orthogonal_group_order(2, MINUS, 3)
    lo, _ = truncated_ratio_product(10 ** 3)
    hi, _ = truncated_ratio_product(10 ** 4)
    rel = abs(hi - lo) / hi
    ok = zeta_err < 1e-10 and orders_ok and rel < 1e-6
    report(capsys, 8, ok, f"zeta err={zeta_err:.1e}, group orders ok={orders_ok}, product rel diff={rel:.1e}")


def test_criterion_9_pairing_identity(capsys, k3_run):
    lat, plane, iso = k3_run["lattice"], k3_run["plane"], k3_run["iso"]
    ladder = [Fraction(1), Fraction(6, 5), Fraction(7, 5), V_HALF, Fraction(8, 5), Fraction(9, 5), V_MAX]
    pairs = []
    for V in ladder:
        sub = iso.restrict(V)
        ell, _ = elliptic_fibrations(lat, plane, V, genericity_bound=0, records=sub)
        slag, _ = slag_fibrations(lat, plane, V, genericity_bound=0, records=sub)
        pairs.append((len(ell), len(slag)))
    ok = all(e == 2 * s for e, s in pairs)
    report(capsys, 9, ok, f"(N_elliptic, N_slag) along the ladder: {pairs}")


def test_criterion_10_determinism(capsys, k3_run):
    h1, h8 = k3_run["hashes"]
    differ = [k for k in h1 if h1[k] != h8[k]]
    report(capsys, 10, not differ, f"artifacts compared={sorted(h1)}, differing={differ}")

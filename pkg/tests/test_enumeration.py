import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from twistorcount.enumeration import (
    CSV_HEADER,
    brute_force_oracle,
    enumerate_isotropic,
    oracle_box,
)
from twistorcount.lattice import LatticeError, build_diagonal_lattice, content, quadratic_value
from twistorcount.plane import axis_plane, random_exact_plane, random_plane

I23 = build_diagonal_lattice(2, 3)
I12 = build_diagonal_lattice(1, 2)


def test_axis_plane_fixed_point(i23):
    iso = enumerate_isotropic(i23, axis_plane(i23), 1)
    assert len(iso) == 24
    # |e|_P^2 = e1^2 + e2^2 = 1 with one of e3..e5 equal to +-1
    assert all(r.snorm_sq == 1 for r in iso)


def test_axis_plane_matches_oracle(i23):
    plane = axis_plane(i23)
    for V in (1, 2, 3, 5):
        assert list(enumerate_isotropic(i23, plane, V)) == brute_force_oracle(i23, plane, V)


@settings(max_examples=25, deadline=None)
@given(st.sampled_from([I23, I12]), st.integers(0, 10_000), st.sampled_from([1, 2, Fraction(5, 2), 3]))
def test_random_exact_planes_match_oracle(lat, seed, V):
    plane = random_exact_plane(lat, seed)
    assert list(enumerate_isotropic(lat, plane, V)) == brute_force_oracle(lat, plane, V)


def test_records_are_primitive_isotropic_and_symmetric(i23):
    plane = random_exact_plane(i23, 11)
    iso = enumerate_isotropic(i23, plane, 4)
    vecs = {tuple(map(int, v)) for v in iso.vectors}
    for rec in iso:
        assert quadratic_value(i23, rec.vector) == 0
        assert content(rec.vector) == 1
        assert rec.snorm_sq <= 16
        assert tuple(-x for x in rec.vector) in vecs
        assert np.isclose(np.linalg.norm(rec.direction), 1.0)
        assert math.isclose(math.exp(2 * rec.hitting_time), float(rec.snorm_sq), rel_tol=1e-12)
    rows = [tuple(map(int, v)) for v in iso.vectors]
    assert rows == sorted(rows)


def test_restrict_equals_smaller_run(i23):
    plane = random_exact_plane(i23, 3)
    big = enumerate_isotropic(i23, plane, 5)
    for V in (1, 2, Fraction(7, 2)):
        assert list(big.restrict(V)) == list(enumerate_isotropic(i23, plane, V))


def test_worker_count_does_not_change_output(k3):
    plane = random_plane(k3, 7)
    a = enumerate_isotropic(k3, plane, Fraction(7, 5), workers=1)
    b = enumerate_isotropic(k3, plane, Fraction(7, 5), workers=4)
    assert a.to_csv() == b.to_csv() and a.to_jsonl() == b.to_jsonl()


def test_float_mode_agrees_with_exact_twin(i23):
    plane = random_plane(i23, 3)
    twin = plane.exact_twin()
    for V in (2, 3):
        fl = enumerate_isotropic(i23, plane, V)
        ex = enumerate_isotropic(i23, twin, V)
        sure = {tuple(map(int, v)) for v, u in zip(fl.vectors, fl.uncertain) if not u}
        maybe = {tuple(map(int, v)) for v in fl.vectors}
        exact = {tuple(map(int, v)) for v in ex.vectors}
        assert sure <= exact <= maybe


def test_invalid_bound_and_foreign_plane(i23, i12):
    plane = axis_plane(i23)
    with pytest.raises(LatticeError):
        enumerate_isotropic(i23, plane, 0)
    with pytest.raises(LatticeError):
        enumerate_isotropic(i12, plane, 1)


def test_oracle_box_covers_axis_plane(i23):
    box = oracle_box(axis_plane(i23), 2)
    assert len(box) == 5 and all(b >= 2 for b in box)


def test_serialization(i23):
    iso = enumerate_isotropic(i23, axis_plane(i23), 1)
    lines = iso.to_csv(limit=3).splitlines()
    assert lines[0] == ",".join(CSV_HEADER) and len(lines) == 4
    assert len(iso.to_jsonl().splitlines()) == 24

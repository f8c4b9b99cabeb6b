import math
from fractions import Fraction

import pytest

from twistorcount.lattice import U_GRAM, build_diagonal_lattice, build_k3_lattice
from twistorcount.tamagawa import (
    MINUS,
    PLUS,
    ConstantError,
    constant_report,
    count_isometries_backtracking,
    count_isometries_exhaustive,
    family_value,
    form_type,
    group_order,
    local_volume,
    orthogonal_group_order,
    truncated_ratio_product,
    zeta,
)


def _nonsplit_plane(p):
    a = next(a for a in range(2, p) if pow(a, (p - 1) // 2, p) == p - 1)
    return [[1, 0], [0, -a]]


def test_zeta_closed_forms():
    for s, exact in [(2, math.pi ** 2 / 6), (4, math.pi ** 4 / 90), (6, math.pi ** 6 / 945)]:
        value, hw = zeta(s)
        assert abs(value - exact) < 1e-10 and hw <= 1e-12
        assert abs(value - exact) <= hw


def test_zeta_domain():
    with pytest.raises(ConstantError):
        zeta(1)
    with pytest.raises(ConstantError):
        zeta(4, tol=1e-16)


@pytest.mark.parametrize("p", [3, 5, 7])
def test_rank_two_orders_exhaustive(p):
    assert orthogonal_group_order(1, PLUS, p) == 2 * (p - 1) == count_isometries_exhaustive(U_GRAM, p)
    assert orthogonal_group_order(1, MINUS, p) == 2 * (p + 1) == count_isometries_exhaustive(_nonsplit_plane(p), p)


def test_rank_four_and_three_backtracking():
    split = [[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]]
    assert count_isometries_backtracking(split, 3) == orthogonal_group_order(2, PLUS, 3) == 1152
    nonsplit = [[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]
    assert form_type(nonsplit, 3) == MINUS
    assert count_isometries_backtracking(nonsplit, 3) == orthogonal_group_order(2, MINUS, 3)
    diag3 = build_diagonal_lattice(1, 2).gram
    assert count_isometries_backtracking(diag3, 3) == group_order(diag3, 3) == 48


def test_k3_form_is_split_and_volumes():
    k3 = build_k3_lattice().gram
    assert form_type(k3, 5) == PLUS
    vol = local_volume(k3, 5)
    assert isinstance(vol, Fraction) and vol == Fraction(orthogonal_group_order(11, PLUS, 5), 5 ** 231)
    with pytest.raises(ConstantError):
        local_volume(k3, 2)
    with pytest.raises(ConstantError):
        orthogonal_group_order(2, PLUS, 9)


def test_ratio_product_converges_to_zeta_quotient():
    lo, _ = truncated_ratio_product(1000)
    hi, bound = truncated_ratio_product(10000)
    assert 1 < lo <= hi and (hi - lo) / hi < 1e-6
    assert truncated_ratio_product(10)[0] < lo
    z10, z11, z20 = zeta(10)[0], zeta(11)[0], zeta(20)[0]
    two = (1 - 2 ** -11) * (1 - 2 ** -20) / (1 - 2 ** -10)
    assert abs(hi - z10 / (z11 * z20) / two) < 1e-9


def test_family_value_and_report():
    assert math.isclose(family_value(), 1 / (math.pi ** 20 * zeta(11)[0]))
    rep = constant_report(2.0, prime_cutoff=100, relative_stderr=0.1)
    assert math.isclose(rep.fitted_ratio, 2.0 / rep.family_value)
    assert math.isclose(rep.fitted_ratio_stderr, 0.1 * rep.fitted_ratio)
    assert rep.warnings == []
    assert set(rep.to_json()["local_volumes"]) == {"3", "5", "7", "11", "13", "17", "19", "23", "29", "31",
                                                  "37", "41", "43", "47"}
    assert constant_report(0.0, prime_cutoff=100).warnings

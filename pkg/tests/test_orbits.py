import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from twistorcount.enumeration import enumerate_isotropic
from twistorcount.lattice import LatticeError, build_diagonal_lattice, inertia, is_even_unimodular, quadratic_value
from twistorcount.orbits import (
    Isometry,
    ReductionError,
    compose_provenance,
    complement_inertia,
    determinant_sign,
    eichler_transvection,
    hyperbolic_splitting,
    map_between,
    reduce_to_standard,
    verify_isometry,
)
from twistorcount.plane import random_plane

F1 = tuple(int(i == 0) for i in range(22))
G1 = tuple(int(i == 1) for i in range(22))


@pytest.fixture(scope="module")
def sample(k3):
    iso = enumerate_isotropic(k3, random_plane(k3, 7), 1.5)
    rng = np.random.default_rng(0)
    idx = rng.choice(len(iso), size=25, replace=False)
    return [tuple(int(x) for x in iso.vectors[i]) for i in sorted(idx)]


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(-3, 3), min_size=20, max_size=20))
def test_transvection_is_isometry(tail):
    from twistorcount.lattice import build_k3_lattice

    k3 = build_k3_lattice()
    a = (0, 0) + tuple(tail)  # orthogonal to f1
    t = eichler_transvection(k3, F1, a)
    assert verify_isometry(k3, t) and determinant_sign(t) == 1
    back = eichler_transvection(k3, F1, tuple(-x for x in a))
    assert back.compose(t).matrix == Isometry(tuple(tuple(int(i == j) for j in range(22)) for i in range(22))).matrix


def test_transvection_preconditions(k3):
    with pytest.raises(LatticeError):
        eichler_transvection(k3, F1, G1)  # not orthogonal
    with pytest.raises(LatticeError):
        eichler_transvection(k3, tuple(int(i in (0, 1)) for i in range(22)), (0,) * 22)


def test_reduction_of_sampled_vectors(k3, sample):
    for w in sample:
        gamma = reduce_to_standard(k3, w)
        assert gamma.apply(w) == F1
        assert verify_isometry(k3, gamma)
        assert len(gamma.provenance) <= 64
        assert compose_provenance(k3, gamma.provenance).matrix == gamma.matrix


def test_map_between_and_inverse(k3, sample):
    v, w = sample[0], sample[-1]
    gamma = map_between(k3, v, w)
    assert gamma.apply(v) == w
    inv = gamma.inverse(k3)
    assert inv.apply(w) == v
    assert compose_provenance(k3, inv.provenance).matrix == inv.matrix


def test_isometry_json_roundtrip(k3, sample):
    gamma = reduce_to_standard(k3, sample[3])
    assert Isometry.from_json(gamma.to_json()) == gamma


def test_splitting_certificate(k3, sample):
    for w in sample[:10]:
        cert = hyperbolic_splitting(k3, w)
        assert quadratic_value(k3, cert.x1) == 0
        assert is_even_unimodular(cert.complement_gram)
        assert complement_inertia(cert) == (2, 0, 18)
        assert inertia(cert.complement_gram) == (2, 0, 18)


def test_rejects_bad_vectors(k3):
    with pytest.raises(LatticeError, match="isotropic"):
        reduce_to_standard(k3, tuple(int(i < 2) for i in range(22)))
    with pytest.raises(LatticeError, match="primitive"):
        reduce_to_standard(k3, tuple(2 * x for x in F1))
    with pytest.raises(LatticeError):
        hyperbolic_splitting(build_diagonal_lattice(2, 3), (1, 0, 1, 0, 0))


def test_step_bound_reports_partial_progress(k3, sample):
    w = max(sample, key=lambda v: len(reduce_to_standard(k3, v).provenance))
    with pytest.raises(ReductionError) as info:
        reduce_to_standard(k3, w, step_bound=1)
    assert info.value.partial is not None and info.value.partial_vector is not None

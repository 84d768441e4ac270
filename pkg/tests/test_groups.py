import numpy as np
import pytest
import scipy.linalg

from conftest import E
from mapgroups.errors import InvalidArgumentError, UnsupportedClassificationError
from mapgroups.groups import (
    AbelianQuotient,
    GeneralLinear,
    GroupElement,
    Lattice,
    SpecialLinear,
    exp_lattice_group,
    exp_to_group,
    group_multiply,
    is_in_exp_image,
    quotient_reduce,
)


def test_identity_is_neutral():
    g = GroupElement(GeneralLinear(2), np.array([[2, 1], [0, 1]], dtype=complex))
    np.testing.assert_allclose(group_multiply(GeneralLinear(2).identity(), g).value, g.value)


def test_abelian_mod_one():
    group = AbelianQuotient(1, Lattice(1, ((1,),)))
    s = GroupElement(group, [0.7]) * GroupElement(group, [0.6])
    np.testing.assert_allclose(s.value, [0.3], atol=1e-12)


def test_times_inverse_is_identity(rng):
    g = GroupElement(GeneralLinear(3), scipy.linalg.expm(rng.normal(size=(3, 3))))
    assert (g * g.inverse()).distance_to_identity() < 1e-12


def test_exp_to_group_examples():
    g = exp_to_group(SpecialLinear(2), np.diag([1j * np.pi, -1j * np.pi]))
    np.testing.assert_allclose(g.value, -np.eye(2), atol=1e-14)
    cz2 = AbelianQuotient(1, Lattice(1, ((1,), (1j,))))
    assert exp_to_group(cz2, [1 + 2j]).distance_to_identity() < 1e-12
    np.testing.assert_allclose(exp_to_group(GeneralLinear(2), E).value, np.eye(2) + E, atol=1e-15)


def test_exp_image_minus_identity():
    ok, x = is_in_exp_image(SpecialLinear(2), -np.eye(2))
    assert ok
    np.testing.assert_allclose(scipy.linalg.expm(x), -np.eye(2), atol=1e-12)


def test_exp_image_excludes_minus_jordan_block():
    ok, x = is_in_exp_image(SpecialLinear(2), np.array([[-1, 1], [0, -1]]))
    assert not ok and x is None


def test_exp_image_gl_witness():
    ok, x = is_in_exp_image(GeneralLinear(2), np.diag([-1.0, -2.0]))
    assert ok
    np.testing.assert_allclose(scipy.linalg.expm(x), np.diag([-1.0, -2.0]), atol=1e-12)


def test_exp_image_sl2_random_exponentials(rng):
    for _ in range(10):
        x = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        x -= np.trace(x) / 2 * np.eye(2)
        ok, w = is_in_exp_image(SpecialLinear(2), scipy.linalg.expm(x))
        assert ok
        np.testing.assert_allclose(scipy.linalg.expm(w), scipy.linalg.expm(x), atol=1e-9)


def test_exp_image_unclassified_groups():
    with pytest.raises(UnsupportedClassificationError):
        is_in_exp_image(SpecialLinear(3), np.eye(3))


def test_quotient_reduce_examples():
    z = Lattice(1, ((1,),))
    np.testing.assert_allclose(quotient_reduce(z, [2.25]), [0.25], atol=1e-12)
    np.testing.assert_allclose(quotient_reduce(z, [3.0]), [0.0], atol=1e-12)
    two = Lattice(2, ((1, 0), (0, 2)))
    np.testing.assert_allclose(quotient_reduce(two, [1.5, 3.5]), [0.5, 1.5], atol=1e-12)


def test_cx_is_c_mod_2pi_i():
    cx = exp_lattice_group(1)
    assert GroupElement(cx, [2j * np.pi * 3]).distance_to_identity() < 1e-12


def test_lattice_rejects_dependent_generators():
    with pytest.raises(InvalidArgumentError):
        Lattice(1, ((1,), (2,)))


def test_sl_membership_checks():
    with pytest.raises(InvalidArgumentError):
        GroupElement(SpecialLinear(2), np.diag([2.0, 2.0]))
    with pytest.raises(InvalidArgumentError):
        SpecialLinear(2).check_algebra(np.eye(2))

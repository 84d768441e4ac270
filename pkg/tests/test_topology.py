import numpy as np
import pytest
import scipy.linalg

from conftest import E, F, H
from mapgroups.errors import InvalidArgumentError, PrecisionError
from mapgroups.forms import ComplexForm, ZeroForm, scalar_group
from mapgroups.groups import AbelianQuotient, GeneralLinear, Lattice, SpecialLinear, exp_lattice_group
from mapgroups.paths import PuncturedPlane, Segment, loop_basis, repeat
from mapgroups.topology import (
    abelian_period,
    bs_section,
    component_class,
    homomorphism_check,
    lattice_integrable,
    period,
    period_tangent,
    period_vector,
    word_loop,
)

GL2 = GeneralLinear(2)
ONE = PuncturedPlane((0,), 1.0)
TWO = PuncturedPlane((0, 1.5j), 2.0)


def _pole_form(a, dom=ONE):
    a = np.asarray(a, dtype=complex)
    return ComplexForm(lambda z: a[None] / z[:, None, None], dom, GL2)


def test_period_of_pole_form_and_its_powers():
    a = np.array([[0.3, 1.0], [0.2, -0.4]])
    loop = loop_basis(ONE)[0]
    for n in (1, 2, 3):
        got = period(_pole_form(a), repeat(loop, n)).value
        assert np.linalg.norm(got - scipy.linalg.expm(2j * np.pi * n * a)) < 1e-8


def test_exact_and_zero_forms_have_trivial_periods():
    exact = ComplexForm("[[2*z, 1], [0, -3*z^2]]", TWO, GL2)
    assert period_vector(exact).is_integrable()
    assert all(d == 0 for d in period_vector(ZeroForm(TWO, GL2)).distances())


def test_integrability_dichotomy():
    assert period_vector(_pole_form(np.diag([1.0, 2.0]))).is_integrable()
    bad = period_vector(_pole_form(np.diag([0.5, 1 / 3])))
    assert not bad.is_integrable() and bad.distances()[0] >= 0.5


def test_period_needs_a_loop_at_the_base_point():
    with pytest.raises(InvalidArgumentError):
        period(_pole_form(np.eye(2)), Segment(1, 2))


def _two_pole_form():
    a, b = 0.4 * E + 0.1 * H, 0.3 * F
    return ComplexForm(lambda z: a[None] / z[:, None, None] + b[None] / (z - 1.5j)[:, None, None], TWO, GL2)


def test_homomorphism_property():
    form = _two_pole_form()
    basis = loop_basis(TWO)
    assert homomorphism_check(form, basis, [(0, 1)]) < 1e-12
    assert period(form, word_loop(basis, [(0, 1), (0, -1)])).distance_to_identity() < 1e-8
    assert homomorphism_check(form, basis, [(0, 1), (1, 1)]) < 1e-6
    assert homomorphism_check(form, basis, [(1, 2), (0, -1), (1, 1)]) < 1e-6


def test_bs_section_examples():
    zero = bs_section([np.zeros((2, 2)), np.zeros((2, 2))], TWO, GL2)
    assert period_vector(zero).distances() == [0.0, 0.0]
    x = np.array([[0.2, 0.7], [-0.3, 0.1]])
    got = period(bs_section([x], ONE, GL2), loop_basis(ONE)[0]).value
    assert np.linalg.norm(got - scipy.linalg.expm(x)) < 1e-10


def test_period_map_tangent_is_identity_on_sections(rng):
    xs = [0.5 * (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))) for _ in range(2)]
    for d, x in zip(period_tangent(TWO, GL2, xs), xs):
        assert np.linalg.norm(d - x) < 1e-5


def test_abelian_periods_modulo_integers():
    z_lattice = Lattice(1, ((1,),))
    loop = loop_basis(ONE)[0]
    scalar = scalar_group()
    residue = ComplexForm("[[1/(2*i*pi*z)]]", ONE, scalar)
    assert abelian_period(residue, loop, z_lattice).distance_to_identity() < 1e-10
    assert lattice_integrable(residue, z_lattice)
    exact = ComplexForm("[[3 + 2*i]]", ONE, scalar)
    assert abs(abelian_period(exact, loop, z_lattice).value[0]) < 1e-12
    half = ComplexForm("[[0.5/(2*i*pi*z)]]", ONE, scalar)
    assert abs(abelian_period(half, loop, z_lattice).value[0] - 0.5) < 1e-10
    assert not lattice_integrable(half, z_lattice)


def test_component_classes_of_powers_add():
    cx = exp_lattice_group(1)
    cls = {k: component_class(ComplexForm(f"{k}/z", ONE, cx), cx) for k in range(-5, 6)}
    assert all(cls[k].coords == ((k,),) for k in cls)
    assert component_class(ComplexForm("2/z + 3/z", ONE, cx), cx) == cls[2] + cls[3]
    assert component_class(ComplexForm("[[2*z + 3 - z^2]]", ONE, cx), cx).is_trivial()


def test_component_class_two_punctures():
    cx = exp_lattice_group(1)
    cls = component_class(ComplexForm("2/z - 1/(z - 1.5*i)", TWO, cx), cx)
    assert cls.coords == ((2,), (-1,))
    assert str(cls) == "(2); (-1)"


def test_component_class_rejects_off_lattice_periods():
    cx = exp_lattice_group(1)
    with pytest.raises(PrecisionError):
        component_class(ComplexForm("0.5/z", ONE, cx), cx)
    with pytest.raises(InvalidArgumentError):
        component_class(ComplexForm("1/z", ONE, AbelianQuotient(1)), AbelianQuotient(1))

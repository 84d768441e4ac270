import numpy as np
import pytest
import scipy.linalg

from conftest import E, F, H
from mapgroups.calculus import (
    BasedMapElement,
    FullMapElement,
    SampledMap,
    cocycle_residual,
    evaluate,
    gauge_action,
    inverse,
    log_derivative_from_samples,
    multiply,
    nodal_log_derivative,
    pointwise_exp,
    pointwise_log_lift,
    sample_map,
)
from mapgroups.errors import AmbiguityError, BranchCutError, InvalidArgumentError, SamplingResolutionError
from mapgroups.forms import ChartForm, ComplexForm, RealIntervalForm, ZeroForm
from mapgroups.groups import AbelianQuotient, GeneralLinear, GroupElement, SpecialLinear
from mapgroups.paths import Circle, Interval, PlaneChart, PuncturedPlane, loop_basis
from mapgroups.topology import period_vector

SL2 = SpecialLinear(2)
GL2 = GeneralLinear(2)
INTERVAL = Interval(0.0, 1.0)
TS = np.linspace(0, 1, 1001)
PTS = np.array([0.3 + 0.4j, -0.5 + 0.2j, 0.9 - 0.9j, -0.1 - 0.7j])


def _expm_stack(mats):
    return np.array([scipy.linalg.expm(m) for m in mats])


def _chart_pair():
    chart = PlaneChart(-1, 1, -1, 1)
    a = BasedMapElement(ChartForm("[[0.1*x, 0.2], [0.3*y, -0.1*x]]", "[[0.05, 0.1*x], [0.2, -0.05]]", chart, SL2)).relative_to_path()
    b = BasedMapElement(ChartForm("[[0.2*y, 0.1], [0.1, -0.2*y]]", "[[0, 0.3*y], [0.1*x, 0]]", chart, SL2)).relative_to_path()
    return a, b


def _close(x, y, tol):
    return np.linalg.norm(np.asarray(x) - np.asarray(y)) < tol


def test_multiply_by_zero_is_identity():
    a, _ = _chart_pair()
    zero = BasedMapElement.zero(a.domain, SL2)
    for left, right in ((a, zero), (zero, a)):
        prod = multiply(left, right).form
        for t in (1.0, 1j):
            tang = np.full(PTS.shape, t)
            np.testing.assert_allclose(prod.evaluate(PTS, tang), a.form.evaluate(PTS, tang), atol=1e-13)


def test_abelian_multiply_and_inverse_are_sum_and_negation():
    group = AbelianQuotient(2)
    a = BasedMapElement(RealIntervalForm("[[t, 0], [0, 1]]", INTERVAL, group))
    b = BasedMapElement(RealIntervalForm("[[2, 0], [0, t^3]]", INTERVAL, group))
    ts, ones = np.linspace(0, 1, 5), np.ones(5)
    np.testing.assert_array_equal(
        multiply(a, b).form.evaluate(ts, ones), a.form.evaluate(ts, ones) + b.form.evaluate(ts, ones)
    )
    np.testing.assert_array_equal(inverse(a).form.evaluate(ts, ones), -a.form.evaluate(ts, ones))


def test_group_law_on_chart_forms():
    a, b = _chart_pair()
    ab = multiply(a, b)
    for p in PTS:
        assert _close(evaluate(ab, p).value, evaluate(a, p).value @ evaluate(b, p).value, 1e-6)


def test_group_law_is_associative_pointwise():
    a, b = _chart_pair()
    left = multiply(multiply(a, b), a)
    right = multiply(a, multiply(b, a))
    for p in PTS[:2]:
        assert _close(evaluate(left, p).value, evaluate(right, p).value, 1e-8)


def test_inverse_examples():
    a, _ = _chart_pair()
    zero = BasedMapElement.zero(a.domain, SL2)
    assert np.abs(inverse(zero).form.evaluate(PTS, np.ones(4))).max() == 0
    ident = multiply(a, inverse(a)).form
    for t in (1.0, 1j):
        assert np.abs(ident.evaluate(PTS, np.full(4, t))).max() < 1e-6
    for p in PTS:
        assert _close(evaluate(inverse(a), p).value, np.linalg.inv(evaluate(a, p).value), 1e-8)


def test_evaluate_zero_form_gives_base_value():
    k = GroupElement(GL2, np.array([[2, 1], [0, 1]], dtype=complex))
    f = FullMapElement(k, BasedMapElement.zero(PuncturedPlane((0,), 1.0), GL2))
    np.testing.assert_allclose(evaluate(f, 3 + 1j).value, k.value)


def test_evaluate_integrable_pole_form():
    el = BasedMapElement(ComplexForm("[[1/z, 0], [0, 2/z]]", PuncturedPlane((0,), 1.0), GL2)).verify()
    assert el.status == "verified"
    assert _close(evaluate(el, 2).value, np.diag([2, 4]), 1e-8)


def test_evaluate_shows_path_dependence():
    dom = PuncturedPlane((0,), 1.0)
    el = BasedMapElement(ComplexForm("[[0.5/z]]", dom, GeneralLinear(1))).verify()
    assert el.status == "unverified"
    np.testing.assert_allclose(evaluate(el, 1.0, loop_basis(dom)[0]).value, [[-1]], atol=1e-10)
    with pytest.raises(AmbiguityError):
        evaluate(el, 2.0)
    assert _close(evaluate(el.relative_to_path(), 4.0).value, [[2.0]], 1e-10)


def test_evaluation_path_must_match_endpoints():
    dom = PuncturedPlane((0,), 1.0)
    el = BasedMapElement(ComplexForm("[[0.5/z]]", dom, GeneralLinear(1)))
    with pytest.raises(InvalidArgumentError):
        evaluate(el, 2.0, loop_basis(dom)[0])


def test_log_derivative_of_constant_is_zero():
    f = SampledMap(INTERVAL, SL2, TS, np.broadcast_to(scipy.linalg.expm(E + F), (TS.size, 2, 2)))
    assert np.abs(nodal_log_derivative(f)).max() < 1e-12


def test_log_derivative_of_exp_tx():
    x = np.array([[0.3, 1.0], [0.5, -0.3]])
    f = SampledMap(INTERVAL, SL2, TS, _expm_stack([t * x for t in TS]))
    form = log_derivative_from_samples(f)
    vals = form.evaluate(np.linspace(0, 1, 13), np.ones(13))
    assert np.abs(vals - x).max() < 1e-5


def test_log_derivative_roundtrip():
    f = SampledMap(INTERVAL, SL2, TS, _expm_stack([np.sin(t) * E + t * H for t in TS]) @ scipy.linalg.expm(F))
    back = sample_map(BasedMapElement(log_derivative_from_samples(f)), TS)
    assert np.abs(back.values - np.linalg.solve(f.values[0], f.values)).max() < 1e-5


def test_coarse_samples_are_rejected():
    coarse = np.linspace(0, 1, 5)
    f = SampledMap(INTERVAL, SL2, coarse, _expm_stack([10 * t * (E + F) for t in coarse]))
    with pytest.raises(SamplingResolutionError):
        nodal_log_derivative(f)


def test_cocycle_residual_cases():
    ident = SampledMap(INTERVAL, SL2, TS, np.broadcast_to(np.eye(2), (TS.size, 2, 2)))
    f = SampledMap(INTERVAL, SL2, TS, _expm_stack([t * E + np.cos(t) * F for t in TS]))
    assert cocycle_residual(f, ident) < 1e-9
    ex = SampledMap(INTERVAL, SL2, TS, _expm_stack([t * E for t in TS]))
    assert cocycle_residual(ex, ex) < 1e-4
    group = AbelianQuotient(2)
    a = SampledMap(INTERVAL, group, TS, np.stack([TS**2, np.sin(TS)], axis=1))
    b = SampledMap(INTERVAL, group, TS, np.stack([TS, TS**3], axis=1))
    assert cocycle_residual(a, b) < 1e-12


def test_cocycle_on_chart():
    chart = PlaneChart(-1, 1, -1, 1)
    xs = ys = np.linspace(-1, 1, 81)

    def mk(a, b):
        return SampledMap.from_function(chart, SL2, (xs, ys), lambda z: _expm_stack([z.real[i] * a + z.imag[i] * b for i in range(z.size)]))

    assert cocycle_residual(mk(0.5 * E, 0.5 * F), mk(0.3 * H, 0.4 * (E + F))) < 1e-3


def test_gauge_action_examples():
    dom = PuncturedPlane((0, 1j), 2.0)
    alpha = ComplexForm("[[0.1/z, 0.2], [0, -0.1/z]]", dom, SL2)
    ident = FullMapElement.from_based(BasedMapElement.zero(dom, SL2))
    pts = np.array([1 + 1j, -2.0, 0.5j])
    ones = np.ones(3)
    np.testing.assert_allclose(gauge_action(alpha, ident).evaluate(pts, ones), alpha.evaluate(pts, ones), atol=1e-12)
    f_form = ComplexForm("[[0, 0.3*z], [0.2, 0]]", dom, SL2)
    f = FullMapElement.from_based(BasedMapElement(f_form, "verified"))
    zero = ZeroForm(dom, SL2)
    np.testing.assert_allclose(gauge_action(zero, f).evaluate(pts, ones), f_form.evaluate(pts, ones), atol=1e-12)
    before = period_vector(alpha)
    after = period_vector(gauge_action(alpha, f))
    for p, q in zip(before.values, after.values):
        assert _close(p.value, q.value, 1e-6)


def test_pointwise_exp_and_log():
    grid = np.linspace(0, 1, 21)
    ident = pointwise_exp("[[0, 0], [0, 0]]", INTERVAL, SL2, grid)
    np.testing.assert_allclose(ident.values, np.broadcast_to(np.eye(2), (21, 2, 2)))

    def xi(t):
        return 0.2 * E[None] + (0.1 * t)[:, None, None] * (F - H)[None]

    f = pointwise_exp(xi, INTERVAL, SL2, grid)
    assert np.abs(pointwise_log_lift(f) - xi(grid)).max() < 1e-10


def test_log_lift_outside_chart_raises():
    vals = np.broadcast_to(np.array([[-1, 1], [0, -1]], dtype=complex), (3, 2, 2))
    f = SampledMap(INTERVAL, SL2, np.linspace(0, 1, 3), vals)
    with pytest.raises(BranchCutError):
        pointwise_log_lift(f)


def test_circle_requires_verified_form_for_sampling():
    form = RealIntervalForm("[[0.3, 0], [0, -0.3]]", Circle(0.0), SL2)
    th = np.linspace(0, 2 * np.pi, 64, endpoint=False)
    with pytest.raises(AmbiguityError):
        sample_map(BasedMapElement(form), th)
    assert BasedMapElement(form).verify().status == "unverified"


def test_circle_roundtrip_with_periodic_map():
    th = np.linspace(0, 2 * np.pi, 2000, endpoint=False)
    f = SampledMap(Circle(0.0), SL2, th, _expm_stack([np.sin(t) * (E + 0.5 * H) for t in th]))
    el = BasedMapElement(log_derivative_from_samples(f)).verify(1e-5)
    assert el.status == "verified"
    back = sample_map(el, th)
    assert np.abs(back.values - f.values).max() < 1e-5

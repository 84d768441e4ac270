import numpy as np
import pytest

from mapgroups.errors import InvalidArgumentError
from mapgroups.paths import (
    Arc,
    Circle,
    PlaneChart,
    PuncturedPlane,
    Segment,
    avoiding_segment,
    concatenate,
    constant_path,
    loop_basis,
    radial_path,
    repeat,
    reverse,
    winding_matrix,
    winding_number,
)

TS = np.linspace(0, 1, 100)
UNIT = Arc(0, 1.0, 0.0, 2 * np.pi)


def test_single_puncture_basis():
    basis = loop_basis(PuncturedPlane((0,), 1.0))
    assert len(basis) == 1
    assert winding_number(basis[0], 0) == 1


def test_two_puncture_winding_matrix_is_identity():
    basis = loop_basis(PuncturedPlane((0, 4), 2.0))
    np.testing.assert_array_equal(winding_matrix(basis, [0, 4]), np.eye(2, dtype=int))


def test_random_puncture_sets_give_identity_windings(rng):
    for r in (1, 2, 3, 4):
        pts = tuple(rng.uniform(-3, 3, r) + 1j * rng.uniform(-3, 3, r))
        basis = loop_basis(PuncturedPlane(pts, 5 + 5j))
        np.testing.assert_array_equal(winding_matrix(basis, pts), np.eye(r, dtype=int))
        for loop in basis:
            assert abs(loop.start - (5 + 5j)) < 1e-12 and loop.is_closed()


def test_base_point_on_puncture_rejected():
    with pytest.raises(InvalidArgumentError):
        PuncturedPlane((0,), 0)


def test_winding_examples():
    assert winding_number(UNIT, 0) == 1
    assert winding_number(UNIT, 5) == 0
    assert winding_number(reverse(repeat(UNIT, 2)), 0) == -2


def test_radial_path():
    chart = PlaneChart(-1, 1, -1, 1)
    assert abs(radial_path(chart, 0).end) == 0
    seg = radial_path(chart, 1)
    assert seg == Segment(0, 1)
    x = 0.4 + 0.8j
    np.testing.assert_allclose(radial_path(chart, x).point(np.array([0.5])), [x / 2])


def test_concatenate_with_constant_and_double_reverse():
    g = Segment(0.2, 1 + 1j)
    both = concatenate(g, constant_path(g.end))
    # same image: the constant tail contributes nothing to the trace
    np.testing.assert_allclose(both.point(TS * both.knots[0]), g.point(TS), atol=1e-12)
    np.testing.assert_allclose(reverse(reverse(g)).point(TS), g.point(TS))


def test_winding_adds_over_concatenation():
    a = Arc(0, 1.0, 0.0, 2 * np.pi)
    b = Arc(0, 2.0, 0.0, -4 * np.pi)
    shift = concatenate(concatenate(a, Segment(1, 2)), concatenate(b, Segment(2, 1)))
    assert winding_number(shift, 0) == winding_number(a, 0) + winding_number(b, 0)


def test_avoiding_segment_detours_through_puncture():
    dom = PuncturedPlane((0,), 1.0)
    path = avoiding_segment(dom, 1.0, -1.0)
    assert np.abs(path.point(np.linspace(0, 1, 2001))).min() > 0.2
    assert abs(path.end + 1) < 1e-12


def test_circle_loop_is_one_turn():
    basis = loop_basis(Circle(0.5))
    assert len(basis) == 1
    assert abs(basis[0].end - basis[0].start - 2 * np.pi) < 1e-12

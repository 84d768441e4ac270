import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import E, F, H
from mapgroups import linalg
from mapgroups.errors import BranchCutError, InvalidArgumentError


def test_exp_of_zero_is_identity():
    np.testing.assert_allclose(linalg.mat_exp(np.zeros((2, 2))), np.eye(2), atol=1e-15)


def test_exp_of_diag_i_pi_is_minus_identity():
    np.testing.assert_allclose(linalg.mat_exp(np.diag([1j * np.pi, -1j * np.pi])), -np.eye(2), atol=1e-14)


def test_exp_of_nilpotent_terminates():
    np.testing.assert_allclose(linalg.mat_exp(E), np.eye(2) + E, atol=1e-15)


def test_exp_matches_scipy(rng):
    for scale in (0.01, 1.0, 10.0):
        x = scale * (rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))
        want = scipy.linalg.expm(x)
        assert linalg.distance(linalg.mat_exp(x), want) < 1e-12 * max(1.0, np.linalg.norm(want))


def test_exp_batch_matches_single(rng):
    xs = rng.normal(size=(7, 3, 3)) + 1j * rng.normal(size=(7, 3, 3))
    batch = linalg.mat_exp_batch(xs)
    for x, g in zip(xs, batch):
        np.testing.assert_allclose(g, scipy.linalg.expm(x), rtol=1e-12, atol=1e-12)


def test_log_of_identity_is_zero():
    np.testing.assert_allclose(linalg.mat_log_principal(np.eye(2)), 0, atol=1e-15)


def test_log_of_diag_exponentials():
    np.testing.assert_allclose(linalg.mat_log_principal(np.diag([np.e, np.e**2])), np.diag([1.0, 2.0]), atol=1e-13)


def test_log_rejects_branch_cut():
    with pytest.raises(BranchCutError):
        linalg.mat_log_principal(-np.eye(2))


matrices = st.lists(st.floats(-1, 1), min_size=8, max_size=8).map(
    lambda v: (np.array(v[:4]) + 1j * np.array(v[4:])).reshape(2, 2)
)


@settings(max_examples=60, deadline=None)
@given(matrices)
def test_log_exp_roundtrip(x):
    x = x * min(1.0, 0.9 / max(np.linalg.norm(x), 1e-12))
    assert linalg.distance(linalg.mat_log_principal(scipy.linalg.expm(x)), x) < 1e-10


def test_ad_conjugate_examples():
    x = np.array([[0.3, 1], [2, -0.3]])
    np.testing.assert_allclose(linalg.ad_conjugate(np.eye(2), x), x)
    np.testing.assert_allclose(linalg.ad_conjugate(np.diag([2.0, 1.0]), np.zeros((2, 2))), 0)
    np.testing.assert_allclose(linalg.ad_conjugate(np.diag([2.0, 1.0]), E), [[0, 2], [0, 0]])


def test_bracket_examples():
    x = np.array([[1, 2], [3, 4]], dtype=complex)
    np.testing.assert_allclose(linalg.bracket(x, x), 0)
    np.testing.assert_allclose(linalg.bracket(E, F), H)
    np.testing.assert_allclose(linalg.bracket(H, E), 2 * E)


def test_log_near_identity_matches_principal_log(rng):
    xs = 0.1 * (rng.normal(size=(5, 2, 2)) + 1j * rng.normal(size=(5, 2, 2)))
    gs = np.array([scipy.linalg.expm(x) for x in xs])
    np.testing.assert_allclose(linalg.log_near_identity(gs), xs, atol=1e-13)


def test_log_near_identity_rejects_far_points():
    with pytest.raises(InvalidArgumentError):
        linalg.log_near_identity(np.array([2 * np.eye(2)]))


def test_singular_inverse_rejected():
    with pytest.raises(InvalidArgumentError):
        linalg.inverse(np.zeros((2, 2)))

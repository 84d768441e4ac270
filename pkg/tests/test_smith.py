import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st
from sympy.matrices.normalforms import smith_normal_form as sympy_snf

from mapgroups.errors import InvalidArgumentError
from mapgroups.smith import (
    AbelianPresentation,
    discreteness_report,
    hom_rank,
    invariant_factors,
    smith_normal_form,
)

int_matrices = st.integers(1, 4).flatmap(
    lambda m: st.integers(1, 4).flatmap(
        lambda n: st.lists(st.lists(st.integers(-30, 30), min_size=n, max_size=n), min_size=m, max_size=m)
    )
)


@settings(max_examples=200, deadline=None)
@given(int_matrices)
def test_smith_form_is_a_valid_decomposition(r):
    u, d, v = smith_normal_form(r)
    U, D, V, R = (sympy.Matrix(x) for x in (u, d, v, r))
    assert U * R * V == D
    assert abs(U.det()) == 1 and abs(V.det()) == 1
    m, n = D.shape
    assert all(D[i, j] == 0 for i in range(m) for j in range(n) if i != j)
    diag = [D[i, i] for i in range(min(m, n))]
    assert all(x >= 0 for x in diag)
    for a, b in zip(diag, diag[1:]):
        assert (b == 0) if a == 0 else (b % a == 0)


@settings(max_examples=100, deadline=None)
@given(int_matrices)
def test_invariant_factors_match_sympy(r):
    ref = sympy_snf(sympy.Matrix(r), domain=sympy.ZZ)
    want = sorted(abs(ref[i, i]) for i in range(min(ref.shape)))
    assert sorted(invariant_factors(r)) == want


def test_hand_examples():
    assert invariant_factors([[2, 0], [0, 0]]) == [2, 0]
    assert invariant_factors([[2, 4, 4], [-6, 6, 12], [10, -4, -16]]) == [2, 6, 12]
    assert hom_rank(AbelianPresentation(2)) == 2
    assert hom_rank(AbelianPresentation(1, ((5,),))) == 0
    assert hom_rank(AbelianPresentation(2, ((2, 0), (0, 0)))) == 1
    assert hom_rank(AbelianPresentation(3, ((2, 3), (4, 6), (0, 0)))) == 2


def test_huge_entries_stay_exact():
    big = 10**40
    assert invariant_factors([[big, 0], [0, big * 3]]) == [big, 3 * big]


def test_discreteness_verdicts():
    rep = discreteness_report(AbelianPresentation(2, ((2, 0), (0, 0))), lattice_rank=1)
    assert rep.discrete and rep.hom_rank == 1 and rep.invariant_factors == (2, 0)
    assert discreteness_report(AbelianPresentation(1, ((5,),)), lattice_rank=0).discrete


def test_bad_inputs():
    with pytest.raises(InvalidArgumentError):
        smith_normal_form([[1, 2], [3]])
    with pytest.raises(InvalidArgumentError):
        smith_normal_form([[1.5]])
    with pytest.raises(InvalidArgumentError):
        AbelianPresentation(2, ((1,),))

from fractions import Fraction

import pytest
import sympy
from hypothesis import assume, given, strategies as st

import oracles
from hassett_psi.hfunction import (
    bracket_identity,
    h_coefficient,
    h_multi,
    h_multi_via_classes,
    h_scalar,
    inductive_identity,
    merge_coefficient,
    odd_double_factorial,
    operator_coefficient,
    scalar_bracket_identity,
)
from hassett_psi.weights import ONE, parse_weight

ks = st.integers(-1, 7)
es = st.integers(0, 7)
lists = st.lists(st.integers(0, 6), min_size=1, max_size=4)
labels = st.sampled_from([ONE, parse_weight("1/2"), parse_weight("1/3")])


@pytest.mark.parametrize("m", range(0, 12))
def test_double_factorial_against_sympy(m):
    assert odd_double_factorial(m) == sympy.factorial2(2 * m - 1)


def test_double_factorial_downward():
    # (2m-1)!! = (2m+1)!! / (2m+1)
    for m in range(-6, 3):
        assert odd_double_factorial(m) == odd_double_factorial(m + 1) / (2 * m + 1)


@given(ks, es)
def test_h_scalar_matches_product(k, e):
    assert h_scalar(k, e) == oracles.h(k, e)


def test_h_scalar_values():
    assert h_scalar(-1, 5) == 1
    assert h_scalar(0, 0) == 1
    assert h_scalar(2, 1) == 3 * 5 * 7
    # below k = -1 the ratio is a reciprocal product
    assert h_scalar(-2, 3) == Fraction(1, 5)
    assert h_scalar(-3, 3) == Fraction(1, 5 * 3)


@given(ks, lists)
def test_h_multi_matches_oracle(k, e):
    assume(all(x - 0 >= 0 for x in e))
    assert h_multi(k, e) == oracles.h_multi(k, e)


@given(ks, lists)
def test_h_multi_is_symmetric(k, e):
    assert h_multi(k, e) == h_multi(k, list(reversed(e)))


@given(ks, st.data())
def test_class_expansion(k, data):
    e = data.draw(lists)
    a = data.draw(st.lists(labels, min_size=len(e), max_size=len(e)))
    assert h_multi_via_classes(k, e, a) == h_multi(k, e)


@pytest.mark.parametrize("k1", range(-1, 9))
def test_scalar_bracket_grid(k1):
    for k2 in range(-1, 9):
        for e in range(0, 9):
            lhs, rhs = scalar_bracket_identity(k1, k2, e)
            assert lhs == rhs


@given(st.integers(-1, 5), st.integers(-1, 5), st.data())
def test_bracket_identity(k1, k2, data):
    assume(k1 + k2 >= -1)
    e = data.draw(lists)
    a = data.draw(st.lists(labels, min_size=len(e), max_size=len(e)))
    lhs, rhs = bracket_identity(k1, k2, e, a)
    assert lhs == rhs


@given(ks, st.integers(0, 6), lists)
def test_inductive_identity(k, c, e):
    lhs, rhs = inductive_identity(k, c, e)
    assert lhs == rhs


def test_h_coefficient_drops_negative_terms():
    assert h_coefficient(2, (0, 0)) == 30 and h_multi(2, (0, 0)) == 33
    # single index: nothing dropped
    for k in range(-1, 5):
        for e in range(0, 5):
            assert h_coefficient(k, (e,)) == h_scalar(k, e)


@given(st.integers(0, 5), st.lists(st.integers(1, 6), min_size=1, max_size=4))
def test_coefficients_agree_without_negative_targets(k, e):
    # with every e_i >= 1 and k >= 0 no sublist reaches a negative target
    assert operator_coefficient(k, e) == h_coefficient(k, e)
    assert merge_coefficient(k, e) == 1


def test_operator_coefficient_examples():
    assert operator_coefficient(-1, (0, 3)) == 0
    assert merge_coefficient(0, (0, 0, 2)) == 0
    with pytest.raises(ValueError):
        operator_coefficient(-1, (0, 0))
    with pytest.raises(ValueError):
        h_multi(0, [])


def test_scalar_identity_is_exact_rational():
    lhs, rhs = scalar_bracket_identity(3, -1, 2)
    assert isinstance(lhs, Fraction) and lhs == rhs

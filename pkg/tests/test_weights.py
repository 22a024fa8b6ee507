from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from hassett_psi.weights import (
    ONE,
    ZERO_PLUS,
    Weight,
    WeightError,
    WeightSet,
    WeightSum,
    additive_closure,
    admissible,
    parse_weight,
    parse_weight_set,
    weight_sum,
)

fractions_in_unit = st.builds(
    lambda q, p: Fraction(p % q + 1, q), st.integers(1, 12), st.integers(0, 100)
)
weights = st.one_of(st.just(ZERO_PLUS), fractions_in_unit.map(Weight))


@pytest.mark.parametrize("text, value, eps", [
    ("1", 1, False), ("0+", 0, True), ("1/3", Fraction(1, 3), False),
    (" 2 / 4 ", Fraction(1, 2), False), ("5/5", 1, False),
])
def test_parse_accepts_grammar(text, value, eps):
    w = parse_weight(text)
    assert (w.value, w.infinitesimal) == (value, eps)


@pytest.mark.parametrize("text", ["0", "1/2+", "3/2", "0/4", "1/0", "-1/2", "0.5", "", "1+", "abc"])
def test_parse_rejects(text):
    with pytest.raises(WeightError):
        parse_weight(text)


def test_illegal_direct_construction():
    with pytest.raises(WeightError):
        Weight(Fraction(0))
    with pytest.raises(WeightError):
        Weight(Fraction(1), True)
    with pytest.raises(WeightError):
        WeightSum(Fraction(-1))


@given(weights)
def test_str_round_trip(w):
    assert parse_weight(str(w)) == w


def test_zero_plus_arithmetic():
    assert ZERO_PLUS + ZERO_PLUS == ZERO_PLUS
    assert ZERO_PLUS < parse_weight("1/1000")
    assert not admissible(ZERO_PLUS + ONE)
    assert admissible(ZERO_PLUS + parse_weight("1/2") + parse_weight("1/2")) is False
    assert admissible(weight_sum([parse_weight("1/2")] * 2))


@given(st.lists(weights, min_size=1, max_size=6))
def test_weight_sum_matches_fold(ws):
    s = weight_sum(ws)
    assert s.value == sum(w.value for w in ws)
    assert s.infinitesimal == any(w.infinitesimal for w in ws)
    assert admissible(s) == (s.value < 1 or (s.value == 1 and not s.infinitesimal))


@given(st.lists(weights, min_size=1, max_size=3))
def test_closure_is_closed_and_minimal(seed):
    closed = additive_closure(seed)
    assert closed.is_closed()
    assert set(seed) <= set(closed)
    # every element is a sum of seeds: brute-force by repeated addition
    reach = set(seed)
    while True:
        more = {(a + b).to_weight() for a in reach for b in seed if admissible(a + b)} - reach
        if not more:
            break
        reach |= more
    assert set(closed) == reach


def test_closure_examples():
    assert str(additive_closure(parse_weight_set("1/3"))) == "1/3,2/3,1"
    assert str(additive_closure(parse_weight_set("2/5,4/5"))) == "2/5,4/5"
    assert str(additive_closure(parse_weight_set("0+"))) == "0+"
    assert not parse_weight_set("1/2").is_closed()


def test_weight_set_is_sorted_and_deduplicated():
    ws = parse_weight_set("1, 1/2, 0+, 1/2")
    assert str(ws) == "0+,1/2,1"
    assert ws.without_one() == WeightSet([ZERO_PLUS, parse_weight("1/2")])
    assert ONE in ws.without_one().with_one()
    with pytest.raises(WeightError):
        parse_weight_set(" , ")


def test_hash_consistent_with_eq():
    a, b = parse_weight("2/4"), Weight(Fraction(1, 2))
    assert a == b and hash(a) == hash(b)
    assert len({a, b, ONE}) == 2


@given(st.lists(weights, min_size=1, max_size=6), st.randoms())
def test_weight_sum_permutation_invariant(ws, rnd):
    shuffled = list(ws)
    rnd.shuffle(shuffled)
    assert weight_sum(shuffled) == weight_sum(ws)


@given(st.lists(weights, min_size=1, max_size=4))
def test_one_plus_wall(ws):
    if weight_sum(ws).value == 1:
        assert not admissible(weight_sum(ws + [ZERO_PLUS]))


@given(st.lists(weights, min_size=1, max_size=3))
def test_closure_idempotent(seed):
    once = additive_closure(seed)
    assert additive_closure(once) == once

import json
import threading
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

import oracles
from hassett_psi.correlators import (
    CACHE_ENV,
    CacheFormatError,
    CacheMismatch,
    CorrelatorCache,
    build_F_coefficients,
    correlator_keys,
    format_key,
    genus_for,
    partition_sum,
    unweighted_correlator,
    weighted_correlator,
)
from hassett_psi.weights import ONE, ZERO_PLUS, WeightSet, parse_weight, parse_weight_set

THIRD, HALF = parse_weight("1/3"), parse_weight("1/2")


def _oracle_key(key):
    return [(k, (a.value, a.infinitesimal)) for k, a in key]


@pytest.mark.parametrize("ks, value", [
    ((0, 0, 0), Fraction(1)), ((1,), Fraction(1, 24)), ((0, 2), Fraction(1, 24)),
    ((1, 1), Fraction(1, 24)), ((4,), Fraction(1, 1152)), ((2, 3), Fraction(29, 5760)),
    ((2, 2, 2), Fraction(7, 240)), ((7,), Fraction(1, 82944)), ((0, 0, 0, 1), Fraction(1)),
])
def test_wk_table(ks, value):
    assert unweighted_correlator(ks) == value


@pytest.mark.parametrize("g", range(1, 5))
def test_one_point(g):
    assert unweighted_correlator([3 * g - 2]) == oracles.one_point(g)


@given(st.integers(3, 8).flatmap(lambda n: st.lists(st.integers(0, n - 1), min_size=n - 3, max_size=n - 3)
                                  .map(lambda slots: [slots.count(i) for i in range(n)])))
def test_genus_zero_closed_form(ks):
    assert unweighted_correlator(ks) == oracles.genus0(ks)


@pytest.mark.parametrize("g, n", [(g, n) for g in range(0, 4) for n in range(1, 5)])
def test_dvv_against_textbook(g, n):
    for key in correlator_keys([ONE], n, g):
        ks = tuple(k for k, _ in key)
        assert unweighted_correlator(ks) == oracles.wk(ks)


def test_dimension_and_unstable():
    assert genus_for([0, 0, 0]) == 0 and genus_for([4]) == 2 and genus_for([1, 0]) is None
    assert unweighted_correlator([0, 0]) == 0
    assert unweighted_correlator([0, 1]) == 0  # fractional genus
    assert unweighted_correlator([-1, 0, 0, 0]) == 0


def test_weighted_examples():
    assert weighted_correlator([(0, THIRD)] * 3) == 1
    for a in (ZERO_PLUS, THIRD, HALF, ONE):
        assert weighted_correlator([(1, a)]) == Fraction(1, 24)


@pytest.mark.parametrize("weights", ["1/2,1", "1/3,2/3,1", "0+,1", "2/5,4/5"])
def test_partition_sum_against_brute_force(weights):
    ws = list(parse_weight_set(weights))
    for g in range(0, 2):
        for n in range(1, 5):
            for key in correlator_keys(ws, n, g):
                assert partition_sum(key) == oracles.weighted(_oracle_key(key)), format_key(key)


@pytest.mark.parametrize("weights", ["1/2,1", "1/3,2/3,1", "0+", "0+,1", "1/4,1/2,3/4,1"])
def test_modes_agree(weights):
    ws = list(parse_weight_set(weights))
    for g in range(0, 3):
        for n in range(1, 5 if g < 2 else 4):
            for key in correlator_keys(ws, n, g):
                assert weighted_correlator(key, "partition") == weighted_correlator(key, "recursion")


def test_weight_one_reduces_to_wk():
    for key in correlator_keys([ONE], 4, 1):
        assert weighted_correlator(key) == unweighted_correlator([k for k, _ in key])


def test_order_independent():
    a = weighted_correlator([(2, HALF), (0, ONE), (0, HALF)])
    b = weighted_correlator([(0, HALF), (2, HALF), (0, ONE)])
    assert a == b


def test_bad_mode_and_weight():
    with pytest.raises(ValueError):
        weighted_correlator([(1, ONE)], mode="magic")
    with pytest.raises(TypeError):
        weighted_correlator([(1, 0.5)])


def test_build_sorted_and_nonzero():
    rows = build_F_coefficients(WeightSet([HALF, ONE]), 4, 1)
    assert all(r.value for r in rows)
    assert rows == sorted(rows, key=lambda r: (r.genus, len(r.key), r.key))
    assert [r for r in rows if r.genus == 0][0].value == 1
    per_genus = build_F_coefficients(WeightSet([ONE]), {0: 5, 1: 2}, 1)
    assert max(len(r.key) for r in per_genus if r.genus == 1) <= 2


def test_cache_round_trip(tmp_path):
    cache = CorrelatorCache()
    build_F_coefficients(WeightSet([THIRD, THIRD + THIRD, ONE]), 3, 1, cache=cache)
    path = tmp_path / "c.jsonl"
    n = cache.save(path)
    assert n == len(cache) and path.read_text().count("\n") == n
    fresh = CorrelatorCache()
    assert fresh.load(path, mode="verify") == n
    assert fresh.items() == cache.items()
    cache.save(path)
    assert path.read_bytes() == path.read_bytes()


def test_cache_verify_detects_tampering(tmp_path):
    cache = CorrelatorCache()
    weighted_correlator([(0, THIRD)] * 3, cache=cache)
    path = tmp_path / "c.jsonl"
    cache.save(path)
    rec = json.loads(path.read_text())
    rec["val"] = "2/1"
    path.write_text(json.dumps(rec) + "\n")
    CorrelatorCache().load(path, mode="trust")  # trusted as-is
    with pytest.raises(CacheMismatch):
        CorrelatorCache().load(path, mode="verify")
    path.write_text('{"g": 0, "ins": [[0, "1/3"]], "val": "1"}\n')
    with pytest.raises(CacheFormatError):
        CorrelatorCache().load(path)


def test_cache_threads():
    cache = CorrelatorCache()
    keys = list(correlator_keys([HALF, ONE], 4, 1))

    def work():
        for key in keys:
            weighted_correlator(key, cache=cache)

    threads = [threading.Thread(target=work) for _ in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert len(cache) == len(keys)
    assert CACHE_ENV == "HASSETT_PSI_CACHE"

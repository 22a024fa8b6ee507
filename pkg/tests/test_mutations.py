"""Deliberately broken variants must be caught by the checks that guard them."""
import io
from fractions import Fraction

import oracles
import hassett_psi.combinatorics as combinatorics
import hassett_psi.hfunction as hfunction
from hassett_psi import cli
from hassett_psi.combinatorics import WeightedInsertion, admissible_partitions
from hassett_psi.kdv import BoldCoordinateMap, check_bracket_form, check_coordinate_maps, check_kdv_flow
from hassett_psi.series import Operator, TruncatedSeries
from hassett_psi.virasoro import (
    _annihilation_degrees,
    annihilation_residual,
    check_annihilation,
    check_bracket_relations,
    generating_series,
    L_restricted,
)
import hassett_psi.virasoro as virasoro
from hassett_psi.weights import ONE, WeightSum, parse_weight, parse_weight_set

HALF = parse_weight("1/2")


def test_tampered_correlator_breaks_annihilation():
    A = parse_weight_set("1/2,1")
    F = generating_series(A, _annihilation_degrees(4, 1))
    m = next(m for m in F.terms if len(m) == 3)
    bad = TruncatedSeries(dict(F.terms), F.max_degree)
    bad.terms[m] += Fraction(1, 7)
    assert all(check_annihilation(A, k, a, 4, 1, F=F).passed for k in (-1, 0) for a in A)
    assert not all(check_annihilation(A, k, a, 4, 1, F=bad).passed for k in (-1, 0) for a in A)


def test_plain_inclusion_exclusion_coefficients_fail():
    A = parse_weight_set("1/2,1")
    assert not check_annihilation(A, -1, HALF, 4, 1, coefficients="product").passed


def test_symbol_only_quadratic_substitution_fails():
    A = parse_weight_set("2/5,4/5")
    F = generating_series(A, _annihilation_degrees(4, 1))
    a = parse_weight("2/5")
    res = annihilation_residual(L_restricted(2, a, A, 4, 12, quadratic="symbol"), F, 2, 4, 1)
    assert any(res.values())
    res = annihilation_residual(L_restricted(2, a, A, 4, 12), F, 2, 4, 1)
    assert not any(res.values())


def test_literal_bracket_is_refuted():
    rep = check_bracket_relations(parse_weight_set("1/2,1"), 1, 3, literal=True)
    assert not rep.passed


def test_dropping_the_defect_is_caught(monkeypatch):
    monkeypatch.setattr(virasoro, "bracket_defect", lambda *a, **k: Operator())
    rep = check_bracket_relations(parse_weight_set("1/2,1"), 1, 3)
    failing = [r.name for r in rep.results if not r.passed]
    assert failing and all("-1" in name for name in failing)


def test_wrong_gd_prefactor_fails():
    A = parse_weight_set("1/2,1")
    assert not check_kdv_flow(A, 1, HALF, 3, 1, convention="literal").passed
    assert not check_bracket_form(A, 0, HALF, 3, 1, literal=True).passed


def test_closed_form_inverse_breaks_round_trip(monkeypatch):
    A = parse_weight_set("1/3,2/3,1")
    assert check_coordinate_maps(A, 3, 1).passed
    monkeypatch.setattr(BoldCoordinateMap, "inverse_of",
                        lambda self, k, b, degree=None: self.closed_form_inverse(k, b).truncate(
                            self.degree if degree is None else degree))
    assert not check_coordinate_maps(A, 3, 1).passed


def test_admissibility_off_by_infinitesimal_is_caught(monkeypatch):
    def sloppy(s: WeightSum) -> bool:
        return s.value <= 1  # forgets that 1 + 0+ exceeds 1

    monkeypatch.setattr(combinatorics, "admissible", sloppy)
    ws = [parse_weight("0+"), ONE]
    got = sum(1 for _ in admissible_partitions([WeightedInsertion(0, a) for a in ws]))
    assert got != oracles.admissible_partition_count([oracles.w("0+"), oracles.w("1")])


def test_h_off_by_one_fails_identity_suite(monkeypatch):
    real = hfunction.h_scalar
    monkeypatch.setattr(hfunction, "h_scalar", lambda k, e: real(k, e) + (1 if k == 2 else 0))
    hfunction._h_multi_sorted.cache_clear()
    out = io.StringIO()
    try:
        code = cli.main(["check", "identities", "--trials", "30"], out, io.StringIO())
    finally:
        hfunction._h_multi_sorted.cache_clear()
    assert code == 1
    assert "[FAIL] scalar bracket identity" in out.getvalue()

"""Acceptance criteria 1-9, exact arithmetic, tolerance zero.

Each test prints one ``[PASS]``/``[FAIL]`` line; the lines are collected in
``LINES`` and repeated in the pytest terminal summary.  Run the file
directly (``python3 tests/test_acceptance.py``) for the lines alone.
"""
from __future__ import annotations

import os
import random
import subprocess
import sys
from fractions import Fraction
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

import oracles  # noqa: E402
from hassett_psi.combinatorics import WeightedInsertion, admissible_partitions, power_classes  # noqa: E402
from hassett_psi.correlators import correlator_keys, unweighted_correlator, weighted_correlator  # noqa: E402
from hassett_psi.hfunction import (  # noqa: E402
    bracket_identity,
    h_multi,
    h_multi_via_classes,
    inductive_identity,
    scalar_bracket_identity,
)
from hassett_psi.kdv import (  # noqa: E402
    calibrate_gd_convention,
    check_bracket_form,
    check_coordinate_maps,
    check_initial_condition,
    check_kdv_flow,
    check_potential_identification,
    kdv_coefficient,
)
from hassett_psi.virasoro import (  # noqa: E402
    _annihilation_degrees,
    check_annihilation,
    check_bracket_relations,
    check_M_annihilation,
    generating_series,
)
from hassett_psi.weights import ONE, WeightSet, parse_weight, parse_weight_set  # noqa: E402

LINES: list[str] = []
SEED = 20240611


def record(n: int, passed: bool, text: str) -> None:
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {n}: {text}"
    LINES.append(line)
    print(line)
    assert passed, line


def _sets(*texts):
    return [parse_weight_set(t) for t in texts]


def test_criterion_1_worked_and_initial_values():
    third = parse_weight("1/3")
    bad = []
    if weighted_correlator([(0, third)] * 3) != 1:
        bad.append("<tau_{0;1/3}^3>")
    count = 1
    for A in _sets("1/2,1", "1/3,2/3,1", "0+,1", "0+", "2/5,4/5", "1/4,1/2,3/4,1"):
        for a in A:
            count += 1
            if weighted_correlator([(1, a)]) != Fraction(1, 24):
                bad.append(f"<tau_{{1;{a}}}>")
        for key in correlator_keys(list(A), 3, 0):
            count += 1
            if weighted_correlator(key) != 1:
                bad.append(str(key))
    record(1, not bad, f"<tau_0;1/3^3> = 1, <tau_1;a> = 1/24 and <tau_0;a1 tau_0;a2 tau_0;a3> = 1 "
                       f"over six weight sets ({count} values)" + (f"; mismatches {bad[:3]}" if bad else ""))


def test_criterion_2_classical_values_two_ways():
    one = WeightSet([ONE])
    # DVV path
    dvv = {"<tau0 tau2>_1": unweighted_correlator([0, 2]), "<tau1 tau1>_1": unweighted_correlator([1, 1]),
           "<tau4>_2": unweighted_correlator([4])}
    # KdV path: coefficients of U = d^2F/dt_0^2 from the initial condition and the flows alone,
    # then string (<tau_0 tau_{k+1} X> = <tau_k X> + ...) and dilaton (<tau_1 X>_g = (2g-2+n) <X>_g).
    kdv = {"<tau0 tau2>_1": kdv_coefficient([3]),      # <tau0 tau0 tau3>_1 = <tau0 tau2>_1
           "<tau1 tau1>_1": kdv_coefficient([3]),      # <tau1 tau1>_1 = <tau1>_1 = <tau0 tau2>_1
           "<tau4>_2": kdv_coefficient([6])}           # <tau0 tau0 tau6>_2 = <tau0 tau5>_2 = <tau4>_2
    expected = {"<tau0 tau2>_1": Fraction(1, 24), "<tau1 tau1>_1": Fraction(1, 24), "<tau4>_2": Fraction(1, 1152)}
    flows = [check_kdv_flow(one, i, ONE, 4, 2) for i in (1, 2)]
    ok = dvv == expected and kdv == expected and all(f.passed for f in flows)
    record(2, ok, "DVV " + ", ".join(f"{k}={v}" for k, v in dvv.items())
           + "; KdV reconstruction agrees; flows i=1,2 hold for the DVV potential (degree<=4, genus<=2)")


def test_criterion_3_mode_equivalence():
    total, bad = 0, []
    for A in _sets("1/2,1", "1/3,2/3,1"):
        for g in range(0, 3):
            for n in range(1, 6):
                for key in correlator_keys(list(A), n, g):
                    total += 1
                    if weighted_correlator(key, "partition") != weighted_correlator(key, "recursion"):
                        bad.append(key)
    record(3, not bad and total > 0, f"partition sum = recursion on {total} keys (n<=5, g<=2, A={{1/2,1}}, {{1/3,2/3,1}})")


def test_criterion_4_virasoro_annihilation():
    degree, genus = 5, 2
    results = []
    for A in _sets("1", "1/2,1", "0+,1", "2/5,4/5"):
        F = generating_series(A, _annihilation_degrees(degree, genus))
        for k in range(-1, 4):
            for a in A:
                results.append(check_annihilation(A, k, a, degree, genus, F=F))
                if ONE in A and a != ONE:
                    results.append(check_M_annihilation(A, k, a, degree, genus, F=F))
    failed = [r.line() for r in results if not r.passed]
    checked = sum(r.checked for r in results)
    record(4, not failed, f"{len(results)} operator checks, k in [-1,3], degree<={degree}, genus<={genus}, "
                          f"A = {{1}}, {{1/2,1}}, {{0+,1}}, {{2/5,4/5}}; {checked} coefficients"
                          + (f"; first failure {failed[0]}" if failed else ""))


def test_criterion_5_bracket_relations():
    A = parse_weight_set("1/2,1")
    corrected = check_bracket_relations(A, 2, 4)
    literal = check_bracket_relations(A, 2, 4, literal=True)
    refuted = next((r for r in literal.results if not r.passed), None)
    ok = corrected.passed and refuted is not None
    n_ok = sum(r.passed for r in corrected.results)
    record(5, ok, "(corrected form; the literal statement is false) "
                  f"{n_ok}/{len(corrected.results)} relations hold in the corrected form "
                  f"([L_k1;a1, L_k2;a2] = (k1+3/2) L_k1+k2;a1 - (k2+3/2) L_k1+k2;a2 + defect for k1=-1; "
                  f"[M,M]=0; [L_k, M_k';b] = -(k'+3/2) M_k+k';b); the literal form fails "
                  f"{sum(not r.passed for r in literal.results)} relations, e.g. "
                  + (refuted.name if refuted else "none"))


def test_criterion_6_h_identities():
    grid = [(k1, k2, e) for k1 in range(-1, 9) for k2 in range(-1, 9) for e in range(0, 9)]
    grid_ok = all(lhs == rhs for lhs, rhs in (scalar_bracket_identity(*c) for c in grid))
    rng = random.Random(SEED)
    labels = [ONE, parse_weight("1/2"), parse_weight("1/3"), parse_weight("0+")]
    trials, bad = 250, []
    for _ in range(trials):
        n = rng.randint(1, 4)
        e = [rng.randint(0, 6) for _ in range(n)]
        a = [rng.choice(labels) for _ in range(n)]
        k = rng.randint(-1, 6)
        k2 = rng.randint(max(-1, -1 - k), 6)
        if h_multi_via_classes(k, e, a) != h_multi(k, e):
            bad.append(("class", k, e))
        if len(set(bracket_identity(k, k2, e, a))) != 1:
            bad.append(("bracket", k, k2, e))
        if len(set(inductive_identity(k, rng.randint(0, 6), e))) != 1:
            bad.append(("inductive", k, e))
    record(6, grid_ok and not bad, f"scalar bracket identity on {len(grid)} grid points; class expansion, "
                                   f"multi-index bracket and inductive identities on {trials} seeded trials "
                                   f"(seed {SEED}, length<=4)")


def test_criterion_7_kdv():
    results, lines = [], []
    for A in _sets("1", "1/2,1", "2/5,4/5"):
        genus = 2 if A == WeightSet([ONE]) else 1
        results.extend(check_coordinate_maps(A, 5, 2).results)  # both orders + duality
        for b in A:
            results.append(check_kdv_flow(A, 1, b, 4, genus))
            results.append(check_kdv_flow(A, 2, b, 4, genus))
            results.append(check_bracket_form(A, 0, b, 4, genus))
            results.append(check_initial_condition(A, b, 4))
        results.extend(check_potential_identification(A, 4, 1).results)
    results.extend(check_potential_identification(parse_weight_set("0+"), 4, 1).results)
    selected, cal = calibrate_gd_convention()
    cal_text = cal.to_text()
    calibration_ok = (selected == "shifted" and sum(r.passed for r in cal.results) == 1
                      and "[PASS] convention shifted" in cal_text and "[FAIL] convention literal" in cal_text)
    failed = [r.line() for r in results if not r.passed]
    rejected = next(r for r in cal.results if not r.passed)
    lines.append(f"{len(results)} checks: maps invert to degree 5 (both orders), v-field duality, flows i=1,2, "
                 f"bracket form, initial condition, U^A = U^1 (incl. A={{0+}}) for A = {{1}}, {{1/2,1}}, {{2/5,4/5}}")
    lines.append(f"calibration selected '{selected}', rejected: {rejected.name} ({rejected.detail})")
    record(7, not failed and calibration_ok, "; ".join(lines) + (f"; first failure {failed[0]}" if failed else ""))


def test_criterion_8_combinatorial_baselines():
    cases = [(["1/2"] * 3, 4), (["1", "1"], 1), (["0+"] * 3, 5)]
    ok = True
    for ws, want in cases:
        ins = [WeightedInsertion(0, parse_weight(x)) for x in ws]
        got = sum(1 for _ in admissible_partitions(ins))
        brute = oracles.admissible_partition_count([oracles.w(x) for x in ws])
        ok &= got == brute == want
    rng = random.Random(SEED)
    for _ in range(200):
        items = [(rng.randint(0, 3), rng.choice("ab")) for _ in range(rng.randint(1, 7))]
        ok &= sum(c.multiplicity for c in power_classes(items)) == 2 ** len(items) - 1
    record(8, ok, "admissible partitions (1/2,1/2,1/2) -> 4, (1,1) -> 1, (0+,0+,0+) -> 5 equal brute force; "
                  "class multiplicities sum to 2^n - 1 on 200 seeded lists")


def _cli(args, hashseed):
    env = dict(os.environ, PYTHONHASHSEED=str(hashseed))
    env.pop("HASSETT_PSI_CACHE", None)
    return subprocess.run([sys.executable, "-m", "hassett_psi.cli", *args], capture_output=True, env=env, check=False)


def test_criterion_9_determinism():
    runs = {
        "table": ["table", "--weights", "1/3,2/3,1", "--max-n", "4", "--max-genus", "2", "--seed", "5"],
        "check all": ["check", "all", "--weights", "1/2,1", "--kmax", "1", "--degree", "3", "--flows", "1",
                      "--trials", "200", "--seed", "5"],
    }
    same = {}
    for name, args in runs.items():
        a, b = _cli(args, 1), _cli(args, 2)
        same[name] = a.returncode == b.returncode == 0 and a.stdout == b.stdout and len(a.stdout) > 0
    record(9, all(same.values()), "byte-identical stdout across two processes (different hash seeds) for "
                                  + ", ".join(f"{k} ({'same' if v else 'DIFFERENT'})" for k, v in same.items()))


if __name__ == "__main__":
    failures = 0
    for name, fn in list(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                failures += 1
    sys.exit(1 if failures else 0)

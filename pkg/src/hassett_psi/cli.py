"""Command-line front end: ``eval``, ``table`` and ``check``.

Exit codes: 0 success, 1 a check (or a verified cache record) failed,
2 usage, parse or I/O error.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import random
import re
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import __version__
from .combinatorics import admissible_partitions, all_set_partitions, power_classes
from .correlators import (
    CACHE_ENV,
    MODES,
    CacheFormatError,
    CacheMismatch,
    CorrelatorCache,
    build_F_coefficients,
    correlator_keys,
    format_key,
    genus_for,
    weighted_correlator,
)
from .hfunction import bracket_identity, h_multi, h_multi_via_classes, inductive_identity, scalar_bracket_identity
from .reports import CheckResult, Report
from .weights import ONE, WeightError, WeightSet, additive_closure, parse_weight, parse_weight_set, weight_sum, admissible

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
SUITES = ("virasoro", "commutators", "kdv", "identities", "all")
FORMATS = ("human", "json", "csv")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    weights: WeightSet
    max_n: int = 4
    max_genus: int = 1
    kmax: int = 2
    degree: int = 4
    flows: tuple[int, ...] = (1,)
    mode: str = "partition"
    cache_path: str | None = None
    cache_mode: str = "trust"
    fmt: str = "human"
    seed: int = 0
    trials: int = 200

    def validate(self) -> None:
        for name in ("max_n", "kmax", "degree", "trials"):
            if getattr(self, name) <= 0:
                raise UsageError(f"--{name.replace('_', '-')} must be positive")
        if self.max_genus < 0:
            raise UsageError("--max-genus must be >= 0")
        if not self.flows or any(i <= 0 for i in self.flows):
            raise UsageError("--flows must be positive integers")


def _fmt(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _weights(text: str, err) -> WeightSet:
    ws = parse_weight_set(text)
    closed = additive_closure(ws)
    if closed != ws:
        added = [str(w) for w in closed if w not in ws]
        print(f"warning: weight set {{{ws}}} is not additively closed; using {{{closed}}} (added {', '.join(added)})",
              file=err)
    return closed


_SPEC_RE = re.compile(r"\(\s*(-?\d+)\s*;\s*([^()]+?)\s*\)")


def parse_spec(spec: str) -> list[tuple[int, object]]:
    """``"(0;1/3)(2;1)"`` -> ``[(0, 1/3), (2, 1)]``."""
    s = spec.replace(" ", "")
    items, pos = [], 0
    for m in _SPEC_RE.finditer(s):
        if m.start() != pos:
            raise UsageError(f"cannot parse insertion list {spec!r} near position {pos}")
        k = int(m.group(1))
        if k < 0:
            raise UsageError(f"psi exponent must be >= 0, got {k}")
        items.append((k, parse_weight(m.group(2))))
        pos = m.end()
    if pos != len(s) or not items:
        raise UsageError(f"cannot parse insertion list {spec!r}; expected (k;w)(k;w)...")
    return items


def _open_cache(cfg: RunConfig) -> CorrelatorCache:
    cache = CorrelatorCache()
    if cfg.cache_path and os.path.exists(cfg.cache_path):
        cache.load(cfg.cache_path, mode=cfg.cache_mode)
    return cache


# ---------------------------------------------------------------------------
# eval / table

def cmd_eval(spec: str, cfg: RunConfig, out, err) -> int:
    items = parse_spec(spec)
    g = genus_for([k for k, _ in items])
    cache = _open_cache(cfg)
    if g is None:
        value, note = Fraction(0), "dimension mismatch: sum of exponents is not 3g-3+n for an integer g >= 0"
    else:
        value, note = weighted_correlator(items, mode=cfg.mode, cache=cache), ""
    if cfg.fmt == "json":
        out.write(json.dumps({"insertions": spec, "value": _fmt(value), "genus": g, "note": note,
                              "mode": cfg.mode, "seed": cfg.seed}, sort_keys=True) + "\n")
    else:
        out.write(f"{_fmt(value)} (genus {g})\n" if g is not None else f"{_fmt(value)} (no genus)\n")
        if note:
            print(f"note: {note}", file=err)
    if cfg.cache_path:
        cache.save(cfg.cache_path)
    return EXIT_OK


def cmd_table(cfg: RunConfig, out, err) -> int:
    cache = _open_cache(cfg)
    entries = build_F_coefficients(cfg.weights, cfg.max_n, cfg.max_genus, mode=cfg.mode, cache=cache)
    rows = [(e.genus, format_key(e.key), _fmt(e.value)) for e in entries]
    meta = {"weights": str(cfg.weights), "max_n": cfg.max_n, "max_genus": cfg.max_genus,
            "mode": cfg.mode, "seed": cfg.seed}
    if cfg.fmt == "json":
        out.write(json.dumps({"meta": meta, "rows": [{"genus": g, "insertions": i, "value": v} for g, i, v in rows]},
                             indent=2, sort_keys=True) + "\n")
    elif cfg.fmt == "csv":
        out.write("# " + " ".join(f"{k}={v}" for k, v in meta.items()) + "\n")
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["genus", "insertions", "value"])
        w.writerows(rows)
    else:
        out.write("# " + " ".join(f"{k}={v}" for k, v in meta.items()) + "\n")
        width = max([len("insertions")] + [len(i) for _, i, _ in rows])
        out.write(f"{'genus':>5}  {'insertions':<{width}}  value\n")
        for g, i, v in rows:
            out.write(f"{g:>5}  {i:<{width}}  {v}\n")
    if cfg.cache_path:
        cache.save(cfg.cache_path)
    return EXIT_OK


# ---------------------------------------------------------------------------
# check suites

def identity_report(cfg: RunConfig) -> Report:
    """h-identities, sublist classes, admissible partitions and mode equivalence."""
    rng = random.Random(cfg.seed)
    rep = Report(f"identities (seed {cfg.seed}, {cfg.trials} random trials)")

    def run(name, region, cases, sides):
        bad, n = None, 0
        for case in cases:
            lhs, rhs = sides(*case)
            n += 1
            if lhs != rhs and bad is None:
                bad = f"at {case}: {lhs} != {rhs}"
        rep.add(CheckResult(name, region, bad is None, n, bad or ""))

    grid = [(k1, k2, e) for k1 in range(-1, 9) for k2 in range(-1, 9) for e in range(0, 9)]
    run("scalar bracket identity for h", "k1,k2 in [-1,8], e in [0,8]", grid, scalar_bracket_identity)

    pool = [ONE] + [w for w in cfg.weights if w != ONE]

    def rand_list(lo=0):
        n = rng.randint(1, 4)
        return [rng.randint(lo, 6) for _ in range(n)], [rng.choice(pool) for _ in range(n)]

    cases = []
    for _ in range(cfg.trials):
        e, a = rand_list()
        k1 = rng.randint(-1, 6)
        cases.append((k1, rng.randint(max(-1, -1 - k1), 6), e, a))
    run("bracket identity for multi-index h", "random lists of length <= 4", cases, bracket_identity)

    cases = []
    for _ in range(cfg.trials):
        e, a = rand_list()
        cases.append((rng.randint(-1, 6), e, a))
    run("class expansion equals inclusion-exclusion", "random lists of length <= 4", cases,
        lambda k, e, a: (h_multi(k, e), h_multi_via_classes(k, e, a)))

    cases = []
    for _ in range(cfg.trials):
        e, _ = rand_list()
        cases.append((rng.randint(-1, 6), rng.randint(0, 6), e))
    run("inductive identity for h", "random c and lists of length <= 4", cases, inductive_identity)

    cases = []
    for _ in range(cfg.trials):
        e, a = rand_list()
        cases.append((tuple(zip(e, a)),))
    run("class multiplicities sum to 2^n - 1", "random lists of length <= 4", cases,
        lambda items: (sum(c.multiplicity for c in power_classes(items)), 2 ** len(items) - 1))

    def brute(ws):
        return sum(1 for p in all_set_partitions(len(ws))
                   if all(admissible(weight_sum(ws[i] for i in block)) for block in p))

    def pruned(ws):
        return sum(1 for _ in admissible_partitions([(0, w) for w in ws]))

    cases = []
    for _ in range(cfg.trials):
        n = rng.randint(1, 6)
        cases.append((tuple(rng.choice(list(cfg.weights) + [ONE]) for _ in range(n)),))
    run("admissible partitions: pruned enumeration = brute force", "random weight lists of length <= 6",
        cases, lambda ws: (pruned(ws), brute(ws)))

    keys = [key for g in range(2) for n in range(1, 5) for key in correlator_keys(list(cfg.weights), n, g)]
    run("partition sum = recursion", f"A={{{cfg.weights}}}, n<=4, g<=1", [(k,) for k in keys],
        lambda key: (weighted_correlator(key, "partition"), weighted_correlator(key, "recursion")))
    return rep


def virasoro_report(cfg: RunConfig) -> Report:
    from .virasoro import check_annihilation, check_M_annihilation, generating_series, _annihilation_degrees

    A = cfg.weights
    genus = max(cfg.max_genus, 0)
    rep = Report(f"Virasoro annihilation, A={{{A}}}, k in [-1,{cfg.kmax}], degree<={cfg.degree}, genus<={genus}")
    F = generating_series(A, _annihilation_degrees(cfg.degree, genus))
    for k in range(-1, cfg.kmax + 1):
        for a in A:
            rep.add(check_annihilation(A, k, a, cfg.degree, genus, F=F))
    if ONE in A:
        for k in range(-1, cfg.kmax + 1):
            for a in A:
                if a != ONE:
                    rep.add(check_M_annihilation(A, k, a, cfg.degree, genus, F=F))
    return rep


def commutator_report(cfg: RunConfig) -> Report:
    from .virasoro import check_bracket_relations

    return check_bracket_relations(cfg.weights, cfg.kmax, cfg.degree)


def kdv_report(cfg: RunConfig) -> Report:
    from .kdv import check_kdv

    return check_kdv(cfg.weights, cfg.flows, cfg.degree, max(cfg.max_genus, 0))


def cmd_check(suite: str, cfg: RunConfig, out, err) -> int:
    builders = {"virasoro": virasoro_report, "commutators": commutator_report,
                "kdv": kdv_report, "identities": identity_report}
    names = list(builders) if suite == "all" else [suite]
    reports = [builders[name](cfg) for name in names]
    ok = all(r.passed for r in reports)
    header = {"suite": suite, "weights": str(cfg.weights), "kmax": cfg.kmax, "degree": cfg.degree,
              "max_genus": cfg.max_genus, "flows": list(cfg.flows), "seed": cfg.seed, "trials": cfg.trials}
    if cfg.fmt == "json":
        out.write(json.dumps({"config": header, "passed": ok,
                              "reports": [json.loads(r.to_json()) for r in reports]}, indent=2, sort_keys=True) + "\n")
    elif cfg.fmt == "csv":
        out.write("# " + " ".join(f"{k}={v}" for k, v in header.items()) + "\n")
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["report", "check", "region", "passed", "checked", "detail"])
        for r in reports:
            for res in r.results:
                w.writerow([r.title, res.name, res.region, res.passed, res.checked, res.detail])
    else:
        out.write("# " + " ".join(f"{k}={v}" for k, v in header.items()) + "\n")
        for r in reports:
            out.write(r.to_text() + "\n")
        out.write(("PASS" if ok else "FAIL") + f": {suite}\n")
    return EXIT_OK if ok else EXIT_FAIL


# ---------------------------------------------------------------------------
# argument parsing

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--weights", default="1/2,1", help="comma-separated weights: 1, 0+ or p/q (default 1/2,1)")
    common.add_argument("--max-n", type=int, default=4, help="maximum number of insertions (table)")
    common.add_argument("--max-genus", type=int, default=1, help="maximum genus")
    common.add_argument("--kmax", type=int, default=2, help="largest operator index k")
    common.add_argument("--degree", type=int, default=4, help="series truncation degree for checks")
    common.add_argument("--flows", default="1", help="comma-separated KdV flow indices (default 1)")
    common.add_argument("--mode", choices=MODES, default="partition", help="correlator evaluation mode")
    common.add_argument("--cache", default=None, help=f"cache file (default: ${CACHE_ENV} if set)")
    common.add_argument("--cache-mode", choices=("trust", "verify"), default="trust")
    common.add_argument("--format", choices=FORMATS, default="human", dest="fmt")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized identity trials")
    common.add_argument("--trials", type=int, default=200, help="number of randomized identity trials")

    p = argparse.ArgumentParser(prog="hassett-psi", description="Weighted psi-class intersection numbers.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    e = sub.add_parser("eval", parents=[common], help="evaluate one correlator, e.g. '(0;1/3)(0;1/3)(0;1/3)'")
    e.add_argument("spec")
    sub.add_parser("table", parents=[common], help="list all nonzero correlators within bounds")
    c = sub.add_parser("check", parents=[common], help="run a verification suite")
    c.add_argument("suite", choices=SUITES)
    return p


def _config(ns: argparse.Namespace, err) -> RunConfig:
    try:
        flows = tuple(int(x) for x in ns.flows.split(",") if x.strip())
    except ValueError as exc:
        raise UsageError(f"bad --flows {ns.flows!r}") from exc
    cfg = RunConfig(
        weights=_weights(ns.weights, err),
        max_n=ns.max_n, max_genus=ns.max_genus, kmax=ns.kmax, degree=ns.degree, flows=flows,
        mode=ns.mode, cache_path=ns.cache or os.environ.get(CACHE_ENV) or None,
        cache_mode=ns.cache_mode, fmt=ns.fmt, seed=ns.seed, trials=ns.trials,
    )
    cfg.validate()
    return cfg


def main(argv: Sequence[str] | None = None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:  # argparse reports usage errors itself
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        cfg = _config(ns, err)
        if ns.command == "eval":
            return cmd_eval(ns.spec, cfg, out, err)
        if ns.command == "table":
            return cmd_table(cfg, out, err)
        return cmd_check(ns.suite, cfg, out, err)
    except (UsageError, WeightError) as exc:
        print(f"error: {exc}", file=err)
        return EXIT_USAGE
    except CacheFormatError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_USAGE
    except CacheMismatch as exc:
        print(f"error: {exc}", file=err)
        return EXIT_FAIL
    except OSError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_USAGE


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()

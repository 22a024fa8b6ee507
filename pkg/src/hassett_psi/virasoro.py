"""Virasoro-type operators for weighted generating functions and their checks.

Operators are materialized only as far as a truncation needs: terms whose
``t``-monomial has more than ``t_degree`` factors, or whose derivative
variable has index above ``k_bound``, are left out.  Every check states
the region on which it asserts equality.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

from .combinatorics import aut_order
from .correlators import build_F_coefficients
from .hfunction import h_multi, merge_coefficient, odd_double_factorial, operator_coefficient
from .series import Monomial, Operator, TruncatedSeries, Var, conjugated_action, mono_mul, mono_str
from .reports import CheckResult, Report
from .weights import ONE, Weight, WeightSet, WeightSum, admissible

__all__ = [
    "OperatorSpec",
    "FAMILIES",
    "build_operator",
    "classic_L",
    "M_operator",
    "L_weighted",
    "v_field",
    "L_restricted",
    "commutator",
    "bold_polynomial",
    "bracket_defect",
    "generating_series",
    "CheckResult",
    "Report",
    "check_bracket_relations",
    "check_annihilation",
    "check_M_annihilation",
    "check_vfield_duality",
    "monomial_genus",
]

log = logging.getLogger(__name__)

FAMILIES = ("classic-L", "M", "L-weighted", "v-field", "L-restricted")


def _df(m: int) -> Fraction:
    return odd_double_factorial(m)


# ---------------------------------------------------------------------------
# enumeration of the t-monomials t_{e;a} appearing in the operator sums

@lru_cache(maxsize=None)
def _index_multisets(weights: tuple[Weight, ...], n: int, e_total: int, offset: WeightSum | None) -> tuple:
    """Multisets of ``n`` pairs ``(e, a)`` with ``sum e = e_total`` and admissible ``offset + sum a``."""
    pairs = [(e, a) for e in range(e_total + 1) for a in weights]
    out = []

    def rec(start, left, remaining, acc, wsum):
        if left == 0:
            if remaining == 0:
                out.append(tuple(acc))
            return
        for i in range(start, len(pairs)):
            e, a = pairs[i]
            if e * left > remaining:
                break
            s = a if wsum is None else wsum + a
            if not admissible(s):
                continue
            acc.append(pairs[i])
            rec(i, left - 1, remaining - e, acc, s)
            acc.pop()

    rec(0, n, e_total, [], offset)
    return tuple(out)


def _wsum(ms, offset=None) -> Weight:
    s = offset
    for _, a in ms:
        s = a if s is None else s + a
    return s if isinstance(s, Weight) else s.to_weight()


def _t_of(ms) -> Monomial:
    return tuple(sorted(Var(e, a) for e, a in ms))


def _first_order_terms(weights, shift: int, t_degree: int, k_bound: int, offset: Weight | None = None
                       ) -> Iterator[tuple[tuple, int, Weight, Fraction]]:
    """Yield ``(ms, j, w, 1/#Aut)`` for the family ``sum 1/n! t_{e;a} d/dt_{j;w}``.

    ``j = |e| - n + shift`` and ``w = |a|`` (plus ``offset``).
    """
    ws = tuple(weights)
    for n in range(1, t_degree + 1):
        for j in range(0, k_bound + 1):
            e_total = j + n - shift
            if e_total < 0:
                continue
            for ms in _index_multisets(ws, n, e_total, offset):
                yield ms, j, _wsum(ms, offset), Fraction(1, aut_order(ms))


# ---------------------------------------------------------------------------
# operator families

@dataclass(frozen=True)
class OperatorSpec:
    """Which operator to build.

    ``family`` is one of ``classic-L``, ``M``, ``L-weighted``, ``v-field``,
    ``L-restricted``; ``k >= -1`` (``k >= 0`` for ``v-field``, where it is the
    index of the derivative); ``A`` is the active weight set.
    """

    family: str
    k: int
    A: WeightSet
    a: Weight | None = None

    def validate(self) -> None:
        if self.family not in FAMILIES:
            raise ValueError(f"unknown operator family {self.family!r}")
        lo = 0 if self.family == "v-field" else -1
        if self.k < lo:
            raise ValueError(f"{self.family} needs k >= {lo}, got {self.k}")
        if self.family == "L-restricted":
            if ONE in self.A:
                raise ValueError("L-restricted requires 1 not in A")
            if self.a not in self.A:
                raise ValueError(f"weight {self.a} is not in A = {{{self.A}}}")
        elif self.family in ("M", "L-weighted", "v-field"):
            if self.a is None or (self.a not in self.A and self.a != ONE):
                raise ValueError(f"weight {self.a} must lie in A or be 1")


def classic_L(k: int, A: Iterable[Weight], t_degree: int, k_bound: int, coefficients: str = "zero") -> Operator:
    """``L_k`` over the weight set ``A`` (which must contain 1).

    ``coefficients`` selects the multi-index structure constant:
    ``"zero"`` uses :func:`h_coefficient` (inclusion-exclusion terms with a
    negative effective index removed), ``"product"`` uses :func:`h_multi`.
    """
    A = WeightSet(A)
    if ONE not in A:
        raise ValueError("classic L_k is defined for weight sets containing 1")
    if k < -1:
        raise ValueError("k must be >= -1")
    hfun = operator_coefficient if coefficients == "zero" else h_multi
    op = Operator(t_degree_bound=t_degree)
    half = Fraction(1, 2)
    if k + 1 <= k_bound:
        op.add_term(-_df(k + 2) * half, (), (Var(k + 1, ONE),))
    for ms, j, w, inv_aut in _first_order_terms(A, 1 + k, t_degree, k_bound):
        es = [e for e, _ in ms]
        op.add_term(half * inv_aut * hfun(k, es), _t_of(ms), (Var(j, w),))
    if k == 0:
        op.add_term(Fraction(1, 16), (), ())
    elif k == -1:
        q = _bold_zero(A, t_degree)
        for m1, c1 in q.items():
            for m2, c2 in q.items():
                if len(m1) + len(m2) <= t_degree:
                    op.add_term(Fraction(1, 4) * c1 * c2, mono_mul(m1, m2), ())
    else:
        for r in range(k):
            s = k - 1 - r
            if max(r, s) <= k_bound:
                op.add_term(Fraction(1, 4) * _df(r + 1) * _df(s + 1), (), (Var(r, ONE), Var(s, ONE)))
    return op


def bold_polynomial(A: Iterable[Weight], k: int, b: Weight, degree: int) -> dict[Monomial, Fraction]:
    """The bold coordinate ``t_{k;b}`` as a polynomial in the ``t_{e;a}``.

    ``sum_m (-1)^(m-1)/m! sum t_{e;a}`` over ordered lists of length ``m``
    with ``|a| = b`` and ``|e| - m + 1 = k``; one term per multiset with
    coefficient ``(-1)^(m-1)/#Aut``.
    """
    out: dict[Monomial, Fraction] = {}
    ws = tuple(WeightSet(A))
    for n in range(1, degree + 1):
        for ms in _index_multisets(ws, n, k + n - 1, None):
            if _wsum(ms) == b:
                out[_t_of(ms)] = Fraction((-1) ** (n - 1), aut_order(ms))
    return out


def _bold_zero(A, t_degree) -> dict[Monomial, Fraction]:
    """``sum_b`` of the bold coordinates ``t_{0;b}`` (the quadratic term of ``L_{-1}`` is half its square)."""
    out: dict[Monomial, Fraction] = {}
    for b in WeightSet(A):
        out.update(bold_polynomial(A, 0, b, t_degree))
    return out


def M_operator(k: int, b: Weight, A: Iterable[Weight], t_degree: int, k_bound: int) -> Operator:
    """``M_{k;b}``; it vanishes identically for ``b = 1``."""
    A = WeightSet(A)
    scale = _df(k + 2) / 2
    op = Operator(t_degree_bound=t_degree)
    if k + 1 <= k_bound:
        op.add_term(-scale, (), (Var(k + 1, b),))
        op.add_term(scale, (), (Var(k + 1, ONE),))
    for ms, j, w, inv_aut in _first_order_terms(A, 1 + k, t_degree, k_bound, offset=b):
        op.add_term(-scale * inv_aut * merge_coefficient(k, [e for e, _ in ms]), _t_of(ms), (Var(j, w),))
    return op


def v_field(k: int, b: Weight, A: Iterable[Weight], t_degree: int, k_bound: int) -> Operator:
    """The vector field ``v_{k;b}``, the derivative along the bold coordinate ``t_{k;b}``.

    ``v_{k;1}`` is the plain partial derivative.
    """
    A = WeightSet(A)
    op = Operator(t_degree_bound=t_degree)
    if k <= k_bound:
        op.add_term(1, (), (Var(k, b),))
    for ms, j, w, inv_aut in _first_order_terms(A, k, t_degree, k_bound, offset=b):
        op.add_term(inv_aut * merge_coefficient(k - 1, [e for e, _ in ms]), _t_of(ms), (Var(j, w),))
    return op


def L_weighted(k: int, a: Weight, A: Iterable[Weight], t_degree: int, k_bound: int, coefficients: str = "zero") -> Operator:
    """``L_{k;a} = L_k + M_{k;a}``."""
    return classic_L(k, A, t_degree, k_bound, coefficients) + M_operator(k, a, A, t_degree, k_bound)


def L_restricted(k: int, a: Weight, A: Iterable[Weight], t_degree: int, k_bound: int,
                 coefficients: str = "zero", quadratic: str = "compose") -> Operator:
    """``L^A_{k;a}`` for a weight set without 1.

    Built from ``L_{k;a}`` over ``A + {1}``: every weight-1 derivative
    ``d/dt_m`` becomes ``v_{m;a}`` (a second-order term ``d_r d_s`` becomes
    the normal-ordered composite ``v_r v_s`` when ``quadratic="compose"``,
    or only its ``T T' d d'`` part when ``quadratic="symbol"``), and every
    term containing a weight-1 ``t`` is dropped.
    """
    A = WeightSet(A)
    if ONE in A:
        raise ValueError("L_restricted is for weight sets without 1")
    Abar = A.with_one()
    base = L_weighted(k, a, Abar, t_degree, k_bound, coefficients)
    vcache: dict[int, Operator] = {}

    def v(m):
        if m not in vcache:
            vcache[m] = v_field(m, a, Abar, t_degree, k_bound)
        return vcache[m]

    out = Operator(t_degree_bound=t_degree)
    for (T, D), c in base.terms.items():
        if any(x.a == ONE for x in T):
            continue
        ones = [x for x in D if x.a == ONE]
        if not ones:
            out.add_term(c, T, D)
            continue
        if len(D) == 1:
            piece = v(D[0].k)
        elif len(ones) == 2:
            if quadratic == "compose":
                piece = v(D[0].k).compose(v(D[1].k), t_degree)
            else:
                piece = Operator()
                for (T1, D1), c1 in v(D[0].k).terms.items():
                    for (T2, D2), c2 in v(D[1].k).terms.items():
                        piece.add_term(c1 * c2, mono_mul(T1, T2), D1 + D2)
        else:
            raise ValueError("mixed-weight second-order term has no substitution rule")
        for (T2, D2), c2 in piece.terms.items():
            if len(T) + len(T2) <= t_degree:
                out.add_term(c * c2, mono_mul(T, T2), D2)
    out = out.filter(lambda T, D: not any(x.a == ONE for x in T))
    stray = [D for _, D in out.terms if any(x.a == ONE for x in D)]
    if stray:
        raise ValueError(f"weight-1 derivatives survive restriction ({len(stray)} terms); is A additively closed?")
    return out


def build_operator(spec: OperatorSpec, degree_bound: int, k_bound: int, coefficients: str = "zero") -> Operator:
    """Materialize the operator named by ``spec`` up to the given bounds."""
    spec.validate()
    A = spec.A
    if spec.family == "classic-L":
        return classic_L(spec.k, A.with_one(), degree_bound, k_bound, coefficients)
    if spec.family == "M":
        return M_operator(spec.k, spec.a, A.with_one(), degree_bound, k_bound)
    if spec.family == "L-weighted":
        return L_weighted(spec.k, spec.a, A.with_one(), degree_bound, k_bound, coefficients)
    if spec.family == "v-field":
        return v_field(spec.k, spec.a, A, degree_bound, k_bound)
    return L_restricted(spec.k, spec.a, A, degree_bound, k_bound, coefficients)


def commutator(op1: Operator, op2: Operator, max_t_degree: int | None = None) -> Operator:
    return op1.commutator(op2, max_t_degree)


# ---------------------------------------------------------------------------
# generating functions and grading

def monomial_grade(m: Monomial) -> int:
    """``sum (k - 1)`` over the factors; ``F_g`` is homogeneous of grade ``3g - 3``."""
    return sum(v.k - 1 for v in m)


def monomial_genus(m: Monomial, shift: int = 0) -> Fraction:
    """Genus label ``(grade + shift + 3) / 3`` of an output monomial."""
    return Fraction(monomial_grade(m) + shift + 3, 3)


def generating_series(A: Iterable[Weight], degrees: dict[int, int], mode: str = "partition") -> TruncatedSeries:
    """``F`` restricted to genus ``g`` and at most ``degrees[g]`` insertions."""
    entries = build_F_coefficients(A, degrees, max(degrees), mode=mode)
    terms = {tuple(Var(k, a) for k, a in e.key): e.coefficient for e in entries}
    return TruncatedSeries(terms, max(degrees.values()))


# ---------------------------------------------------------------------------
# reports

def _first_nonzero(d: dict) -> str:
    m, c = sorted(((m, c) for m, c in d.items() if c), key=lambda kv: (len(kv[0]), kv[0]))[0]
    return f"first offending monomial {mono_str(m)} with coefficient {c}"


# ---------------------------------------------------------------------------
# annihilation

def _annihilation_degrees(degree: int, genus: int) -> dict[int, int]:
    return {g: degree + 1 + genus - g for g in range(genus + 1)}


def _max_index(F: TruncatedSeries) -> int:
    return max((v.k for v in F.variables()), default=0)


def annihilation_residual(op: Operator, F: TruncatedSeries, k: int, degree: int, genus: int) -> dict[Monomial, Fraction]:
    """Coefficients of ``exp(-F) op exp(F)`` on monomials of degree <= ``degree`` and genus label <= ``genus``."""
    out = conjugated_action(op, F, max_degree=degree)
    return {m: c for m, c in out.terms.items() if monomial_genus(m, k) <= genus}


def _region_size(weights: Sequence[Weight], degree: int, genus: int, k: int) -> int:
    """Number of monomials of degree <= ``degree`` with genus label <= ``genus``."""
    top = 3 * genus - 3 - k  # largest admissible grade
    if top + degree < -1:
        return 0
    vars_ = [Var(j, a) for j in range(top + degree + 2) for a in weights]
    count = 0

    def rec(start: int, n: int, grade: int) -> None:
        nonlocal count
        # grade can still drop by at most (degree - n), one per t_0 factor
        if grade - (degree - n) > top:
            return
        if grade <= top:
            count += 1
        if n == degree:
            return
        for i in range(start, len(vars_)):
            rec(i, n + 1, grade + vars_[i].k - 1)

    rec(0, 0, 0)
    return count


def check_annihilation(A: Iterable[Weight], k: int, a: Weight, degree: int, genus: int = 1,
                       F: TruncatedSeries | None = None, coefficients: str = "zero") -> CheckResult:
    """``exp(-F) L^A_{k;a} exp(F) = 0`` on monomials of degree <= ``degree`` and genus <= ``genus``.

    ``F`` is built with ``F_g`` up to ``degree + 1 + genus - g`` insertions,
    which is exactly what those coefficients depend on.
    """
    A = WeightSet(A)
    if F is None:
        F = generating_series(A, _annihilation_degrees(degree, genus))
    kb = _max_index(F)
    if ONE in A:
        op = L_weighted(k, a, A, degree, kb, coefficients)
        label = f"L[{k};{a}]"
        alphabet = list(A)
    else:
        alphabet = [b for b in A if b != ONE]
        op = L_restricted(k, a, A, degree, kb, coefficients)
        label = f"L^A[{k};{a}]"
    res = annihilation_residual(op, F, k, degree, genus)
    bad = {m: c for m, c in res.items() if c}
    return CheckResult(
        name=f"annihilation {label} on exp(F), A={{{A}}}",
        region=f"degree<={degree}, genus<={genus}",
        passed=not bad,
        checked=_region_size(alphabet, degree, genus, k),
        detail=_first_nonzero(bad) if bad else "",
    )


def check_M_annihilation(A: Iterable[Weight], k: int, a: Weight, degree: int, genus: int = 1,
                         F: TruncatedSeries | None = None) -> CheckResult:
    """``M_{k;a} F = 0`` for ``F`` over ``A + {1}`` (a first-order operator acts linearly)."""
    A = WeightSet(A).with_one()
    if F is None:
        F = generating_series(A, _annihilation_degrees(degree, genus))
    op = M_operator(k, a, A, degree, _max_index(F))
    res = annihilation_residual(op, F, k, degree, genus)
    bad = {m: c for m, c in res.items() if c}
    return CheckResult(
        name=f"M[{k};{a}] F = 0, A={{{A}}}",
        region=f"degree<={degree}, genus<={genus}",
        passed=not bad,
        checked=_region_size(list(A), degree, genus, k),
        detail=_first_nonzero(bad) if bad else "",
    )


# ---------------------------------------------------------------------------
# brackets on basis monomials

def basis_monomials(A: Sequence[Weight], degree: int, k_max: int) -> list[Monomial]:
    """All monomials of degree ``1..degree`` in ``t_{j;a}``, ``j <= k_max``."""
    vars_ = [Var(j, a) for j in range(k_max + 1) for a in A]
    out: list[Monomial] = [()]

    def rec(start, acc):
        if acc:
            out.append(tuple(acc))
        if len(acc) == degree:
            return
        for i in range(start, len(vars_)):
            acc.append(vars_[i])
            rec(i, acc)
            acc.pop()

    rec(0, [])
    return out


def _act(op: Operator, poly: dict[Monomial, Fraction], max_degree: int) -> dict[Monomial, Fraction]:
    out: dict[Monomial, Fraction] = {}
    for m, c in poly.items():
        for mm, cc in op.apply_to_monomial(m, max_degree).items():
            out[mm] = out.get(mm, 0) + c * cc
    return {m: c for m, c in out.items() if c}


def _bracket_on(op1: Operator, op2: Operator, m: Monomial, degree: int) -> dict[Monomial, Fraction]:
    x = _act(op1, _act(op2, {m: Fraction(1)}, degree + 2), degree)
    y = _act(op2, _act(op1, {m: Fraction(1)}, degree + 2), degree)
    for mm, c in y.items():
        x[mm] = x.get(mm, 0) - c
    return {mm: c for mm, c in x.items() if c}


def _compare_on_basis(name, lhs_pair, rhs: list[tuple[Fraction, Operator]], basis, degree) -> CheckResult:
    op1, op2 = lhs_pair
    for m in basis:
        diff = _bracket_on(op1, op2, m, degree)
        for c, op in rhs:
            for mm, cc in op.apply_to_monomial(m, degree).items():
                diff[mm] = diff.get(mm, 0) - c * cc
        diff = {mm: c for mm, c in diff.items() if c}
        if diff:
            return CheckResult(name, f"basis monomials of degree<={degree}", False, len(basis),
                               f"on {mono_str(m)}: " + _first_nonzero(diff))
    return CheckResult(name, f"basis monomials of degree<={degree}", True, len(basis))


def bracket_defect(k1: int, k2: int, A: Iterable[Weight], t_degree: int, k_bound: int,
                   M: dict | None = None) -> Operator:
    """The term ``[L_{k1}, L_{k2}] - (k1 - k2) L_{k1+k2}``.

    It vanishes except for ``{k1, k2} = {-1, k}`` with ``k >= 1``, where
    ``[L_{-1}, L_k] + (k + 1) L_{k-1} = -1/2 sum_{b != 1} bold_t_{0;b} M_{k-2;b}``.
    This is a left multiple of the ``M`` operators, so it annihilates
    ``exp(F)`` without vanishing as an operator.
    """
    A = WeightSet(A)
    if k1 == k2 or -1 not in (k1, k2) or max(k1, k2) < 1:
        return Operator(t_degree_bound=t_degree)
    k = max(k1, k2)
    out = Operator(t_degree_bound=t_degree)
    for b in A:
        if b == ONE:
            continue
        mult = Operator({(m, ()): c for m, c in bold_polynomial(A, 0, b, t_degree).items()})
        Mop = M[(k - 2, b)] if M is not None else M_operator(k - 2, b, A, t_degree, k_bound)
        out = out + mult.compose(Mop, t_degree).scale(Fraction(-1, 2))
    return out if k1 == -1 else -out


def check_bracket_relations(A: Iterable[Weight], k_max: int, degree: int, basis_k: int | None = None,
                            literal: bool = False) -> Report:
    """Bracket relations with ``c = 3/2``, applied to every basis monomial.

    Checked relations::

        [L_k1, L_k2]           = (k1 - k2) L_{k1+k2} + defect(k1, k2)
        [L_k1, M_{k2;b}]       = -(k2 + 3/2) M_{k1+k2;b}
        [M_{k1;a1}, M_{k2;a2}] = 0
        [L_{k1;a1}, L_{k2;a2}] = (k1 + 3/2) L_{k1+k2;a1} - (k2 + 3/2) L_{k1+k2;a2} + defect(k1, k2)

    ``defect`` is :func:`bracket_defect`.  With ``literal=True`` the first
    and last relations are checked without the defect and, in the last,
    with ``a1`` and ``a2`` exchanged on the right-hand side; those variants
    fail for weight sets other than ``{1}`` and are reported as such.

    Basis monomials have degree <= ``degree`` and indices <= ``basis_k``
    (default ``k_max + 1``).  Operators are materialized to ``t``-degree
    ``degree + 2`` and to a derivative index that covers every intermediate
    monomial, so the comparison is exact on the whole basis.
    """
    A = WeightSet(A).with_one()
    bk = k_max + 1 if basis_k is None else basis_k
    tdeg = degree + 2
    kb = bk + tdeg + 2 * k_max + 2
    c = Fraction(3, 2)
    ks_all = range(-1, 2 * k_max + 1)
    L = {k: classic_L(k, A, tdeg, kb) for k in ks_all}
    M = {(k, a): M_operator(k, a, A, tdeg, kb) for k in ks_all for a in A}
    LW = {(k, a): L[k] + M[(k, a)] for (k, a) in M}
    basis = basis_monomials(list(A), degree, bk)
    title = "bracket relations" + (" (literal form)" if literal else "")
    rep = Report(f"{title}, A={{{A}}}, k<={k_max}, degree<={degree}, c=3/2")
    rep.notes.append(f"basis: {len(basis)} monomials of degree <= {degree} with indices <= {bk}")
    rep.notes.append("pairs with k1 + k2 < -1 are skipped (no operator of index -2)")
    ks = range(-1, k_max + 1)
    defects: dict[tuple[int, int], Operator] = {}

    def defect(k1, k2):
        if literal:
            return Operator()
        if (k1, k2) not in defects:
            defects[(k1, k2)] = bracket_defect(k1, k2, A, tdeg, kb, M)
        return defects[(k1, k2)]

    for k1 in ks:
        for k2 in ks:
            if k1 + k2 < -1:
                continue
            if k1 < k2:
                rhs = [(Fraction(k1 - k2), L[k1 + k2])]
                if defect(k1, k2).terms:
                    rhs.append((Fraction(1), defect(k1, k2)))
                rep.add(_compare_on_basis(f"[L_{k1}, L_{k2}] = ({k1 - k2}) L_{k1 + k2}"
                                          + ("" if literal or not defect(k1, k2).terms else " + defect"),
                                          (L[k1], L[k2]), rhs, basis, degree))
            for b in A:
                rep.add(_compare_on_basis(f"[L_{k1}, M_{k2};{b}] = -({k2}+3/2) M_{k1 + k2};{b}", (L[k1], M[(k2, b)]),
                                          [(-(k2 + c), M[(k1 + k2, b)])], basis, degree))
            for a1 in A:
                for a2 in A:
                    if (k1, a1) < (k2, a2):
                        rep.add(_compare_on_basis(f"[M_{k1};{a1}, M_{k2};{a2}] = 0", (M[(k1, a1)], M[(k2, a2)]),
                                                  [], basis, degree))
                    if (k1, a1) == (k2, a2):
                        continue
                    first, second = (a2, a1) if literal else (a1, a2)
                    rhs = [(k1 + c, LW[(k1 + k2, first)]), (-(k2 + c), LW[(k1 + k2, second)])]
                    if defect(k1, k2).terms:
                        rhs.append((Fraction(1), defect(k1, k2)))
                    rep.add(_compare_on_basis(
                        f"[L_{k1};{a1}, L_{k2};{a2}] = ({k1}+3/2) L_{k1 + k2};{first} - ({k2}+3/2) L_{k1 + k2};{second}"
                        + ("" if literal or not defect(k1, k2).terms else " + defect"),
                        (LW[(k1, a1)], LW[(k2, a2)]), rhs, basis, degree))
    return rep


# ---------------------------------------------------------------------------
# v-fields

def check_vfield_duality(A: Iterable[Weight], k_max: int, degree: int) -> Report:
    """``[v_{k;b}, v_{k';b}] = 0`` on basis monomials and ``v_{k1;b1}(bold t_{k2;b2}) = delta``."""
    from .kdv import bold_coordinates

    A = WeightSet(A)
    rep = Report(f"v-field duality, A={{{A}}}, k<={k_max}, degree<={degree}")
    tdeg = degree + 2
    kb = k_max + 1 + tdeg
    basis = basis_monomials(list(A), degree, k_max + 1)
    for b in A:
        vs = {k: v_field(k, b, A, tdeg, kb) for k in range(k_max + 1)}
        for k1 in range(k_max + 1):
            for k2 in range(k1 + 1, k_max + 1):
                rep.add(_compare_on_basis(f"[v_{k1};{b}, v_{k2};{b}] = 0", (vs[k1], vs[k2]), [], basis, degree))
    bold = bold_coordinates(A, degree, k_max)
    for b1 in A:
        vs = {k: v_field(k, b1, A, degree, k_max + degree) for k in range(k_max + 1)}
        for k1 in range(k_max + 1):
            bad = []
            count = 0
            for (k2, b2), poly in bold.forward.items():
                got = _act(vs[k1], poly.terms, degree - 1)
                want = {(): Fraction(1)} if (k1, b1) == (k2, b2) else {}
                got = {m: c for m, c in got.items() if len(m) <= degree - 1}
                count += 1
                if got != want:
                    bad.append(f"v_{k1};{b1}(bold t_{k2};{b2}) = {got}")
            rep.add(CheckResult(f"v_{k1};{b1} dual to bold coordinates", f"degree<={degree - 1}",
                                not bad, count, bad[0] if bad else ""))
    return rep

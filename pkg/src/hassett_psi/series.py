"""Truncated multivariate series in the variables ``t_{k;a}`` and differential operators acting on them.

A monomial is a sorted tuple of :class:`Var`; the degree of a monomial is its
length.  Operators are sums of normal-ordered terms
``coef * T * d/dt_{u_1} ... d/dt_{u_r}``.
"""
from __future__ import annotations

from collections import defaultdict
from fractions import Fraction
from typing import Callable, Iterable, Mapping, NamedTuple

from .weights import Weight

__all__ = [
    "Var",
    "Monomial",
    "TruncatedSeries",
    "Operator",
    "series_add",
    "series_mul",
    "series_scale",
    "exp_truncated",
    "apply_operator",
    "conjugated_action",
    "differentiate_monomial",
]


class Var(NamedTuple):
    """The formal variable ``t_{k;a}``."""

    k: int
    a: Weight

    def __str__(self):
        return f"t[{self.k};{self.a}]"


Monomial = tuple  # sorted tuple of Var

Number = Fraction | int


def mono_mul(m1: Monomial, m2: Monomial) -> Monomial:
    if not m1:
        return m2
    if not m2:
        return m1
    return tuple(sorted(m1 + m2))


def mono_str(m: Monomial) -> str:
    if not m:
        return "1"
    parts = []
    i = 0
    while i < len(m):
        j = i
        while j < len(m) and m[j] == m[i]:
            j += 1
        parts.append(str(m[i]) + (f"^{j - i}" if j - i > 1 else ""))
        i = j
    return "*".join(parts)


def differentiate_monomial(m: Monomial, u: Var) -> tuple[int, Monomial]:
    """``d/du`` of a monomial as ``(multiplicity, monomial)``; multiplicity 0 if ``u`` is absent."""
    c = m.count(u)
    if not c:
        return 0, ()
    i = m.index(u)
    return c, m[:i] + m[i + 1:]


def _diff_multi(m: Monomial, ds: Iterable[Var]) -> tuple[int, Monomial]:
    coef = 1
    for u in ds:
        c, m = differentiate_monomial(m, u)
        if not c:
            return 0, ()
        coef *= c
    return coef, m


def _sub_multisets(m: Monomial, max_size: int) -> list[tuple[Var, ...]]:
    """Distinct sorted sub-multisets of ``m`` with at most ``max_size`` elements (including ``()``)."""
    counts: list[tuple[Var, int]] = []
    for v in m:
        if counts and counts[-1][0] == v:
            counts[-1] = (v, counts[-1][1] + 1)
        else:
            counts.append((v, 1))
    out: list[tuple[Var, ...]] = [()]
    for v, c in counts:
        out = [s + (v,) * j for s in out for j in range(c + 1) if len(s) + j <= max_size]
    return out


class TruncatedSeries:
    """Sparse polynomial with rational coefficients, truncated at ``max_degree``.

    Zero coefficients and monomials above the bound are never stored.
    Binary operations take the smaller of the two bounds.
    """

    __slots__ = ("terms", "max_degree")

    def __init__(self, terms: Mapping[Monomial, Number] | None = None, max_degree: int = 0):
        self.max_degree = max_degree
        clean: dict[Monomial, Fraction] = {}
        if terms:
            for m, c in terms.items():
                if c and len(m) <= max_degree:
                    m = tuple(sorted(m))
                    v = clean.get(m, 0) + Fraction(c)
                    if v:
                        clean[m] = v
                    else:
                        clean.pop(m, None)
        self.terms = clean

    @classmethod
    def _raw(cls, terms: dict, max_degree: int) -> "TruncatedSeries":
        out = cls.__new__(cls)
        out.terms = terms
        out.max_degree = max_degree
        return out

    @classmethod
    def zero(cls, max_degree: int) -> "TruncatedSeries":
        return cls._raw({}, max_degree)

    @classmethod
    def constant(cls, c: Number, max_degree: int) -> "TruncatedSeries":
        return cls({(): c}, max_degree)

    @classmethod
    def variable(cls, v: Var, max_degree: int) -> "TruncatedSeries":
        return cls({(v,): 1}, max_degree)

    def copy(self) -> "TruncatedSeries":
        return TruncatedSeries._raw(dict(self.terms), self.max_degree)

    def coefficient(self, m: Monomial) -> Fraction:
        return self.terms.get(tuple(sorted(m)), Fraction(0))

    def __len__(self):
        return len(self.terms)

    def __bool__(self):
        return bool(self.terms)

    def items(self) -> list[tuple[Monomial, Fraction]]:
        """Terms in deterministic order (by degree, then monomial)."""
        return sorted(self.terms.items(), key=lambda kv: (len(kv[0]), kv[0]))

    def variables(self) -> set[Var]:
        return {v for m in self.terms for v in m}

    def truncate(self, d: int) -> "TruncatedSeries":
        d = min(d, self.max_degree)
        return TruncatedSeries._raw({m: c for m, c in self.terms.items() if len(m) <= d}, d)

    def filter(self, keep: Callable[[Monomial], bool]) -> "TruncatedSeries":
        return TruncatedSeries._raw({m: c for m, c in self.terms.items() if keep(m)}, self.max_degree)

    def __add__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        d = min(self.max_degree, other.max_degree)
        out = {m: c for m, c in self.terms.items() if len(m) <= d}
        for m, c in other.terms.items():
            if len(m) <= d:
                v = out.get(m, 0) + c
                if v:
                    out[m] = v
                else:
                    out.pop(m, None)
        return TruncatedSeries._raw(out, d)

    def __neg__(self) -> "TruncatedSeries":
        return TruncatedSeries._raw({m: -c for m, c in self.terms.items()}, self.max_degree)

    def __sub__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        return self + (-other)

    def scale(self, c: Number) -> "TruncatedSeries":
        if not c:
            return TruncatedSeries.zero(self.max_degree)
        return TruncatedSeries._raw({m: v * c for m, v in self.terms.items()}, self.max_degree)

    def __rmul__(self, c: Number) -> "TruncatedSeries":
        return self.scale(c)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return self.mul(other)

    def mul(self, other: "TruncatedSeries", max_degree: int | None = None) -> "TruncatedSeries":
        d = min(self.max_degree, other.max_degree)
        if max_degree is not None:
            d = min(d, max_degree)
        out: dict[Monomial, Fraction] = defaultdict(Fraction)
        by_deg = defaultdict(list)
        for m, c in other.terms.items():
            by_deg[len(m)].append((m, c))
        for m1, c1 in self.terms.items():
            room = d - len(m1)
            for dg, lst in by_deg.items():
                if dg > room:
                    continue
                for m2, c2 in lst:
                    out[mono_mul(m1, m2)] += c1 * c2
        return TruncatedSeries._raw({m: c for m, c in out.items() if c}, d)

    def derivative(self, u: Var) -> "TruncatedSeries":
        out = {}
        for m, c in self.terms.items():
            k, rest = differentiate_monomial(m, u)
            if k:
                out[rest] = out.get(rest, 0) + c * k
        return TruncatedSeries._raw(out, max(self.max_degree - 1, 0))

    def substitute(self, mapping: Mapping[Var, "TruncatedSeries"], max_degree: int) -> "TruncatedSeries":
        """Replace each variable by a series (variables not in ``mapping`` are kept)."""
        cache: dict[tuple[Var, int], TruncatedSeries] = {}

        def power(v, e):
            key = (v, e)
            if key not in cache:
                base = mapping[v] if v in mapping else TruncatedSeries.variable(v, max_degree)
                base = base.truncate(max_degree)
                cache[key] = base if e == 1 else power(v, e - 1).mul(base, max_degree)
            return cache[key]

        total = TruncatedSeries.zero(max_degree)
        acc: dict[Monomial, Fraction] = defaultdict(Fraction)
        for m, c in self.terms.items():
            piece = TruncatedSeries.constant(c, max_degree)
            i = 0
            while i < len(m):
                j = i
                while j < len(m) and m[j] == m[i]:
                    j += 1
                piece = piece.mul(power(m[i], j - i), max_degree)
                i = j
            for mm, cc in piece.terms.items():
                acc[mm] += cc
        total.terms = {m: c for m, c in acc.items() if c}
        return total

    def __eq__(self, other):
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return self.max_degree == other.max_degree and self.terms == other.terms

    def __hash__(self):
        return hash((self.max_degree, frozenset(self.terms.items())))

    def __str__(self):
        if not self.terms:
            return "0"
        return " + ".join(f"({c})*{mono_str(m)}" for m, c in self.items())

    def __repr__(self):
        return f"TruncatedSeries(<{len(self.terms)} terms>, max_degree={self.max_degree})"


def series_add(s: TruncatedSeries, t: TruncatedSeries) -> TruncatedSeries:
    return s + t


def series_mul(s: TruncatedSeries, t: TruncatedSeries) -> TruncatedSeries:
    return s.mul(t)


def series_scale(s: TruncatedSeries, c: Number) -> TruncatedSeries:
    return s.scale(c)


def exp_truncated(s: TruncatedSeries) -> TruncatedSeries:
    """``sum_{m <= max_degree} s^m / m!``; ``s`` must have no constant term."""
    if s.terms.get(()):
        raise ValueError("exp_truncated needs a series without constant term")
    d = s.max_degree
    total = TruncatedSeries.constant(1, d)
    power = TruncatedSeries.constant(1, d)
    for m in range(1, d + 1):
        power = power.mul(s).scale(Fraction(1, m))
        if not power:
            break
        total = total + power
    return total


Term = tuple[Monomial, tuple[Var, ...]]


class Operator:
    """A finite sum of normal-ordered terms ``coef * T * d^D``.

    ``terms`` maps ``(T, D)`` (both sorted tuples of :class:`Var`) to a
    nonzero rational.  ``t_degree_bound`` records how far an infinite family
    was materialized: terms with ``len(T)`` above it were omitted, so
    outputs are only trustworthy up to that degree.
    """

    __slots__ = ("terms", "t_degree_bound", "_by_D", "_cache")

    def __init__(self, terms: Mapping[Term, Number] | Iterable[tuple[Number, Monomial, Iterable[Var]]] = (),
                 t_degree_bound: int | None = None):
        self.terms: dict[Term, Fraction] = {}
        self.t_degree_bound = t_degree_bound
        self._by_D = None
        self._cache: dict = {}
        items = terms.items() if isinstance(terms, Mapping) else (((T, D), c) for c, T, D in terms)
        for (T, D), c in items:
            self.add_term(c, T, D)

    def add_term(self, c: Number, T: Iterable[Var], D: Iterable[Var]) -> None:
        if not c:
            return
        self._by_D = None
        self._cache = {}
        key = (tuple(sorted(T)), tuple(sorted(D)))
        v = self.terms.get(key, 0) + Fraction(c)
        if v:
            self.terms[key] = v
        else:
            self.terms.pop(key, None)

    def items(self) -> list[tuple[Term, Fraction]]:
        return sorted(self.terms.items(), key=lambda kv: (len(kv[0][1]), len(kv[0][0]), kv[0]))

    def coefficient(self, T: Iterable[Var], D: Iterable[Var]) -> Fraction:
        return self.terms.get((tuple(sorted(T)), tuple(sorted(D))), Fraction(0))

    @property
    def order(self) -> int:
        return max((len(D) for _, D in self.terms), default=0)

    @property
    def max_degree_drop(self) -> int:
        """Largest ``len(D) - len(T)`` over the terms (how much headroom one application uses)."""
        return max((len(D) - len(T) for T, D in self.terms), default=0)

    def _bound_with(self, other: "Operator") -> int | None:
        bs = [b for b in (self.t_degree_bound, other.t_degree_bound) if b is not None]
        return min(bs) if bs else None

    def __add__(self, other: "Operator") -> "Operator":
        out = Operator(self.terms, self._bound_with(other))
        for (T, D), c in other.terms.items():
            out.add_term(c, T, D)
        return out

    def scale(self, c: Number) -> "Operator":
        return Operator({k: v * c for k, v in self.terms.items()}, self.t_degree_bound)

    def __neg__(self) -> "Operator":
        return self.scale(-1)

    def __sub__(self, other: "Operator") -> "Operator":
        return self + (-other)

    def __rmul__(self, c: Number) -> "Operator":
        return self.scale(c)

    def filter(self, keep: Callable[[Monomial, tuple[Var, ...]], bool]) -> "Operator":
        return Operator({k: v for k, v in self.terms.items() if keep(*k)}, self.t_degree_bound)

    def compose(self, other: "Operator", max_t_degree: int | None = None) -> "Operator":
        """Normal-ordered product ``self o other`` (Leibniz rule on the inner ``T``)."""
        out = Operator(t_degree_bound=self._bound_with(other))
        for (T1, D1), c1 in self.terms.items():
            n1 = len(D1)
            for (T2, D2), c2 in other.terms.items():
                for mask in range(1 << n1):
                    hit = [D1[i] for i in range(n1) if mask >> i & 1]
                    keep = [D1[i] for i in range(n1) if not mask >> i & 1]
                    mult, rest = _diff_multi(T2, hit)
                    if not mult:
                        continue
                    T = mono_mul(T1, rest)
                    if max_t_degree is not None and len(T) > max_t_degree:
                        continue
                    out.add_term(c1 * c2 * mult, T, keep + list(D2))
        return out

    def commutator(self, other: "Operator", max_t_degree: int | None = None) -> "Operator":
        return self.compose(other, max_t_degree) - other.compose(self, max_t_degree)

    def _index(self) -> dict[tuple[Var, ...], list[tuple[Monomial, Fraction]]]:
        if self._by_D is None:
            by_D: dict[tuple[Var, ...], list[tuple[Monomial, Fraction]]] = defaultdict(list)
            for (T, D), c in self.terms.items():
                by_D[D].append((T, c))
            self._by_D = dict(by_D)
        return self._by_D

    def apply_to_monomial(self, m: Monomial, max_degree: int) -> dict[Monomial, Fraction]:
        """Action on one monomial, keeping output monomials of degree <= ``max_degree``.

        Results are memoized per monomial.
        """
        key = (m, max_degree)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        by_D = self._index()
        out: dict[Monomial, Fraction] = defaultdict(Fraction)
        for D in _sub_multisets(m, max(map(len, by_D), default=0)):
            lst = by_D.get(D)
            if not lst:
                continue
            mult, rest = _diff_multi(m, D)
            room = max_degree - len(rest)
            for T, c in lst:
                if len(T) <= room:
                    out[mono_mul(T, rest)] += c * mult
        result = {mm: c for mm, c in out.items() if c}
        self._cache[key] = result
        return result

    def __eq__(self, other):
        if not isinstance(other, Operator):
            return NotImplemented
        return self.terms == other.terms

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for (T, D), c in self.items():
            d = "".join(f"d/d{v}" for v in D)
            parts.append(f"({c})*{mono_str(T)}" + (f"*{d}" if d else ""))
        return " + ".join(parts)

    def __repr__(self):
        return f"Operator(<{len(self.terms)} terms>, t_degree_bound={self.t_degree_bound})"


def apply_operator(op: Operator, s: TruncatedSeries) -> tuple[TruncatedSeries, int]:
    """Apply ``op`` to ``s``; returns the result and the degree up to which it is exact."""
    valid = s.max_degree - max(op.max_degree_drop, 0)
    if op.t_degree_bound is not None:
        valid = min(valid, op.t_degree_bound)
    valid = max(valid, 0)
    out: dict[Monomial, Fraction] = defaultdict(Fraction)
    for m, c in s.terms.items():
        for mm, cc in op.apply_to_monomial(m, valid).items():
            out[mm] += c * cc
    return TruncatedSeries({m: c for m, c in out.items() if c}, valid), valid


def conjugated_action(op: Operator, F: TruncatedSeries, max_degree: int | None = None) -> TruncatedSeries:
    """``exp(-F) * op(exp(F))`` for an operator of order at most 2.

    Computed from derivatives of ``F`` only: a term ``c T d_u d_v``
    contributes ``c T (F_u F_v + F_uv)``, a term ``c T d_u`` contributes
    ``c T F_u`` and ``c T`` contributes itself.
    """
    if F.terms.get(()):
        raise ValueError("F must have no constant term")
    if op.order > 2:
        raise ValueError("conjugated_action supports operators of order <= 2")
    d = F.max_degree - 1 if max_degree is None else max_degree
    if op.t_degree_bound is not None:
        d = min(d, op.t_degree_bound)
    first: dict[Var, TruncatedSeries] = {}

    def F_u(u):
        if u not in first:
            first[u] = F.derivative(u)
        return first[u]

    out: dict[Monomial, Fraction] = defaultdict(Fraction)

    def add(T, c, series: TruncatedSeries):
        room = d - len(T)
        for m, v in series.terms.items():
            if len(m) <= room:
                out[mono_mul(T, m)] += c * v

    # group by derivative part so each F-derivative product is formed once
    by_D: dict[tuple[Var, ...], list[tuple[Monomial, Fraction]]] = defaultdict(list)
    for (T, D), c in op.terms.items():
        if len(T) <= d:
            by_D[D].append((T, c))
    for D, lst in by_D.items():
        if not D:
            for T, c in lst:
                out[T] += c
            continue
        room = d - min(len(T) for T, _ in lst)
        if len(D) == 1:
            piece = F_u(D[0]).truncate(room)
        else:
            u, v = D
            piece = F_u(u).mul(F_u(v), room)
            # F_uv is added without re-truncating to its own (smaller) bound;
            # callers choose max_degree so that the needed terms of F exist
            for m, c in F_u(u).derivative(v).terms.items():
                if len(m) <= room:
                    piece.terms[m] = piece.terms.get(m, 0) + c
        if not piece:
            continue
        for T, c in lst:
            add(T, c, piece)
    return TruncatedSeries({m: c for m, c in out.items() if c}, d)

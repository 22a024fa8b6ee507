"""Hassett weights in ``[0+, 1]`` with exact arithmetic.

A weight is a rational number together with an "infinitesimal" flag; the
flag records an added ``0+``.  Sums of weights may leave ``[0+, 1]`` and are
only ever compared against 1, which is what :func:`admissible` does.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering
from typing import Iterable

__all__ = [
    "WeightSum",
    "Weight",
    "WeightSet",
    "WeightError",
    "ONE",
    "ZERO_PLUS",
    "parse_weight",
    "parse_weight_set",
    "weight_sum",
    "admissible",
    "additive_closure",
]


class WeightError(ValueError):
    """Raised for malformed or illegal weights."""


@total_ordering
@dataclass(frozen=True, eq=False)
class WeightSum:
    """A nonnegative rational plus an optional infinitesimal ``0+``."""

    value: Fraction
    infinitesimal: bool = False

    def __post_init__(self):
        if not isinstance(self.value, Fraction):
            object.__setattr__(self, "value", Fraction(self.value))
        if self.value < 0:
            raise WeightError(f"negative weight value {self.value}")
        # weights are hashed constantly inside monomials; hash once
        object.__setattr__(self, "_hash", hash((self.value, self.infinitesimal)))

    def key(self) -> tuple[Fraction, bool]:
        return (self.value, self.infinitesimal)

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, WeightSum):
            return NotImplemented
        return self.value == other.value and self.infinitesimal == other.infinitesimal

    def __hash__(self):
        return self._hash

    def __lt__(self, other):
        if not isinstance(other, WeightSum):
            return NotImplemented
        return self.key() < other.key()

    def __add__(self, other: "WeightSum") -> "WeightSum":
        if not isinstance(other, WeightSum):
            return NotImplemented
        return WeightSum(self.value + other.value, self.infinitesimal or other.infinitesimal)

    @property
    def is_admissible(self) -> bool:
        return admissible(self)

    def to_weight(self) -> "Weight":
        """Convert an admissible sum into a marked-point weight."""
        if not admissible(self):
            raise WeightError(f"{self} exceeds 1 and is not a legal weight")
        return Weight(self.value, self.infinitesimal)

    def __str__(self):
        if self.value == 0:
            return "0+" if self.infinitesimal else "0"
        base = str(self.value)
        return base + "+" if self.infinitesimal else base

    def __repr__(self):
        return f"{type(self).__name__}({self})"


class Weight(WeightSum):
    """A legal marked-point weight: ``0+ <= w <= 1`` with ``1+`` excluded."""

    __slots__ = ()

    def __post_init__(self):
        super().__post_init__()
        if self.value == 0 and not self.infinitesimal:
            raise WeightError("bare 0 is not a legal weight; use 0+")
        if self.value > 1 or (self.value == 1 and self.infinitesimal):
            raise WeightError(f"{WeightSum(self.value, self.infinitesimal)} is not in [0+, 1]")


ONE = Weight(Fraction(1))
ZERO_PLUS = Weight(Fraction(0), True)

_FRACTION_RE = re.compile(r"^\s*(\d+)\s*/\s*(\d+)\s*$")


def parse_weight(text: str) -> Weight:
    """Parse ``"1"``, ``"0+"`` or ``"p/q"`` with ``0 < p <= q``.

    >>> parse_weight("2/5")
    Weight(2/5)
    >>> parse_weight("0+")
    Weight(0+)
    """
    s = text.strip()
    if s == "0+":
        return ZERO_PLUS
    if s == "1":
        return ONE
    m = _FRACTION_RE.match(s)
    if not m:
        raise WeightError(f"cannot parse weight {text!r}; expected '1', '0+' or 'p/q'")
    p, q = int(m.group(1)), int(m.group(2))
    if q == 0 or p == 0 or p > q:
        raise WeightError(f"weight {text!r} is outside (0, 1]")
    return Weight(Fraction(p, q))


def format_weight(w: WeightSum) -> str:
    """Inverse of :func:`parse_weight` (``p/q`` in lowest terms)."""
    return str(w)


def weight_sum(ws: Iterable[WeightSum]) -> WeightSum:
    """Add weights: values add, infinitesimal flags OR together."""
    total = Fraction(0)
    inf = False
    empty = True
    for w in ws:
        empty = False
        total += w.value
        inf = inf or w.infinitesimal
    if empty:
        raise WeightError("weight_sum of an empty list")
    return WeightSum(total, inf)


def admissible(s: WeightSum) -> bool:
    """True iff ``s <= 1``, where ``1+`` counts as exceeding 1."""
    return s.value < 1 or (s.value == 1 and not s.infinitesimal)


class WeightSet(tuple):
    """A sorted tuple of distinct weights (the set of allowed weights).

    Serialized as comma-separated weight strings in sorted order.
    """

    def __new__(cls, elements: Iterable[Weight] = ()):
        elems = sorted({_as_weight(w) for w in elements})
        return super().__new__(cls, elems)

    def is_closed(self) -> bool:
        members = set(self)
        for i, a in enumerate(self):
            for b in self[i:]:
                s = a + b
                if admissible(s) and s.to_weight() not in members:
                    return False
        return True

    def with_one(self) -> "WeightSet":
        return WeightSet((*self, ONE))

    def without_one(self) -> "WeightSet":
        return WeightSet(w for w in self if w != ONE)

    def __str__(self):
        return ",".join(str(w) for w in self)

    def __repr__(self):
        return f"WeightSet({{{str(self)}}})"


def _as_weight(w) -> Weight:
    if isinstance(w, Weight):
        return w
    if isinstance(w, WeightSum):
        return w.to_weight()
    if isinstance(w, str):
        return parse_weight(w)
    raise WeightError(f"not a weight: {w!r}")


def parse_weight_set(text: str) -> WeightSet:
    """Parse a comma-separated weight list (not closed automatically)."""
    parts = [p for p in text.split(",") if p.strip()]
    if not parts:
        raise WeightError("empty weight set")
    return WeightSet(parse_weight(p) for p in parts)


def additive_closure(seed: Iterable[Weight]) -> WeightSet:
    """Smallest additively closed weight set containing ``seed``.

    Pairwise sums are added until a fixpoint; inadmissible sums are dropped.
    All elements are sums of seeds lying in ``[0+, 1]``, a finite set.
    """
    current = {_as_weight(w) for w in seed}
    frontier = set(current)
    while frontier:
        new = set()
        for a in frontier:
            for b in current:
                s = a + b
                if admissible(s):
                    w = s.to_weight()
                    if w not in current:
                        new.add(w)
        current |= new
        frontier = new
    return WeightSet(current)

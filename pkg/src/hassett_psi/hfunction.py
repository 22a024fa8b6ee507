"""The double-factorial ratio ``h_{k;e}`` and its multi-index versions.

``h_{k;e} = (2k+2e+1)!! / (2e-1)!!``.  Two extensions to negative
arguments are provided:

* :func:`h_scalar` / :func:`h_multi` continue ``(2m-1)!!`` downward through
  ``(2m-1)!! = (2m+1)!! / (2m+1)``.  With this, ``h_{k;e}`` is the product
  ``(2e+1)(2e+3)...(2e+2k+1)`` for every integer ``e`` and the algebraic
  identities hold for all integer arguments.
* :func:`h_coefficient` is the structure constant that actually appears in
  the weighted recursion and in the Virasoro operators.  Inclusion-exclusion
  terms whose effective index ``m = |e_J| - #J + 1`` is negative are dropped,
  because they stand for insertions ``tau_m`` with ``m < 0``.
* :func:`operator_coefficient` is the coefficient of ``t_{e} d/dt_{|e|-n+1+k}``
  in the operators.  It adds to :func:`h_coefficient` the contributions of
  sublists whose target index ``|e_J| - #J + 1 + k`` is negative: such a
  weighted insertion is re-expanded into merges with further points.
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Sequence

from .combinatorics import power_classes

__all__ = [
    "odd_double_factorial",
    "h_scalar",
    "h_multi",
    "h_multi_via_classes",
    "h_coefficient",
    "operator_coefficient",
    "merge_coefficient",
    "scalar_bracket_identity",
    "bracket_identity",
    "inductive_identity",
]


@lru_cache(maxsize=None)
def odd_double_factorial(m: int) -> Fraction:
    """Return ``(2m-1)!!``, extended to ``m <= 0`` by the downward recursion.

    >>> odd_double_factorial(3), odd_double_factorial(0), odd_double_factorial(-1)
    (Fraction(15, 1), Fraction(1, 1), Fraction(-1, 1))
    """
    if m >= 1:
        out = 1
        for i in range(3, 2 * m, 2):
            out *= i
        return Fraction(out)
    if m == 0:
        return Fraction(1)
    return odd_double_factorial(m + 1) / (2 * m + 1)


def h_scalar(k: int, e: int) -> Fraction:
    """``(2k+2e+1)!! / (2e-1)!!`` for all integers, via the extended double factorial.

    >>> h_scalar(2, 1), h_scalar(-2, 1)
    (Fraction(105, 1), Fraction(1, 1))
    """
    return odd_double_factorial(k + e + 1) / odd_double_factorial(e)


def _subset_indices(n):
    for r in range(1, n + 1):
        for J in combinations(range(n), r):
            yield r, J


@lru_cache(maxsize=None)
def _h_multi_sorted(k: int, e: tuple[int, ...]) -> Fraction:
    total = Fraction(0)
    for r, J in _subset_indices(len(e)):
        term = h_scalar(k, sum(e[j] for j in J) - r + 1)
        total += term if r % 2 else -term
    return total


def h_multi(k: int, e: Sequence[int]) -> Fraction:
    """Inclusion-exclusion ``sum_{J != {}} (-1)^{#J-1} h_{k; |e_J|-#J+1}``."""
    if not e:
        raise ValueError("h_multi needs a nonempty index list")
    return _h_multi_sorted(k, tuple(sorted(e)))


def h_multi_via_classes(k: int, e: Sequence[int], a: Sequence) -> Fraction:
    """Same value as :func:`h_multi`, summed once per class of sublists of ``(e, a)``.

    Each class is weighted by the number of index subsets realizing it.
    """
    if len(e) != len(a):
        raise ValueError("e and a must have the same length")
    total = Fraction(0)
    for cls in power_classes(list(zip(e, a)), include_full=True):
        size = len(cls.representative)
        eff = sum(x for x, _ in cls.representative) - size + 1
        term = cls.multiplicity * h_scalar(k, eff)
        total += term if size % 2 else -term
    return total


@lru_cache(maxsize=None)
def _h_coefficient_sorted(k: int, e: tuple[int, ...]) -> Fraction:
    total = Fraction(0)
    for r, J in _subset_indices(len(e)):
        eff = sum(e[j] for j in J) - r + 1
        if eff < 0:
            continue
        term = h_scalar(k, eff)
        total += term if r % 2 else -term
    return total


def h_coefficient(k: int, e: Sequence[int]) -> Fraction:
    """Recursion coefficient: :func:`h_multi` without negative-index terms.

    >>> h_coefficient(2, (0, 0)), h_multi(2, (0, 0))
    (Fraction(30, 1), Fraction(33, 1))
    """
    if not e:
        raise ValueError("h_coefficient needs a nonempty index list")
    return _h_coefficient_sorted(k, tuple(sorted(e)))


def _target(k: int, e: Sequence[int]) -> int:
    return sum(e) - len(e) + 1 + k


def _reach(k: int, e: tuple[int, ...]) -> dict[int, int]:
    """Signed count of merge chains from each sublist (bitmask) to the full list.

    A proper sublist only continues to merge while its target index
    ``|e_J| - #J + 1 + k`` is negative; each step carries a minus sign.
    """
    n = len(e)
    full = (1 << n) - 1
    memo: dict[int, int] = {full: 1}

    def reach(mask: int) -> int:
        if mask in memo:
            return memo[mask]
        total = 0
        if _target(k, [e[i] for i in range(n) if mask >> i & 1]) < 0:
            rest = full & ~mask
            sub = rest
            while sub:
                total -= reach(mask | sub)
                sub = (sub - 1) & rest
        memo[mask] = total
        return total

    return {mask: r for mask in range(1, full + 1) if (r := reach(mask))}


@lru_cache(maxsize=None)
def _operator_coefficient_sorted(k: int, e: tuple[int, ...]) -> Fraction:
    n = len(e)
    out = Fraction(0)
    for mask, r in _reach(k, e).items():
        out += r * _h_coefficient_sorted(k, tuple(sorted(e[i] for i in range(n) if mask >> i & 1)))
    return out


@lru_cache(maxsize=None)
def _merge_coefficient_sorted(k: int, e: tuple[int, ...]) -> int:
    return sum(_reach(k, e).values())


def merge_coefficient(k: int, e: Sequence[int]) -> int:
    """Coefficient of ``t_{e;a} d/dt_{|e|-n+1+k; |a|+b}`` in the weight-raising part (before ``1/n!``).

    Equals 1 unless a proper sublist reaches a negative target index.

    >>> merge_coefficient(0, (2, 3)), merge_coefficient(0, (0, 0, 2))
    (1, 0)
    """
    if not e:
        raise ValueError("merge_coefficient needs a nonempty index list")
    if _target(k, e) < 0:
        raise ValueError("the full list must have a nonnegative target index")
    return _merge_coefficient_sorted(k, tuple(sorted(e)))


def operator_coefficient(k: int, e: Sequence[int]) -> Fraction:
    """Coefficient ``C_k(e)`` of ``t_{e} d/dt_{|e|-n+1+k}`` (before the ``1/n!``).

    Sum over sublists ``J`` of :func:`h_coefficient` ``(k, e_J)``, where a
    proper sublist counts only if its target index is negative, and then
    with the sign of its chains of further merges.  For weight sets whose
    admissible lists never reach a negative target this equals
    :func:`h_coefficient`.

    >>> operator_coefficient(-1, (0, 3)), h_coefficient(-1, (0, 3))
    (Fraction(0, 1), Fraction(1, 1))
    """
    if not e:
        raise ValueError("operator_coefficient needs a nonempty index list")
    if _target(k, e) < 0:
        raise ValueError("the full list must have a nonnegative target index")
    return _operator_coefficient_sorted(k, tuple(sorted(e)))


# ---------------------------------------------------------------------------
# identities, returned as (lhs, rhs) so callers can report both sides

def scalar_bracket_identity(k1: int, k2: int, e: int) -> tuple[Fraction, Fraction]:
    """``2 (k1 - k2) h_{k1+k2;e}`` and ``h_{k1;e} h_{k2;k1+e} - h_{k2;e} h_{k1;k2+e}``.

    >>> scalar_bracket_identity(1, 0, 1)
    (Fraction(30, 1), Fraction(30, 1))
    """
    lhs = 2 * (k1 - k2) * h_scalar(k1 + k2, e)
    rhs = h_scalar(k1, e) * h_scalar(k2, k1 + e) - h_scalar(k2, e) * h_scalar(k1, k2 + e)
    return lhs, rhs


def bracket_identity(k1: int, k2: int, e: Sequence[int], a: Sequence) -> tuple[Fraction, Fraction]:
    """Multi-index bracket identity, summed over classes of sublists of ``(e, a)``.

    Left: ``2 (k1 - k2) h_{k1+k2;e} / #Aut(e, a)``.  Right: for each class
    ``[j]`` with complement ``j^c``,
    ``(h_{k1;j} h_{k2; k1+|j|-#j+1, j^c} - (k1 <-> k2)) / (#Aut(j) #Aut(j^c))``.
    """
    from .combinatorics import aut_order

    items = list(zip(e, a))
    lhs = 2 * (k1 - k2) * h_multi(k1 + k2, e) / aut_order(items)
    rhs = Fraction(0)
    for cls in power_classes(items, include_full=True):
        j = [x for x, _ in cls.representative]
        jc = [x for x, _ in cls.complement]
        shift = sum(j) - len(j) + 1
        term = h_multi(k1, j) * h_multi(k2, [k1 + shift] + jc) - h_multi(k2, j) * h_multi(k1, [k2 + shift] + jc)
        rhs += term / (aut_order(cls.representative) * aut_order(cls.complement))
    return lhs, rhs


def inductive_identity(k: int, c: int, e: Sequence[int]) -> tuple[Fraction, Fraction]:
    """``h_{k;c,e}`` and ``h_{k;c} + sum_{J != {}} (h_{k;e_J} - h_{k; c+|e_J|-#J, e_{J^c}})``."""
    n = len(e)
    lhs = h_multi(k, [c] + list(e))
    rhs = h_scalar(k, c)
    for r, J in _subset_indices(n):
        eJ = [e[i] for i in J]
        eJc = [e[i] for i in range(n) if i not in J]
        rhs += h_multi(k, eJ) - h_multi(k, [c + sum(eJ) - r] + eJc)
    return lhs, rhs

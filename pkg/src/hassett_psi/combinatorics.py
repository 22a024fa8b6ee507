"""Admissible partitions, merged insertions and automorphism-weighted sublists."""
from __future__ import annotations

from collections import Counter
from itertools import product
from math import comb
from typing import Iterator, NamedTuple, Sequence

from .weights import WeightSum, admissible

__all__ = [
    "WeightedInsertion",
    "SublistClass",
    "admissible_partitions",
    "codim",
    "merged_insertion",
    "power_classes",
    "aut_order",
    "all_set_partitions",
    "canonical",
]


class WeightedInsertion(NamedTuple):
    """A ``tau_{k;a}`` insertion.  ``k`` may be negative inside merges."""

    k: int
    a: WeightSum

    def __str__(self):
        return f"({self.k};{self.a})"


Partition = tuple[tuple[int, ...], ...]


def admissible_partitions(insertions: Sequence[WeightedInsertion]) -> Iterator[Partition]:
    """Yield every admissible set partition of ``range(len(insertions))``.

    Blocks come out ordered by their smallest index (restricted growth
    order).  A branch is cut as soon as some block's weight becomes
    inadmissible, so inadmissible partitions are never built.
    """
    weights = [ins[1] for ins in insertions]
    n = len(weights)
    blocks: list[list[int]] = []
    sums: list[WeightSum] = []

    def extend(i):
        if i == n:
            yield tuple(tuple(b) for b in blocks)
            return
        w = weights[i]
        for j in range(len(blocks)):
            s = sums[j] + w
            if not admissible(s):
                continue
            old = sums[j]
            blocks[j].append(i)
            sums[j] = s
            yield from extend(i + 1)
            blocks[j].pop()
            sums[j] = old
        blocks.append([i])
        sums.append(w)
        yield from extend(i + 1)
        blocks.pop()
        sums.pop()

    if n == 0:
        yield ()
        return
    yield from extend(0)


def codim(partition: Partition, n: int | None = None) -> int:
    """``n`` minus the number of blocks."""
    if n is None:
        n = sum(len(b) for b in partition)
    return n - len(partition)


def merged_insertion(block: Sequence[WeightedInsertion]) -> WeightedInsertion:
    """Collapse a block to one insertion: ``k' = 1 + sum(k - 1)``, weights add."""
    if not block:
        raise ValueError("cannot merge an empty block")
    k = 1 + sum(ins[0] - 1 for ins in block)
    a = block[0][1]
    for ins in block[1:]:
        a = a + ins[1]
    return WeightedInsertion(k, a)


def aut_order(items: Sequence) -> int:
    """Number of permutations fixing the multiset ``items``."""
    out = 1
    for m in Counter(items).values():
        for i in range(2, m + 1):
            out *= i
    return out


class SublistClass(NamedTuple):
    representative: tuple
    complement: tuple
    multiplicity: int


def power_classes(items: Sequence, include_full: bool = True) -> list[SublistClass]:
    """Equivalence classes of nonempty sublists of ``items``.

    Two sublists are equivalent when they agree as multisets.  The
    multiplicity of a class is the number of index subsets realizing it,
    i.e. ``#Aut(full) / (#Aut(sub) * #Aut(complement))``.
    """
    if not items:
        raise ValueError("power_classes of an empty list")
    counts = sorted(Counter(items).items())
    values = [v for v, _ in counts]
    total = [m for _, m in counts]
    out = []
    for choice in product(*(range(m + 1) for m in total)):
        size = sum(choice)
        if size == 0 or (not include_full and size == len(items)):
            continue
        mult = 1
        sub: list = []
        rest: list = []
        for v, c, m in zip(values, choice, total):
            mult *= comb(m, c)
            sub.extend([v] * c)
            rest.extend([v] * (m - c))
        out.append(SublistClass(tuple(sub), tuple(rest), mult))
    out.sort(key=lambda c: (len(c.representative), c.representative))
    return out


def weight_of(block: Sequence[WeightedInsertion]) -> WeightSum:
    s = block[0][1]
    for ins in block[1:]:
        s = s + ins[1]
    return s


def canonical(insertions) -> tuple[WeightedInsertion, ...]:
    """Sort insertions by ``(k, weight)``."""
    return tuple(sorted(WeightedInsertion(int(k), a) for k, a in insertions))


def all_set_partitions(n: int) -> Iterator[Partition]:
    """Every set partition of ``range(n)``, with no pruning (a brute-force reference)."""
    if n == 0:
        yield ()
        return
    for p in all_set_partitions(n - 1):
        for i in range(len(p)):
            yield p[:i] + (p[i] + (n - 1,),) + p[i + 1:]
        yield p + ((n - 1,),)

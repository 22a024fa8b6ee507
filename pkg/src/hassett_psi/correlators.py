"""Exact psi-class intersection numbers with weighted marked points.

Weight-1 numbers come from the DVV recursion.  Weighted numbers are
computed either by the partition reduction (sum over admissible partitions
of weight-1 numbers, with sign ``(-1)^codim``) or by the weighted
recursion; the two are independent routes to the same values.
"""
from __future__ import annotations

import json
import logging
import os
import sys
import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence

from .combinatorics import WeightedInsertion, admissible_partitions, aut_order, canonical
from .hfunction import h_coefficient, h_scalar, odd_double_factorial
from .weights import ONE, Weight, WeightSet, WeightSum, admissible, parse_weight

__all__ = [
    "genus_for",
    "unweighted_correlator",
    "partition_sum",
    "weighted_correlator",
    "CorrelatorCache",
    "CacheFormatError",
    "CacheMismatch",
    "FEntry",
    "build_F_coefficients",
    "correlator_keys",
    "MODES",
    "CACHE_ENV",
]

log = logging.getLogger(__name__)

MODES = ("partition", "recursion")
CACHE_ENV = "HASSETT_PSI_CACHE"

sys.setrecursionlimit(max(sys.getrecursionlimit(), 10000))

Key = tuple[WeightedInsertion, ...]


def genus_for(ks: Sequence[int]) -> int | None:
    """Genus ``g`` with ``3g - 3 + n = sum(k)``, or None if there is none."""
    s = sum(ks) - len(ks) + 3
    if s < 0 or s % 3:
        return None
    return s // 3


def _df(m: int) -> Fraction:
    # (2m-1)!!
    return odd_double_factorial(m)


@lru_cache(maxsize=None)
def _wk(ks: tuple[int, ...]) -> Fraction:
    if ks and ks[0] < 0:
        return Fraction(0)
    g = genus_for(ks)
    if g is None:
        return Fraction(0)
    n = len(ks)
    if 2 * g - 2 + n <= 0:
        return Fraction(0)
    if ks == (0, 0, 0):
        return Fraction(1)
    if ks == (1,):
        return Fraction(1, 24)
    # expand tau_{k+1} on the largest index
    k = ks[-1] - 1
    e = ks[:-1]
    total = Fraction(0)
    for j, ej in enumerate(e):
        shifted = tuple(sorted(e[:j] + (ej + k,) + e[j + 1:]))
        total += h_scalar(k, ej) * _wk(shifted)
    m = len(e)
    for r in range(k):
        s = k - 1 - r
        inner = _wk(tuple(sorted(e + (r, s))))
        for mask in range(1 << m):
            left = tuple(sorted((r,) + tuple(e[i] for i in range(m) if mask >> i & 1)))
            right = tuple(sorted((s,) + tuple(e[i] for i in range(m) if not mask >> i & 1)))
            a = _wk(left)
            if a:
                inner += a * _wk(right)
        total += _df(r + 1) * _df(s + 1) / 2 * inner
    return total / _df(k + 2)


def unweighted_correlator(ks: Iterable[int]) -> Fraction:
    """``<tau_{k_1} ... tau_{k_n}>`` with all weights 1 (DVV recursion).

    Zero for negative indices, fractional genus and unstable ranges.

    >>> unweighted_correlator([4])
    Fraction(1, 1152)
    """
    return _wk(tuple(sorted(int(k) for k in ks)))


class CacheMismatch(RuntimeError):
    """A persisted record disagrees with recomputation."""


class CacheFormatError(CacheMismatch):
    """A persisted record cannot be parsed."""


class CorrelatorCache:
    """Memo table ``canonical key -> value``.

    Lookups are plain dict reads; inserts take a lock, and inserting the
    same key twice is harmless because values are deterministic.
    """

    def __init__(self):
        self._data: dict[Key, Fraction] = {}
        self._lock = threading.Lock()

    def get(self, key: Key):
        return self._data.get(key)

    def put(self, key: Key, value: Fraction) -> None:
        with self._lock:
            self._data.setdefault(key, value)

    def __contains__(self, key):
        return key in self._data

    def __len__(self):
        return len(self._data)

    def items(self):
        return sorted(self._data.items(), key=lambda kv: _key_sort(kv[0]))

    def clear(self):
        with self._lock:
            self._data.clear()

    # persistence: one JSON object per line
    def save(self, path: str | os.PathLike) -> int:
        path = Path(path)
        lines = [json.dumps(record_for(key, value), separators=(",", ":")) for key, value in self.items()]
        tmp = path.with_suffix(path.suffix + ".tmp")
        tmp.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
        tmp.replace(path)
        return len(lines)

    def load(self, path: str | os.PathLike, mode: str = "trust") -> int:
        """Load records; ``mode="verify"`` recomputes each one and raises on mismatch."""
        if mode not in ("trust", "verify"):
            raise ValueError(f"unknown cache mode {mode!r}")
        count = 0
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                key, value = parse_record(line, strict=(mode == "verify"), where=f"{path}:{lineno}")
                if mode == "verify":
                    fresh = partition_sum(key)
                    if fresh != value:
                        raise CacheMismatch(
                            f"{path}:{lineno}: stored {_fmt(value)} but recomputed {_fmt(fresh)} for {format_key(key)}"
                        )
                self.put(key, value)
                count += 1
        return count


_RECORD_FIELDS = {"g", "ins", "val"}


def record_for(key: Key, value: Fraction) -> dict:
    g = genus_for([k for k, _ in key])
    return {"g": g, "ins": [[k, str(a)] for k, a in key], "val": f"{value.numerator}/{value.denominator}"}


def parse_record(line: str, strict: bool = False, where: str = "") -> tuple[Key, Fraction]:
    try:
        obj = json.loads(line)
        if strict and set(obj) != _RECORD_FIELDS:
            raise ValueError(f"unexpected fields {sorted(set(obj) ^ _RECORD_FIELDS)}")
        key = canonical((int(k), parse_weight(w)) for k, w in obj["ins"])
        value = Fraction(obj["val"])
        g = genus_for([k for k, _ in key])
        if g is None or g != obj["g"]:
            raise ValueError(f"genus {obj['g']} inconsistent with insertions")
    except (KeyError, TypeError, ValueError) as exc:
        raise CacheFormatError(f"{where}: bad cache record: {exc}") from exc
    return key, value


def _fmt(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}" if x.denominator != 1 else str(x.numerator)


def format_key(key: Iterable) -> str:
    return "".join(f"({k};{a})" for k, a in key)


def _key_sort(key: Key):
    return (genus_for([k for k, _ in key]) or 0, len(key), key)


_PARTITION_CACHE = CorrelatorCache()
_RECURSION_CACHE = CorrelatorCache()


def default_cache(mode: str = "partition") -> CorrelatorCache:
    return _PARTITION_CACHE if mode == "partition" else _RECURSION_CACHE


def _partition_sum_raw(key: Key) -> Fraction:
    total = Fraction(0)
    n = len(key)
    ks = [k for k, _ in key]
    for p in admissible_partitions(key):
        merged = tuple(sorted(1 + sum(ks[i] - 1 for i in block) for block in p))
        v = _wk(merged)
        if v:
            total += -v if (n - len(p)) % 2 else v
    return total


def partition_sum(insertions, cache: CorrelatorCache | None = None) -> Fraction:
    """Weighted correlator as a signed sum over admissible partitions.

    Each block collapses to a weight-1 insertion ``tau_{1 + sum(k-1)}``;
    weight-1 numbers with a negative index are 0.  Also defines the
    unstable values, e.g. ``<tau_{0;1/3}^3> = 1``.  Insertions with negative
    ``k`` are allowed and are simply expanded the same way.
    """
    key = insertions if _is_canonical(insertions) else canonical(insertions)
    if genus_for([k for k, _ in key]) is None:
        return Fraction(0)
    cache = _PARTITION_CACHE if cache is None else cache
    hit = cache.get(key)
    if hit is not None:
        return hit
    value = _partition_sum_raw(key)
    cache.put(key, value)
    return value


def _is_canonical(x) -> bool:
    return isinstance(x, tuple) and all(isinstance(i, WeightedInsertion) for i in x) and list(x) == sorted(x)


def _weight(a: WeightSum) -> Weight:
    return a if isinstance(a, Weight) else a.to_weight()


def _base_value(key: Key) -> Fraction | None:
    if len(key) == 1 and key[0][0] == 1:
        return Fraction(1, 24)
    if len(key) == 3 and all(k == 0 for k, _ in key):
        return Fraction(1)
    return None


def _recursion(key: Key, cache: CorrelatorCache) -> Fraction:
    if any(k < 0 for k, _ in key):
        # negative indices only arise inside merges; expand them by partitions
        return partition_sum(key)
    if genus_for([k for k, _ in key]) is None:
        return Fraction(0)
    hit = cache.get(key)
    if hit is not None:
        return hit
    base = _base_value(key)
    if base is not None:
        cache.put(key, base)
        return base
    pivot_k, b = key[-1]
    if pivot_k == 0:
        value = partition_sum(key)
        cache.put(key, value)
        return value

    k = pivot_k - 1
    rest = key[:-1]
    n = len(rest)
    total = Fraction(0)

    def sub(items) -> Fraction:
        return _recursion(canonical(items), cache)

    subsets = [(mask, [i for i in range(n) if mask >> i & 1]) for mask in range(1, 1 << n)]

    if b != ONE:
        # move the pivot weight up to 1
        for mask, idx in subsets:
            s = b
            for i in idx:
                s = s + rest[i][1]
            if not admissible(s):
                continue
            newk = k + 1 + sum(rest[i][0] for i in idx) - len(idx)
            others = [rest[i] for i in range(n) if not mask >> i & 1]
            total -= sub(others + [(newk, _weight(s))])

    inner = Fraction(0)
    for mask, idx in subsets:
        s = rest[idx[0]][1]
        for i in idx[1:]:
            s = s + rest[i][1]
        if not admissible(s):
            continue
        eJ = [rest[i][0] for i in idx]
        newk = sum(eJ) - len(idx) + 1 + k
        others = [rest[i] for i in range(n) if not mask >> i & 1]
        inner += h_coefficient(k, eJ) * sub(others + [(newk, _weight(s))])
    for r in range(k):
        s_ = k - 1 - r
        quad = sub(list(rest) + [(r, ONE), (s_, ONE)])
        for mask in range(1 << n):
            left = [rest[i] for i in range(n) if mask >> i & 1] + [(r, ONE)]
            x = sub(left)
            if x:
                right = [rest[i] for i in range(n) if not mask >> i & 1] + [(s_, ONE)]
                quad += x * sub(right)
        inner += _df(r + 1) * _df(s_ + 1) / 2 * quad
    value = total + inner / _df(k + 2)
    cache.put(key, value)
    return value


def weighted_correlator(insertions, mode: str = "partition", cache: CorrelatorCache | None = None) -> Fraction:
    """``<tau_{k_1;a_1} ... tau_{k_n;a_n}>`` for legal weights.

    ``mode="partition"`` uses the partition reduction; ``mode="recursion"``
    uses the weighted recursion, always expanding the insertion with the
    largest ``k``.  Both give the same exact value.

    >>> from hassett_psi.weights import parse_weight
    >>> third = parse_weight("1/3")
    >>> weighted_correlator([(0, third)] * 3)
    Fraction(1, 1)
    """
    key = canonical(insertions)
    for _, a in key:
        if not isinstance(a, Weight):
            raise TypeError(f"insertion weights must be Weight, got {a!r}")
    if mode == "partition":
        return partition_sum(key, cache)
    if mode == "recursion":
        return _recursion(key, _RECURSION_CACHE if cache is None else cache)
    raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")


def correlator_keys(weights: Sequence[Weight], n: int, g: int, max_k: int | None = None) -> Iterator[Key]:
    """All canonical keys with ``n`` insertions of genus ``g`` over ``weights``."""
    total = 3 * g - 3 + n
    if total < 0 or n <= 0:
        return
    ws = sorted(weights)
    top = total if max_k is None else min(total, max_k)
    pairs = [WeightedInsertion(k, a) for k in range(top + 1) for a in ws]

    def rec(start, left, remaining):
        if left == 0:
            if remaining == 0:
                yield ()
            return
        for i in range(start, len(pairs)):
            k = pairs[i].k
            if k * left > remaining:
                break
            for tail in rec(i, left - 1, remaining - k):
                yield (pairs[i],) + tail

    yield from rec(0, n, total)


@dataclass(frozen=True)
class FEntry:
    """One correlator of the generating function.

    ``coefficient`` is the coefficient of the monomial ``prod t_{k;a}`` in
    ``F``, i.e. ``value / prod(m_{k;a}!)``.
    """

    key: Key
    genus: int
    value: Fraction

    @property
    def coefficient(self) -> Fraction:
        return self.value / aut_order(self.key)


def build_F_coefficients(
    weights: Iterable[Weight],
    max_insertions: int | Mapping[int, int],
    max_genus: int,
    mode: str = "partition",
    cache: CorrelatorCache | None = None,
) -> list[FEntry]:
    """Nonzero correlators with ``n <= max_insertions`` and ``g <= max_genus``.

    ``max_insertions`` may be a mapping ``genus -> bound`` so that low
    genera can be taken to higher order.  Output is sorted by
    ``(genus, n, key)``.
    """
    ws = list(WeightSet(weights))
    out = []
    for g in range(max_genus + 1):
        nmax = max_insertions.get(g, 0) if isinstance(max_insertions, Mapping) else max_insertions
        for n in range(1, nmax + 1):
            for key in correlator_keys(ws, n, g):
                v = weighted_correlator(key, mode=mode, cache=cache)
                if v:
                    out.append(FEntry(key, g, v))
    return out

"""Exact brute-force oracle for the moments of ``M`` with Rademacher entries.

For unit Rademacher ``X`` and ``Y`` the expectation of a product of entries is
1 when every entry appears an even number of times and 0 otherwise, so

    E[(1/n) Tr M^k] = #{(I, M, J): both closed walks have even edge
                       multiplicities} / (n d^k p^k)

is an exact rational. The X-parity depends only on ``(I, M)`` and the
Y-parity only on ``(I, J)``, so for each ``I`` the ``M`` and ``J`` tuples are
tallied separately and multiplied; this is the same sum, just grouped.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, NamedTuple

from .errors import ConfigurationError, ResourceGuardError

MAX_TUPLES = 10**8


class WalkPair(NamedTuple):
    """Index tuples of the closed walks ``(i1 m1 i2 m2 ... ik mk i1)`` and
    ``(i1 j1 ... ik jk i1)``."""

    I: tuple
    M: tuple
    J: tuple


@dataclass(frozen=True)
class ShapeCount:
    k: int
    s: int
    count: int


class WalkClass(NamedTuple):
    """Classification flags of a contributing walk pair.

    ``all_double``: every edge of both walks is crossed exactly twice.
    ``x_tree``: the X-walk graph is a double tree.
    ``mirror``: the Y-walk has the same shape as the X-walk, i.e.
    ``m_s == m_t`` iff ``j_s == j_t``.
    """

    all_double: bool
    x_tree: bool
    mirror: bool


@dataclass
class WalkCensus:
    k: int
    n: int
    d: int
    p: int
    counts: dict  # WalkClass -> int

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    @property
    def denominator(self) -> int:
        return self.n * self.d**self.k * self.p**self.k

    @property
    def double_tree_count(self) -> int:
        return self.counts.get(WalkClass(True, True, True), 0)

    def mass(self, cls: WalkClass | None = None) -> Fraction:
        num = self.total if cls is None else self.counts.get(cls, 0)
        return Fraction(num, self.denominator)


def _guard(k: int, n: int, d: int, p: int) -> None:
    if k < 1:
        raise ConfigurationError(f"k must be >= 1, got {k}")
    if min(n, d, p) < 1:
        raise ConfigurationError("dimensions must be positive")
    cost = (n * d * p) ** k
    if cost > MAX_TUPLES:
        raise ResourceGuardError(
            f"enumeration over (n d p)^k = {cost:.3e} tuples exceeds the guard of {MAX_TUPLES:.0e}",
            estimate=float(cost),
        )


def canonical_pattern(seq) -> tuple:
    """Relabel by first occurrence: ``(5, 2, 5) -> (0, 1, 0)``."""
    seen: dict = {}
    return tuple(seen.setdefault(v, len(seen)) for v in seq)


def walk_edges(I, M) -> Counter:
    """Edge multiplicities of the bipartite walk ``i1 m1 i2 m2 ... ik mk i1``."""
    k = len(I)
    mult: Counter = Counter()
    for s in range(k):
        mult[(I[s], M[s])] += 1
        mult[(I[(s + 1) % k], M[s])] += 1
    return mult


def is_double_tree(I, M, mult: Counter | None = None) -> bool:
    """Every edge crossed exactly twice and ``#edges == #vertices - 1``."""
    if mult is None:
        mult = walk_edges(I, M)
    if any(c != 2 for c in mult.values()):
        return False
    return len(mult) == len(set(I)) + len(set(M)) - 1


def _side_stats(I, M):
    mult = walk_edges(I, M)
    if any(c % 2 for c in mult.values()):
        return None
    double = all(c == 2 for c in mult.values())
    tree = double and len(mult) == len(set(I)) + len(set(M)) - 1
    return double, tree, canonical_pattern(M)


def _census_for_leading(args) -> Counter:
    i1, k, n, d, p = args
    counts: Counter = Counter()
    x_cache: dict = {}
    for tail in itertools.product(range(n), repeat=k - 1):
        I = (i1,) + tail
        key = canonical_pattern(I)
        if key not in x_cache:
            # walk statistics depend on I only through its equality pattern
            xs: Counter = Counter()
            for M in itertools.product(range(d), repeat=k):
                st = _side_stats(key, M)
                if st is not None:
                    xs[st] += 1
            ys: Counter = Counter()
            for J in itertools.product(range(p), repeat=k):
                st = _side_stats(key, J)
                if st is not None:
                    ys[(st[0], st[2])] += 1
            x_cache[key] = (xs, ys)
        xs, ys = x_cache[key]
        for (dx, tree, pm), cm in xs.items():
            for (dy, pj), cj in ys.items():
                counts[WalkClass(dx and dy, tree, pm == pj)] += cm * cj
    return counts


def enumerate_contributing_walks(k: int, n: int, d: int, p: int, workers: int = 1) -> WalkCensus:
    """Classify every contributing ``(I, M, J)`` and return the per-class counts.

    Work is split over the leading index ``i1``; partial counters are merged
    in index order so the result does not depend on ``workers``.
    """
    _guard(k, n, d, p)
    jobs = [(i1, k, n, d, p) for i1 in range(n)]
    if workers > 1 and n > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_census_for_leading, jobs))
    else:
        parts = [_census_for_leading(j) for j in jobs]
    total: Counter = Counter()
    for part in parts:
        total.update(part)
    return WalkCensus(k, n, d, p, dict(sorted(total.items())))


def contributing_count(k: int, n: int, d: int, p: int) -> int:
    """Number of ``(I, M, J)`` whose two walks both have even multiplicities."""
    _guard(k, n, d, p)
    total = 0
    for I in itertools.product(range(n), repeat=k):
        ex = sum(1 for M in itertools.product(range(d), repeat=k) if _side_stats(I, M) is not None)
        if ex:
            ey = sum(1 for J in itertools.product(range(p), repeat=k) if _side_stats(I, J) is not None)
            total += ex * ey
    return total


def exact_moment_rademacher(k: int, n: int, d: int, p: int) -> Fraction:
    """Exact ``E[(1/n) Tr M^k]`` for unit Rademacher ``X`` and ``Y``."""
    return Fraction(contributing_count(k, n, d, p), n * d**k * p**k)


def brute_force_moment_rademacher(k: int, n: int, d: int, p: int) -> Fraction:
    """Unfactorized reference: one parity test per ``(I, M, J)`` tuple."""
    _guard(k, n, d, p)
    hits = 0
    for I in itertools.product(range(n), repeat=k):
        for M in itertools.product(range(d), repeat=k):
            mx = walk_edges(I, M)
            if any(c % 2 for c in mx.values()):
                continue
            for J in itertools.product(range(p), repeat=k):
                my = walk_edges(I, J)
                if not any(c % 2 for c in my.values()):
                    hits += 1
    return Fraction(hits, n * d**k * p**k)


def iter_contributing_walks(k: int, n: int, d: int, p: int) -> Iterator[tuple[WalkPair, WalkClass]]:
    """Yield each contributing walk pair with its classification (small cases)."""
    _guard(k, n, d, p)
    for I in itertools.product(range(n), repeat=k):
        for M in itertools.product(range(d), repeat=k):
            sx = _side_stats(I, M)
            if sx is None:
                continue
            for J in itertools.product(range(p), repeat=k):
                sy = _side_stats(I, J)
                if sy is None:
                    continue
                yield WalkPair(I, M, J), WalkClass(sx[0] and sy[0], sx[1], sx[2] == sy[2])


def count_tree_shapes(k: int, s: int) -> tuple[int, int]:
    """``C(k-1, s) C(k, s) / (s+1)`` as a reduced ``(numerator, denominator)``.

    This is the Narayana number ``N(k, s+1)``, so the denominator is always 1.
    """
    if k < 1 or not 0 <= s <= k - 1:
        raise ConfigurationError(f"need k >= 1 and 0 <= s <= k-1, got k={k}, s={s}")
    f = Fraction(math.comb(k - 1, s) * math.comb(k, s), s + 1)
    return f.numerator, f.denominator


def tree_shapes(k: int) -> list[ShapeCount]:
    out = []
    for s in range(k):
        num, den = count_tree_shapes(k, s)
        if den != 1:
            raise ArithmeticError(f"non-integral shape count {num}/{den} at k={k}, s={s}")
        out.append(ShapeCount(k, s, num))
    return out


def catalan(k: int) -> int:
    return math.comb(2 * k, k) // (k + 1)


def golden_rows(k_values, dims) -> list[dict]:
    """Rows of exact oracle values (rationals rendered as strings)."""
    from .mp_law import finite_n_tree_moment

    rows = []
    for k in k_values:
        for n, d, p in dims:
            census = enumerate_contributing_walks(k, n, d, p)
            tree = finite_n_tree_moment(k, n, d, p, exact=True)
            rows.append(
                {
                    "k": k,
                    "n": n,
                    "d": d,
                    "p": p,
                    "exact_moment": str(census.mass()),
                    "double_tree_mass": str(census.mass(WalkClass(True, True, True))),
                    "tree_moment": str(tree),
                    "contributing": census.total,
                    "double_tree_count": census.double_tree_count,
                }
            )
    return rows

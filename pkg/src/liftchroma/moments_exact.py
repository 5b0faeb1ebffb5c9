"""Exact moment sums for colouring counts of random lifts.

Everything here is arbitrary-precision integer/rational arithmetic; no
floating point enters any value.  The central identity: the number of
(lift, colouring) pairs compatible with a fixed overlap profile factors as

    prod_v  multinomial(n; a_v * n)  *  prod_{e=vv'}  M(a_v * n, a_{v'} * n)

where M(x, y) is the number of proper perfect matchings between two fibers
whose colour histograms are x and y, i.e.

    M(x, y) = sum over zero-diagonal tables B with row sums x, column
              sums y of  x! * y! / B!          (vector factorials).

Dividing by the n!^{|E|} equally likely lifts turns pair counts into
expectations.  The same scheme with colour *pairs* (k^2 colours, tables
forbidding agreement in either coordinate) yields second moments.

Enumeration order for the inner tables is depth-first with marginal
feasibility pruning: a partial table is abandoned as soon as a row cannot
be completed within the remaining column capacities.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterator, Sequence

from .base_graph import BaseGraph, validate
from .coloring import EquitableSpec
from .errors import TooLargeError
from .lift import Lift, enumerate_lifts

DEFAULT_PROFILE_CAP = 10**6


@dataclass(frozen=True)
class OverlapProfile:
    """Colour frequencies per fiber (a) and per oriented edge fiber (b).

    ``a[v][i]`` is the fraction of fiber v coloured i; ``b[e][(i, i2)]`` the
    fraction of the n lifted edges over base edge e joining colour i in the
    tail fiber to colour i2 != i in the head fiber.  All entries live in
    (1/n) * Z.
    """

    n: int
    a: tuple[tuple[Fraction, ...], ...]
    b: tuple[dict, ...]

    def validate(self, g: BaseGraph) -> None:
        k = len(self.a[0])
        for v, row in enumerate(self.a):
            if sum(row) != 1:
                raise ValueError(f"fiber {v} colour fractions must sum to 1")
            for x in row:
                if x < 0 or (x * self.n).denominator != 1:
                    raise ValueError(f"fiber {v} has entry outside (1/n)Z: {x}")
        for e, (tail, head) in enumerate(g.edges):
            be = self.b[e]
            for i in range(k):
                row_sum = sum(be.get((i, i2), Fraction(0)) for i2 in range(k) if i2 != i)
                if row_sum != self.a[tail][i]:
                    raise ValueError(f"edge {e}: tail marginal mismatch at colour {i}")
                col_sum = sum(be.get((i1, i), Fraction(0)) for i1 in range(k) if i1 != i)
                if col_sum != self.a[head][i]:
                    raise ValueError(f"edge {e}: head marginal mismatch at colour {i}")

    def as_float_arrays(self):
        import numpy as np

        k = len(self.a[0])
        a = np.array([[float(x) for x in row] for row in self.a])
        b = np.zeros((len(self.b), k, k))
        for e, be in enumerate(self.b):
            for (i, i2), val in be.items():
                b[e, i, i2] = float(val)
        return a, b


@dataclass(frozen=True)
class PairOverlapProfile:
    """Pair-colouring overlap: per-vertex k x k histograms A (all row and
    column sums 1/k) and per-edge tables B indexed by (i, j, i2, j2) with
    i != i2, j != j2, whose marginals reproduce A at both endpoints."""

    n: int
    A: tuple[tuple[tuple[Fraction, ...], ...], ...]
    B: tuple[dict, ...]

    def validate(self, g: BaseGraph) -> None:
        k = len(self.A[0])
        target = Fraction(1, k)
        for v, table in enumerate(self.A):
            for i in range(k):
                if sum(table[i]) != target:
                    raise ValueError(f"vertex {v}: row {i} sum is not 1/k")
            for j in range(k):
                if sum(table[i][j] for i in range(k)) != target:
                    raise ValueError(f"vertex {v}: column {j} sum is not 1/k")
        for e, (tail, head) in enumerate(g.edges):
            be = self.B[e]
            for key, val in be.items():
                i, j, i2, j2 = key
                if i == i2 or j == j2:
                    raise ValueError(f"edge {e}: improper support cell {key}")
                if val < 0 or (val * self.n).denominator != 1:
                    raise ValueError(f"edge {e}: entry outside (1/n)Z at {key}")
            for i in range(k):
                for j in range(k):
                    tail_sum = sum(
                        be.get((i, j, i2, j2), Fraction(0))
                        for i2 in range(k)
                        for j2 in range(k)
                    )
                    if tail_sum != self.A[tail][i][j]:
                        raise ValueError(f"edge {e}: tail marginal mismatch at {(i, j)}")
                    head_sum = sum(
                        be.get((i2, j2, i, j), Fraction(0))
                        for i2 in range(k)
                        for j2 in range(k)
                    )
                    if head_sum != self.A[head][i][j]:
                        raise ValueError(f"edge {e}: head marginal mismatch at {(i, j)}")


def compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    """All tuples of `parts` nonnegative integers summing to `total`."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in compositions(total - first, parts - 1):
            yield (first,) + rest


def _vector_factorial(x: Sequence[int]) -> int:
    out = 1
    for v in x:
        out *= math.factorial(v)
    return out


def multinomial(n: int, x: Sequence[int]) -> int:
    assert sum(x) == n
    return math.factorial(n) // _vector_factorial(x)


def _table_sum(
    row_margins: tuple[int, ...],
    col_margins: tuple[int, ...],
    allowed: Callable[[int, int], bool],
) -> int:
    """sum over allowed-support tables B of  rows! * cols! / B!.

    Rows are filled one at a time; each row's mass is distributed over its
    allowed columns without exceeding the remaining column capacity, and a
    row is abandoned early when the remaining capacity cannot absorb it.
    """
    nrows, ncols = len(row_margins), len(col_margins)
    col_rem = list(col_margins)
    base = _vector_factorial(row_margins) * _vector_factorial(col_margins)
    allowed_cols = [
        [j for j in range(ncols) if allowed(i, j)] for i in range(nrows)
    ]
    total = 0

    def fill_row(i: int, denom: int) -> None:
        nonlocal total
        if i == nrows:
            total += base // denom
            return
        need = row_margins[i]
        cols = allowed_cols[i]

        def place(ci: int, left: int, denom_row: int) -> None:
            if ci == len(cols):
                if left == 0:
                    fill_row(i + 1, denom_row)
                return
            j = cols[ci]
            tail_capacity = sum(col_rem[c] for c in cols[ci + 1 :])
            lo = max(0, left - tail_capacity)
            hi = min(left, col_rem[j])
            for bij in range(lo, hi + 1):
                col_rem[j] -= bij
                place(ci + 1, left - bij, denom_row * math.factorial(bij))
                col_rem[j] += bij

        place(0, need, denom)

    fill_row(0, 1)
    return total


@lru_cache(maxsize=None)
def proper_matching_count(x: tuple[int, ...], y: tuple[int, ...]) -> int:
    """M(x, y): perfect matchings between fibers with colour histograms x, y
    in which no edge joins equal colours."""
    assert sum(x) == sum(y)
    return _table_sum(x, y, lambda i, j: i != j)


@lru_cache(maxsize=None)
def proper_pair_matching_count(
    x: tuple[tuple[int, ...], ...], y: tuple[tuple[int, ...], ...]
) -> int:
    """Pair-colouring analogue of M: matchings proper in both colourings.

    Histograms are k x k (colour in first, colour in second colouring); a
    matched pair may not agree in either coordinate.
    """
    k = len(x)
    rows = tuple(x[i][j] for i in range(k) for j in range(k))
    cols = tuple(y[i][j] for i in range(k) for j in range(k))

    def allowed(r: int, c: int) -> bool:
        i, j = divmod(r, k)
        i2, j2 = divmod(c, k)
        return i != i2 and j != j2

    assert sum(rows) == sum(cols)
    return _table_sum(rows, cols, allowed)


def histogram_pair_count(
    g: BaseGraph, n: int, a_counts: Sequence[tuple[int, ...]]
) -> int:
    """Number of (lift, colouring) pairs whose per-fiber colour histogram is
    exactly ``a_counts`` (integer counts per vertex)."""
    validate(g)
    weight = 1
    for counts in a_counts:
        weight *= multinomial(n, counts)
    for tail, head in g.edges:
        weight *= proper_matching_count(tuple(a_counts[tail]), tuple(a_counts[head]))
    return weight


def expected_X_exact(
    g: BaseGraph, n: int, k: int, profile_cap: int = DEFAULT_PROFILE_CAP
) -> Fraction:
    """E[X] where X counts proper k-colourings of a uniform n-lift.

    Sums histogram_pair_count over all per-vertex colour histograms and
    divides by the n!^{|E|} lifts.  Valid for any regular base graph.
    """
    validate(g)
    if n < 1 or k < 1:
        raise ValueError("need n >= 1 and k >= 1")
    per_vertex = math.comb(n + k - 1, k - 1)
    if per_vertex ** g.num_vertices > profile_cap:
        raise TooLargeError(
            f"{per_vertex}^{g.num_vertices} colour histograms exceed cap {profile_cap}"
        )
    comps = list(compositions(n, k))
    multi = {c: multinomial(n, c) for c in comps}
    total = 0
    for assignment in itertools.product(comps, repeat=g.num_vertices):
        weight = 1
        for c in assignment:
            weight *= multi[c]
        for tail, head in g.edges:
            weight *= proper_matching_count(assignment[tail], assignment[head])
            if weight == 0:
                break
        total += weight
    return Fraction(total, math.factorial(n) ** g.num_edges)


def _edge_table_weights(t: tuple[int, ...]) -> list[int]:
    """Individual table weights t! * t! / B! for the per-edge sum M(t, t)."""
    weights: list[int] = []
    base = _vector_factorial(t) ** 2
    k = len(t)
    col_rem = list(t)

    def fill_row(i: int, denom: int) -> None:
        if i == k:
            weights.append(base // denom)
            return
        cols = [j for j in range(k) if j != i]

        def place(ci: int, left: int, d: int) -> None:
            if ci == len(cols):
                if left == 0:
                    fill_row(i + 1, d)
                return
            j = cols[ci]
            tail_capacity = sum(col_rem[c] for c in cols[ci + 1 :])
            lo = max(0, left - tail_capacity)
            hi = min(left, col_rem[j])
            for bij in range(lo, hi + 1):
                col_rem[j] -= bij
                place(ci + 1, left - bij, d * math.factorial(bij))
                col_rem[j] += bij

        place(0, t[i], denom)

    fill_row(0, 1)
    return weights


def expected_Y_exact(
    g: BaseGraph, n: int, k: int, factorized: bool = True
) -> Fraction:
    """E[Y] where Y counts strongly equitable k-colourings (k | n).

    Factorized form: multinomial(n; n/k, ..., n/k)^{|V|} * (M(t,t)/n!)^{|E|}
    with t the uniform quota vector.  ``factorized=False`` enumerates the
    joint per-edge table lattice instead; the two must agree exactly.
    """
    validate(g)
    if n % k != 0:
        raise ValueError(f"strong equitability needs k | n; got n={n}, k={k}")
    t = (n // k,) * k
    return _expected_Y_from_quotas(g, n, t, factorized)


def expected_Y_exact_extended(
    g: BaseGraph, n: int, k: int, factorized: bool = True
) -> Fraction:
    """E[Y] under the extended quotas (first n mod k colours get one extra)."""
    validate(g)
    t = EquitableSpec(k=k, n=n).quotas()
    return _expected_Y_from_quotas(g, n, t, factorized)


def _expected_Y_from_quotas(
    g: BaseGraph, n: int, t: tuple[int, ...], factorized: bool
) -> Fraction:
    vertex_factor = multinomial(n, t) ** g.num_vertices
    if factorized:
        m = proper_matching_count(t, t)
        return Fraction(vertex_factor * m**g.num_edges, math.factorial(n) ** g.num_edges)
    weights = _edge_table_weights(t)
    total = 0
    for combo in itertools.product(weights, repeat=g.num_edges):
        w = 1
        for x in combo:
            w *= x
        total += w
    return Fraction(vertex_factor * total, math.factorial(n) ** g.num_edges)


def _doubly_stochastic_tables(k: int, q: int) -> list[tuple[tuple[int, ...], ...]]:
    """All k x k nonnegative integer tables with every row and column sum q."""
    tables: list[tuple[tuple[int, ...], ...]] = []
    col_rem = [q] * k
    rows: list[tuple[int, ...]] = []

    def fill_row(i: int) -> None:
        if i == k:
            tables.append(tuple(rows))
            return

        def place(j: int, left: int, row: list[int]) -> None:
            if j == k - 1:
                if left <= col_rem[j]:
                    row.append(left)
                    col_rem[j] -= left
                    rows.append(tuple(row))
                    fill_row(i + 1)
                    rows.pop()
                    col_rem[j] += left
                    row.pop()
                return
            tail_capacity = sum(col_rem[c] for c in range(j + 1, k))
            lo = max(0, left - tail_capacity)
            hi = min(left, col_rem[j])
            for bij in range(lo, hi + 1):
                row.append(bij)
                col_rem[j] -= bij
                place(j + 1, left - bij, row)
                col_rem[j] += bij
                row.pop()

        place(0, q, [])

    fill_row(0)
    return tables


def expected_Y2_exact(
    g: BaseGraph, n: int, k: int, profile_cap: int = DEFAULT_PROFILE_CAP
) -> Fraction:
    """E[Y^2]: pairs of strongly equitable k-colourings of the same lift.

    Sums over per-vertex k x k pair-colour histograms A_v (all margins n/k)
    with the per-edge pair-matching counts factorised given the endpoint
    histograms.  Returns 0 when k does not divide n (no strongly equitable
    colourings exist under the uniform quota).
    """
    validate(g)
    if n % k != 0:
        return Fraction(0)
    q = n // k
    tables = _doubly_stochastic_tables(k, q)
    if len(tables) ** g.num_vertices > profile_cap:
        raise TooLargeError(
            f"{len(tables)}^{g.num_vertices} pair histograms exceed cap {profile_cap}"
        )
    flat = {tab: tuple(x for row in tab for x in row) for tab in tables}
    multi = {tab: multinomial(n, flat[tab]) for tab in tables}
    total = 0
    for assignment in itertools.product(tables, repeat=g.num_vertices):
        weight = 1
        for tab in assignment:
            weight *= multi[tab]
        for tail, head in g.edges:
            weight *= proper_pair_matching_count(assignment[tail], assignment[head])
            if weight == 0:
                break
        total += weight
    return Fraction(total, math.factorial(n) ** g.num_edges)


def brute_force_moment(
    g: BaseGraph,
    n: int,
    statistic: Callable[[Lift], int | Fraction],
    cap: int = 10**7,
) -> Fraction:
    """Oracle: average a statistic over *all* lifts by full enumeration."""
    total = Fraction(0)
    count = 0
    for lift in enumerate_lifts(g, n, cap=cap):
        total += Fraction(statistic(lift))
        count += 1
    return total / count

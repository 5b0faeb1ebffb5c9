"""Constraint graphs, maximal-forest counts, restricted Hessian
determinants, and the Laplace lattice-summation estimator.

A sum of the shape  sum_{x in K cap (1/n)Z^E, Dx = y} T_n(x)  with D the
(unsigned, for bipartite Gamma) incidence matrix of a constraint graph is
asymptotically

    psi(xhat) / (tau(Gamma)^(1/2) det(-H|_V)^(1/2)) * (2 pi n)^(r/2)
        * c_n * e^(n phi(xhat)),

where V = ker D has dimension r, tau counts maximal forests (one spanning
tree per component; Kirchhoff), H is the Hessian of phi at the interior
maximiser xhat, and det(H|_V) = det(U^T H U) / det(U^T U) for any basis
matrix U of V (basis-independent).

Determinants over integers use fraction-free Bareiss elimination so the
spanning-tree counts and the structured restricted Hessians come out
exact; float determinants lose integrality already around k = 5.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator, Sequence

import numpy as np

from .asymptotics import LogValue, lambdas, log_gamma_nk
from .base_graph import BaseGraph, validate
from .errors import DomainError, SingularHessianError, TooLargeError

DEFAULT_LATTICE_CAP = 10**7


@dataclass(frozen=True)
class ConstraintGraph:
    """Multigraph whose vertices are equation labels and edges variables."""

    num_vertices: int
    edges: tuple[tuple[int, int], ...]
    vertex_labels: tuple = ()
    edge_labels: tuple = ()

    def __post_init__(self):
        for u, v in self.edges:
            if u == v:
                raise ValueError("constraint graphs must be loopless")
            if not (0 <= u < self.num_vertices and 0 <= v < self.num_vertices):
                raise ValueError("edge endpoint out of range")

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def components(self) -> list[list[int]]:
        adj = [[] for _ in range(self.num_vertices)]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        seen = [False] * self.num_vertices
        comps = []
        for s in range(self.num_vertices):
            if seen[s]:
                continue
            stack, comp = [s], []
            seen[s] = True
            while stack:
                u = stack.pop()
                comp.append(u)
                for w in adj[u]:
                    if not seen[w]:
                        seen[w] = True
                        stack.append(w)
            comps.append(sorted(comp))
        return comps

    def bipartition(self) -> tuple[set[int], set[int]] | None:
        """(left, right) classes, or None when not bipartite."""
        side = [-1] * self.num_vertices
        adj = [[] for _ in range(self.num_vertices)]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        for s in range(self.num_vertices):
            if side[s] >= 0:
                continue
            side[s] = 0
            stack = [s]
            while stack:
                u = stack.pop()
                for w in adj[u]:
                    if side[w] < 0:
                        side[w] = side[u] ^ 1
                        stack.append(w)
                    elif side[w] == side[u]:
                        return None
        left = {v for v in range(self.num_vertices) if side[v] == 0}
        return left, set(range(self.num_vertices)) - left


def incidence_unsigned(gamma: ConstraintGraph) -> np.ndarray:
    """|V| x |E| 0/1 incidence matrix (orientation-free)."""
    d = np.zeros((gamma.num_vertices, gamma.num_edges), dtype=np.int64)
    for e, (u, v) in enumerate(gamma.edges):
        d[u, e] = 1
        d[v, e] = 1
    return d


def incidence_signed(
    gamma: ConstraintGraph, orientation: Sequence[tuple[int, int]] | None = None
) -> np.ndarray:
    """|V| x |E| signed incidence matrix: +1 at the tail, -1 at the head.

    The default orientation takes each stored edge as (tail, head).
    """
    edges = gamma.edges if orientation is None else tuple(orientation)
    d = np.zeros((gamma.num_vertices, gamma.num_edges), dtype=np.int64)
    for e, (u, v) in enumerate(edges):
        d[u, e] = 1
        d[v, e] = -1
    return d


# ---------------------------------------------------------------------------
# Exact linear algebra


def bareiss_det(mat: Sequence[Sequence[int]]) -> int:
    """Exact determinant of an integer matrix by fraction-free elimination."""
    n = len(mat)
    if n == 0:
        return 1
    m = [[int(x) for x in row] for row in mat]
    sign = 1
    prev = 1
    for col in range(n - 1):
        pivot_row = next((r for r in range(col, n) if m[r][col] != 0), None)
        if pivot_row is None:
            return 0
        if pivot_row != col:
            m[col], m[pivot_row] = m[pivot_row], m[col]
            sign = -sign
        pivot = m[col][col]
        for r in range(col + 1, n):
            for c in range(col + 1, n):
                m[r][c] = (m[r][c] * pivot - m[r][col] * m[col][c]) // prev
            m[r][col] = 0
        prev = pivot
    return sign * m[-1][-1]


def fraction_det(mat: Sequence[Sequence]) -> Fraction:
    """Exact determinant of a rational matrix (row-scaled Bareiss)."""
    n = len(mat)
    if n == 0:
        return Fraction(1)
    scale = Fraction(1)
    int_rows = []
    for row in mat:
        fr = [Fraction(x) for x in row]
        lcm = 1
        for x in fr:
            lcm = lcm * x.denominator // math.gcd(lcm, x.denominator)
        scale *= lcm
        int_rows.append([int(x * lcm) for x in fr])
    return Fraction(bareiss_det(int_rows), 1) / scale


def kernel_basis(d_matrix: np.ndarray) -> list[list[int]]:
    """Integer basis of ker(D) as a matrix whose *columns* are the basis.

    Fraction-free in effect: rational RREF, then each free-variable vector
    is cleared of denominators and reduced by the gcd.  Asserts
    rank-nullity.  Returned as a list of rows (length = #columns of D),
    each row a list of ints, with r columns.
    """
    rows, cols = d_matrix.shape
    m = [[Fraction(int(d_matrix[i, j])) for j in range(cols)] for i in range(rows)]
    pivots: list[int] = []
    rank = 0
    for col in range(cols):
        pivot_row = next((r for r in range(rank, rows) if m[r][col] != 0), None)
        if pivot_row is None:
            continue
        m[rank], m[pivot_row] = m[pivot_row], m[rank]
        pv = m[rank][col]
        m[rank] = [x / pv for x in m[rank]]
        for r in range(rows):
            if r != rank and m[r][col] != 0:
                factor = m[r][col]
                m[r] = [a - factor * b for a, b in zip(m[r], m[rank])]
        pivots.append(col)
        rank += 1
        if rank == rows:
            break
    free_cols = [c for c in range(cols) if c not in pivots]
    basis: list[list[Fraction]] = []
    for free in free_cols:
        vec = [Fraction(0)] * cols
        vec[free] = Fraction(1)
        for i, pc in enumerate(pivots):
            vec[pc] = -m[i][free]
        basis.append(vec)
    assert len(basis) == cols - rank, "rank-nullity must hold"
    int_basis: list[list[int]] = []
    for vec in basis:
        lcm = 1
        for x in vec:
            lcm = lcm * x.denominator // math.gcd(lcm, x.denominator)
        ints = [int(x * lcm) for x in vec]
        g = 0
        for x in ints:
            g = math.gcd(g, abs(x))
        if g > 1:
            ints = [x // g for x in ints]
        int_basis.append(ints)
    # transpose: rows indexed by variable, columns by basis vector
    return [[int_basis[b][i] for b in range(len(int_basis))] for i in range(cols)]


def matrix_rank(d_matrix: np.ndarray) -> int:
    u = kernel_basis(d_matrix)
    nullity = len(u[0]) if u else 0
    return d_matrix.shape[1] - nullity


def tau_maximal_forests(gamma: ConstraintGraph) -> int:
    """Number of maximal forests: product over components of spanning-tree
    counts, each an exact reduced-Laplacian determinant (multi-edges count)."""
    total = 1
    for comp in gamma.components():
        if len(comp) == 1:
            continue
        index = {v: i for i, v in enumerate(comp)}
        size = len(comp)
        lap = [[0] * size for _ in range(size)]
        for u, v in gamma.edges:
            if u in index and v in index:
                iu, iv = index[u], index[v]
                lap[iu][iu] += 1
                lap[iv][iv] += 1
                lap[iu][iv] -= 1
                lap[iv][iu] -= 1
        minor = [row[1:] for row in lap[1:]]
        total *= bareiss_det(minor)
    return total


def _is_exact_matrix(mat) -> bool:
    if isinstance(mat, np.ndarray):
        return np.issubdtype(mat.dtype, np.integer)
    return all(isinstance(x, (int, Fraction)) for row in mat for x in row)


def det_restricted(h_matrix, u_basis) -> Fraction | float:
    """det(U^T H U) / det(U^T U): the determinant of H restricted to the
    column span of U.  Exact (Fraction) when both inputs are rational,
    float otherwise.  Basis-independent; raises on rank-deficient U.
    """
    if _is_exact_matrix(h_matrix) and _is_exact_matrix(u_basis):
        rows = len(u_basis)
        r = len(u_basis[0]) if rows else 0
        h = [[Fraction(h_matrix[i][j]) if not isinstance(h_matrix, np.ndarray) else Fraction(int(h_matrix[i, j])) for j in range(rows)] for i in range(rows)]
        u = [[Fraction(x) for x in row] for row in u_basis]
        hu = [[sum(h[i][j] * u[j][b] for j in range(rows)) for b in range(r)] for i in range(rows)]
        uthu = [[sum(u[i][a] * hu[i][b] for i in range(rows)) for b in range(r)] for a in range(r)]
        utu = [[sum(u[i][a] * u[i][b] for i in range(rows)) for b in range(r)] for a in range(r)]
        gram = fraction_det(utu)
        if gram == 0:
            raise ValueError("basis matrix U is rank-deficient")
        return fraction_det(uthu) / gram
    h = np.asarray(h_matrix, dtype=float)
    u = np.asarray(u_basis, dtype=float)
    gram = np.linalg.det(u.T @ u)
    if abs(gram) < 1e-12:
        raise ValueError("basis matrix U is rank-deficient")
    return float(np.linalg.det(u.T @ h @ u) / gram)


def random_unimodular(size: int, rng) -> list[list[int]]:
    """Product of a unit lower- and unit upper-triangular +-1 matrix."""
    lower = [[0] * size for _ in range(size)]
    upper = [[0] * size for _ in range(size)]
    for i in range(size):
        lower[i][i] = 1
        upper[i][i] = int(rng.choice([-1, 1]))
        for j in range(i):
            lower[i][j] = int(rng.integers(-2, 3))
            upper[j][i] = int(rng.integers(-2, 3))
    return [
        [sum(lower[i][t] * upper[t][j] for t in range(size)) for j in range(size)]
        for i in range(size)
    ]


# ---------------------------------------------------------------------------
# Constraint graphs for the moment sums


def gamma_b_component(k: int) -> ConstraintGraph:
    """One per-edge block: K_{k,k} minus a perfect matching.

    Left vertices are tail-colour equations, right vertices head-colour
    equations; edge (i, i2) (i != i2) is the overlap variable b_{i,i2}.
    """
    if k < 3:
        raise ValueError("k must be >= 3")
    vertex_labels = [("tail", i) for i in range(k)] + [("head", i) for i in range(k)]
    edges = []
    edge_labels = []
    for i in range(k):
        for i2 in range(k):
            if i2 == i:
                continue
            edges.append((i, k + i2))
            edge_labels.append(("b", i, i2))
    return ConstraintGraph(
        num_vertices=2 * k,
        edges=tuple(edges),
        vertex_labels=tuple(vertex_labels),
        edge_labels=tuple(edge_labels),
    )


def build_gamma_b(g: BaseGraph, k: int) -> ConstraintGraph:
    """Constraint graph of the per-edge overlap marginals.

    2k|E| vertices (one per marginal equation), k(k-1)|E| edges (one per
    overlap variable), |E| components each K_{k,k} minus a perfect
    matching.  Variable order: edges grouped by base edge, then (i, i2)
    lexicographic with i != i2.
    """
    validate(g)
    if k < 3:
        raise ValueError("k must be >= 3")
    vertex_labels = []
    edges = []
    edge_labels = []
    for e in range(g.num_edges):
        off = 2 * k * e
        vertex_labels += [("w", e, 1, i) for i in range(k)]
        vertex_labels += [("w", e, 2, i) for i in range(k)]
        for i in range(k):
            for i2 in range(k):
                if i2 == i:
                    continue
                edges.append((off + i, off + k + i2))
                edge_labels.append(("b", e, i, i2))
    gamma = ConstraintGraph(
        num_vertices=2 * k * g.num_edges,
        edges=tuple(edges),
        vertex_labels=tuple(vertex_labels),
        edge_labels=tuple(edge_labels),
    )
    _assert_uniform_components(gamma, 2 * k, k * (k - 1), k - 1)
    return gamma


def build_gamma_a(g: BaseGraph, k: int) -> ConstraintGraph:
    """Constraint graph of the per-vertex pair-histogram marginals.

    2k|V| vertices, k^2|V| edges, |V| components each K_{k,k}.  Variable
    order: grouped by base vertex, then (i, j) lexicographic.
    """
    validate(g)
    if k < 3:
        raise ValueError("k must be >= 3")
    vertex_labels = []
    edges = []
    edge_labels = []
    for v in range(g.num_vertices):
        off = 2 * k * v
        vertex_labels += [("w", v, 1, i) for i in range(k)]
        vertex_labels += [("w", v, 2, j) for j in range(k)]
        for i in range(k):
            for j in range(k):
                edges.append((off + i, off + k + j))
                edge_labels.append(("a", v, i, j))
    gamma = ConstraintGraph(
        num_vertices=2 * k * g.num_vertices,
        edges=tuple(edges),
        vertex_labels=tuple(vertex_labels),
        edge_labels=tuple(edge_labels),
    )
    _assert_uniform_components(gamma, 2 * k, k * k, k)
    return gamma


def _assert_uniform_components(
    gamma: ConstraintGraph, nv: int, ne: int, degree: int
) -> None:
    deg = [0] * gamma.num_vertices
    for u, v in gamma.edges:
        deg[u] += 1
        deg[v] += 1
    comps = gamma.components()
    assert all(len(c) == nv for c in comps)
    assert all(deg[v] == degree for v in range(gamma.num_vertices))
    assert gamma.bipartition() is not None
    assert len(comps) * ne == gamma.num_edges


# ---------------------------------------------------------------------------
# The Laplace estimator


@dataclass
class LatticeProblem:
    """One application of the lattice-summation estimator.

    ``y`` is the right-hand side of D x = y over gamma's vertices; ``box``
    the per-variable closed interval; ``xhat`` the (interior) maximiser of
    phi subject to the constraints.  ``hessian_at_xhat`` may be a rational
    matrix for an exact restricted determinant; when None it is taken by
    central finite differences of phi.  Hypotheses on phi/psi regularity
    are the caller's responsibility.
    """

    gamma: ConstraintGraph
    y: tuple[Fraction, ...]
    box: tuple[tuple[Fraction, Fraction], ...]
    xhat: tuple[Fraction, ...]
    phi: Callable[[np.ndarray], float] | None = None
    psi: Callable[[np.ndarray], float] | None = None
    log_c_n: Callable[[int], float] | None = None
    hessian_at_xhat: object | None = None
    name: str = ""


def _finite_difference_hessian(phi, xhat: np.ndarray, step: float = 1e-5) -> np.ndarray:
    n = len(xhat)
    h = np.zeros((n, n))
    for i in range(n):
        for j in range(i, n):
            ei = np.zeros(n)
            ej = np.zeros(n)
            ei[i] = step
            ej[j] = step
            val = (
                phi(xhat + ei + ej)
                - phi(xhat + ei - ej)
                - phi(xhat - ei + ej)
                + phi(xhat - ei - ej)
            ) / (4 * step * step)
            h[i, j] = h[j, i] = val
    return h


def laplace_estimate(problem: LatticeProblem, n: int) -> LogValue:
    """Evaluate the estimator at lattice scale n, in log-space with sign.

    Requires det(-H|_V) > 0 and an interior maximiser; a zero psi(xhat)
    yields the zero estimate (sign 0).
    """
    gamma = problem.gamma
    if problem.phi is None or problem.psi is None or problem.log_c_n is None:
        raise ValueError("laplace_estimate needs phi, psi and log_c_n callbacks")
    for (lo, hi), x in zip(problem.box, problem.xhat):
        if not lo < x < hi:
            raise DomainError(
                "maximiser must lie strictly inside the box; boundary maximisers "
                "are unsupported"
            )
    d_matrix = (
        incidence_unsigned(gamma)
        if gamma.bipartition() is not None
        else incidence_signed(gamma)
    )
    # Constraint consistency at the maximiser.
    for row, rhs in zip(d_matrix, problem.y):
        lhs = sum(Fraction(int(c)) * x for c, x in zip(row, problem.xhat))
        if lhs != Fraction(rhs):
            raise DomainError("xhat does not satisfy D x = y")

    u = kernel_basis(d_matrix)
    r = len(u[0]) if u else 0
    if r == 0:
        raise DomainError("constraint kernel is trivial; no lattice to sum over")
    hess = problem.hessian_at_xhat
    if hess is None:
        hess = _finite_difference_hessian(
            problem.phi, np.array([float(x) for x in problem.xhat])
        )
    if isinstance(hess, np.ndarray) and hess.dtype == object:
        neg_h = [[-x for x in row] for row in hess.tolist()]
    elif isinstance(hess, np.ndarray):
        neg_h = -hess
    else:
        neg_h = [[-x for x in row] for row in hess]
    det_val = det_restricted(neg_h, u)
    if det_val <= 0:
        raise SingularHessianError(f"det(-H|_V) = {det_val} must be positive")

    tau = tau_maximal_forests(gamma)
    xhat_float = np.array([float(x) for x in problem.xhat])
    psi_val = problem.psi(xhat_float)
    if psi_val < 0:
        raise DomainError("psi(xhat) must be nonnegative")
    if psi_val == 0:
        return LogValue(float("-inf"), 0)
    log_val = (
        math.log(psi_val)
        - 0.5 * math.log(tau)
        - 0.5 * math.log(float(det_val))
        + (r / 2) * math.log(2 * math.pi * n)
        + problem.log_c_n(n)
        + n * problem.phi(xhat_float)
    )
    return LogValue(log=log_val, sign=1)


# ---------------------------------------------------------------------------
# Exact windowed sums


def enumerate_lattice_points(
    problem: LatticeProblem, n: int, cap: int = DEFAULT_LATTICE_CAP
) -> Iterator[tuple[Fraction, ...]]:
    """All x in box with n*x integral and D x = y, for bipartite gamma.

    Depth-first over variables with per-equation remaining-mass pruning.
    """
    gamma = problem.gamma
    if gamma.bipartition() is None:
        raise DomainError("lattice enumeration implemented for bipartite gamma only")
    ny = []
    for rhs in problem.y:
        val = Fraction(rhs) * n
        if val.denominator != 1:
            return  # no lattice points at this n
        ny.append(int(val))
    bounds = []
    for lo, hi in problem.box:
        lo_i = math.ceil(Fraction(lo) * n)
        hi_i = math.floor(Fraction(hi) * n)
        bounds.append((lo_i, hi_i))
    incident: list[list[int]] = [[] for _ in range(gamma.num_vertices)]
    for e, (u, v) in enumerate(gamma.edges):
        incident[u].append(e)
        incident[v].append(e)
    # Order variables so each vertex's incident edges finish consecutively.
    order: list[int] = []
    seen_edge = [False] * gamma.num_edges
    for v in range(gamma.num_vertices):
        for e in incident[v]:
            if not seen_edge[e]:
                seen_edge[e] = True
                order.append(e)
    remaining_count = [len(incident[v]) for v in range(gamma.num_vertices)]
    rem = list(ny)
    values = [0] * gamma.num_edges
    emitted = 0

    def dfs(pos: int):
        nonlocal emitted
        if pos == len(order):
            emitted += 1
            if emitted > cap:
                raise TooLargeError(f"lattice enumeration exceeded cap {cap}")
            yield tuple(Fraction(v, n) for v in values)
            return
        e = order[pos]
        u, v = gamma.edges[e]
        lo_i, hi_i = bounds[e]
        hi_eff = min(hi_i, rem[u], rem[v])
        for m in range(max(lo_i, 0), hi_eff + 1):
            values[e] = m
            rem[u] -= m
            rem[v] -= m
            remaining_count[u] -= 1
            remaining_count[v] -= 1
            ok = (remaining_count[u] > 0 or rem[u] == 0) and (
                remaining_count[v] > 0 or rem[v] == 0
            )
            if ok:
                yield from dfs(pos + 1)
            remaining_count[u] += 1
            remaining_count[v] += 1
            rem[u] += m
            rem[v] += m
        values[e] = 0

    yield from dfs(0)


@dataclass(frozen=True)
class WindowedSum:
    window_sum: Fraction
    full_sum: Fraction
    window_points: int
    total_points: int
    ratio: float


def windowed_sum(
    problem: LatticeProblem,
    n: int,
    gamma_window: float,
    term: Callable[[tuple[Fraction, ...]], Fraction],
    cap: int = DEFAULT_LATTICE_CAP,
) -> WindowedSum:
    """Sum `term` over all lattice points, and over the window of points
    with ||x - xhat||_inf < gamma_window * log(n)/sqrt(n)."""
    radius = gamma_window * math.log(n) / math.sqrt(n)
    xhat = [Fraction(x) for x in problem.xhat]
    full = Fraction(0)
    window = Fraction(0)
    total_points = 0
    window_points = 0
    for point in enumerate_lattice_points(problem, n, cap=cap):
        val = Fraction(term(point))
        full += val
        total_points += 1
        if all(abs(float(x - x0)) < radius for x, x0 in zip(point, xhat)):
            window += val
            window_points += 1
    ratio = float(window / full) if full != 0 else float("nan")
    return WindowedSum(
        window_sum=window,
        full_sum=full,
        window_points=window_points,
        total_points=total_points,
        ratio=ratio,
    )


# ---------------------------------------------------------------------------
# The two standing applications: E[Y] and E[Y^2]


def build_ey_problem(g: BaseGraph, k: int) -> LatticeProblem:
    """Lattice problem whose estimate is the asymptotic E[Y].

    Summand: the per-edge overlap form of the strongly-equitable count.
    The Hessian at the uniform maximiser is -k(k-1) I exactly.
    """
    validate(g)
    gamma = build_gamma_b(g, k)
    ne_vars = gamma.num_edges
    nv, ne = g.num_vertices, g.num_edges
    r = (k * k - 3 * k + 1) * ne

    def phi(x: np.ndarray) -> float:
        x = np.asarray(x, dtype=float)
        safe = x[x > 0]
        return (
            nv * math.log(k)
            - 2 * ne * math.log(k)
            - float(np.sum(safe * np.log(safe)))
        )

    def psi(x: np.ndarray) -> float:
        return float(np.exp(-0.5 * np.sum(np.log(x))))

    def log_c_n(n: int) -> float:
        return (k * nv / 2 - k * ne) * math.log(k) + (
            -(k - 1) * nv / 2 - r / 2
        ) * math.log(2 * math.pi * n)

    hess = [
        [Fraction(-k * (k - 1)) if i == j else Fraction(0) for j in range(ne_vars)]
        for i in range(ne_vars)
    ]
    return LatticeProblem(
        gamma=gamma,
        y=tuple(Fraction(1, k) for _ in range(gamma.num_vertices)),
        box=tuple((Fraction(0), Fraction(1, k)) for _ in range(ne_vars)),
        xhat=tuple(Fraction(1, k * (k - 1)) for _ in range(ne_vars)),
        phi=phi,
        psi=psi,
        log_c_n=log_c_n,
        hessian_at_xhat=hess,
        name=f"EY[{g.num_vertices}v {g.num_edges}e, k={k}]",
    )


def build_ey2_problem(g: BaseGraph, k: int) -> LatticeProblem:
    """Lattice problem whose estimate is the asymptotic E[Y^2].

    Variables are the per-vertex pair histograms; phi is the outer-sum
    objective after the per-edge sums were integrated out, and the scale
    c_n carries the saddle-point constant gamma(n, k).
    """
    from .stochastic_opt import F_A

    d = validate(g)
    gamma = build_gamma_a(g, k)
    nv, ne = g.num_vertices, g.num_edges
    k2 = k * k
    lam, lamp = lambdas(k)

    def phi(x: np.ndarray) -> float:
        return F_A(g, np.asarray(x, dtype=float).reshape(nv, k, k))

    def psi(x: np.ndarray) -> float:
        return float(np.exp(0.5 * (d - 1) * np.sum(np.log(x))))

    def log_c_n(n: int) -> float:
        return (ne / 2) * log_gamma_nk(n, k) + (
            -(k2 - 1) * nv / 2 + (2 * k2 - 1) * ne / 2
        ) * math.log(2 * math.pi * n)

    diag = Fraction((d - 1) * k2) - Fraction(d * k2 * (k - 1) ** 4, lam * lamp)
    off = Fraction(k2 * (k - 1) ** 2, lam * lamp)
    mult = {}
    for tail, head in g.edges:
        key = (tail, head) if tail < head else (head, tail)
        mult[key] = mult.get(key, 0) + 1
    size = nv * k2
    hess = [[Fraction(0)] * size for _ in range(size)]
    for v in range(nv):
        for cell in range(k2):
            hess[v * k2 + cell][v * k2 + cell] = diag
    for (u, v), m in mult.items():
        for cell in range(k2):
            hess[u * k2 + cell][v * k2 + cell] = m * off
            hess[v * k2 + cell][u * k2 + cell] = m * off
    return LatticeProblem(
        gamma=gamma,
        y=tuple(Fraction(1, k) for _ in range(gamma.num_vertices)),
        box=tuple((Fraction(0), Fraction(1, k)) for _ in range(nv * k2)),
        xhat=tuple(Fraction(1, k2) for _ in range(nv * k2)),
        phi=phi,
        psi=psi,
        log_c_n=log_c_n,
        hessian_at_xhat=hess,
        name=f"EY2[{g.num_vertices}v {g.num_edges}e, k={k}]",
    )

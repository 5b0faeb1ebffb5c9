import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from liftchroma.asymptotics import ey2_asym, ey_asym, h_dk
from liftchroma.errors import DomainError, SingularHessianError
from liftchroma.lattice_tools import (
    ConstraintGraph,
    LatticeProblem,
    bareiss_det,
    build_ey2_problem,
    build_ey_problem,
    build_gamma_a,
    build_gamma_b,
    det_restricted,
    enumerate_lattice_points,
    fraction_det,
    gamma_b_component,
    incidence_signed,
    incidence_unsigned,
    kernel_basis,
    laplace_estimate,
    matrix_rank,
    random_unimodular,
    tau_maximal_forests,
    windowed_sum,
)
from liftchroma.moments_exact import proper_matching_count


def test_incidence_single_edge():
    gamma = ConstraintGraph(2, ((0, 1),))
    assert incidence_unsigned(gamma).tolist() == [[1], [1]]
    assert incidence_signed(gamma).tolist() == [[1], [-1]]


def test_incidence_rank(k3):
    gamma = build_gamma_b(k3, 3)
    d = incidence_unsigned(gamma)
    assert d.shape == (18, 18)
    assert matrix_rank(d) == 18 - 3  # |V_Gamma| - #components


def test_signed_unsigned_same_kernel_for_bipartite(k3):
    gamma = build_gamma_b(k3, 3)
    ku = kernel_basis(incidence_unsigned(gamma))
    ks = kernel_basis(incidence_signed(gamma))
    assert len(ku[0]) == len(ks[0])
    # same span: each unsigned-kernel vector is killed by the signed matrix
    ds = incidence_signed(gamma)
    for col in range(len(ku[0])):
        vec = np.array([row[col] for row in ku])
        assert not np.any(ds @ vec)


def test_kernel_dimensions(k3, k4):
    assert len(kernel_basis(incidence_unsigned(build_gamma_b(k3, 3)))[0]) == 3
    assert len(kernel_basis(incidence_unsigned(build_gamma_a(k4, 3)))[0]) == 16
    # a tree has trivial kernel
    tree = ConstraintGraph(3, ((0, 1), (1, 2)))
    basis = kernel_basis(incidence_unsigned(tree))
    assert all(len(row) == 0 for row in basis)


def test_bareiss_and_fraction_det():
    assert bareiss_det([[2, 1], [1, 2]]) == 3
    assert bareiss_det([[1, 2], [2, 4]]) == 0
    assert fraction_det([[Fraction(1, 2), 0], [0, Fraction(4, 3)]]) == Fraction(2, 3)


@pytest.mark.parametrize("k", [3, 4, 5, 6])
def test_tau_closed_forms(k):
    minus_matching = gamma_b_component(k)
    assert tau_maximal_forests(minus_matching) == (k - 1) * k ** (k - 2) * (k - 2) ** (
        k - 1
    )
    complete_bip = ConstraintGraph(
        2 * k, tuple((i, k + j) for i in range(k) for j in range(k))
    )
    assert tau_maximal_forests(complete_bip) == k ** (2 * k - 2)


def test_tau_gamma_b(k3):
    assert tau_maximal_forests(build_gamma_b(k3, 3)) == 6**3


def _brute_force_maximal_forests(gamma: ConstraintGraph) -> int:
    target = gamma.num_vertices - len(gamma.components())
    count = 0
    for subset in itertools.combinations(range(gamma.num_edges), target):
        parent = list(range(gamma.num_vertices))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        acyclic = True
        for e in subset:
            u, v = gamma.edges[e]
            ru, rv = find(u), find(v)
            if ru == rv:
                acyclic = False
                break
            parent[ru] = rv
        if acyclic:
            count += 1
    return count


def test_tau_against_enumeration_random_bipartite():
    rng = np.random.default_rng(99)
    for _ in range(100):
        left = int(rng.integers(2, 5))
        right = int(rng.integers(2, 5))
        n_edges = int(rng.integers(left + right - 1, 11))
        edges = tuple(
            (int(rng.integers(0, left)), left + int(rng.integers(0, right)))
            for _ in range(n_edges)
        )
        gamma = ConstraintGraph(left + right, edges)
        assert tau_maximal_forests(gamma) == _brute_force_maximal_forests(gamma)


def test_det_restricted_identity():
    rng = np.random.default_rng(1)
    u = rng.normal(size=(6, 3))
    q, _ = np.linalg.qr(u)
    assert det_restricted(np.eye(6), q) == pytest.approx(1.0, abs=1e-12)


def test_det_restricted_scaled_identity_exact(k3, k4):
    for g, k in [(k3, 3), (k4, 3)]:
        gamma = build_gamma_b(g, k)
        u = kernel_basis(incidence_unsigned(gamma))
        r = len(u[0])
        scale = k * (k - 1)
        h = [
            [scale if i == j else 0 for j in range(gamma.num_edges)]
            for i in range(gamma.num_edges)
        ]
        val = det_restricted(h, u)
        assert val == Fraction(scale) ** r


def test_det_restricted_basis_invariance(k3):
    gamma = build_gamma_b(k3, 3)
    u = kernel_basis(incidence_unsigned(gamma))
    rng = np.random.default_rng(5)
    t = random_unimodular(len(u[0]), rng)
    u2 = [
        [sum(row[a] * t[a][b] for a in range(len(t))) for b in range(len(t))]
        for row in u
    ]
    h = np.diag(np.arange(1, gamma.num_edges + 1)).astype(float)
    v1 = det_restricted(h, np.array(u, dtype=float))
    v2 = det_restricted(h, np.array(u2, dtype=float))
    assert v1 == pytest.approx(v2, rel=1e-10)


def test_det_restricted_rank_deficient():
    u = np.zeros((4, 2))
    with pytest.raises(ValueError):
        det_restricted(np.eye(4), u)


def test_gamma_builders_counts(k3, k4):
    gb = build_gamma_b(k3, 3)
    assert (gb.num_vertices, gb.num_edges, len(gb.components())) == (18, 18, 3)
    ga = build_gamma_a(k4, 3)
    assert (ga.num_vertices, ga.num_edges, len(ga.components())) == (24, 36, 4)


def test_gamma_b_cyclic_solution_consistent(k3):
    # x with mass 1/k on the colour cycle (i -> i+1) solves D x = (1/k, ...)
    k = 3
    gamma = build_gamma_b(k3, k)
    d = incidence_unsigned(gamma)
    x = np.zeros(gamma.num_edges)
    for idx, label in enumerate(gamma.edge_labels):
        _, _e, i, i2 = label
        if i2 == (i + 1) % k:
            x[idx] = 1 / k
    assert np.allclose(d @ x, 1 / k)


def test_laplace_matches_closed_forms(k3, k4):
    for g in (k3, k4):
        ey_problem = build_ey_problem(g, 3)
        ey2_problem = build_ey2_problem(g, 3)
        for n in (30, 60):
            lap = laplace_estimate(ey_problem, n)
            assert abs(math.exp(lap.log - ey_asym(g, n, 3).log) - 1) < 1e-9
            lap2 = laplace_estimate(ey2_problem, n)
            assert abs(math.exp(lap2.log - ey2_asym(g, n, 3).log) - 1) < 1e-9


def test_restricted_hessian_reproduces_h_factor(k3, k4):
    for g in (k3, k4):
        problem = build_ey2_problem(g, 3)
        u = kernel_basis(incidence_unsigned(problem.gamma))
        neg_h = [[-x for x in row] for row in problem.hessian_at_xhat]
        val = det_restricted(neg_h, u)
        assert float(val) == pytest.approx(h_dk(g, 3) ** 4, rel=1e-9)


def test_laplace_finite_difference_hessian(k3):
    # dropping the analytic Hessian falls back to central differences and
    # must land near the exact-path estimate (FD limits the precision)
    problem = build_ey_problem(k3, 3)
    exact = laplace_estimate(problem, 30)
    problem.hessian_at_xhat = None
    fd = laplace_estimate(problem, 30)
    assert abs(math.exp(fd.log - exact.log) - 1) < 1e-4


def test_laplace_zero_psi(k3):
    problem = build_ey_problem(k3, 3)
    problem.psi = lambda x: 0.0
    out = laplace_estimate(problem, 30)
    assert out.sign == 0


def test_laplace_boundary_maximiser_rejected(k3):
    problem = build_ey_problem(k3, 3)
    problem.xhat = (Fraction(0),) + problem.xhat[1:]
    with pytest.raises(DomainError):
        laplace_estimate(problem, 30)


def test_laplace_singular_hessian(k3):
    problem = build_ey_problem(k3, 3)
    size = problem.gamma.num_edges
    problem.hessian_at_xhat = [[Fraction(0)] * size for _ in range(size)]
    with pytest.raises(SingularHessianError):
        laplace_estimate(problem, 30)


def _single_edge_problem(k: int) -> LatticeProblem:
    comp = gamma_b_component(k)
    return LatticeProblem(
        gamma=comp,
        y=tuple(Fraction(1, k) for _ in range(comp.num_vertices)),
        box=tuple((Fraction(0), Fraction(1, k)) for _ in range(comp.num_edges)),
        xhat=tuple(Fraction(1, k * (k - 1)) for _ in range(comp.num_edges)),
    )


def _matching_term(n: int, k: int):
    quota_fact = math.factorial(n // k) ** (2 * k)

    def term(point):
        denom = 1
        for x in point:
            denom *= math.factorial(int(x * n))
        return Fraction(quota_fact, denom)

    return term


def test_windowed_sum_full_equals_matching_count():
    k = 3
    problem = _single_edge_problem(k)
    for n in (6, 30, 60):
        ws = windowed_sum(problem, n, 1.0, _matching_term(n, k))
        assert ws.full_sum == proper_matching_count((n // k,) * k, (n // k,) * k)


def test_windowed_sum_ratios():
    k = 3
    problem = _single_edge_problem(k)
    ws = windowed_sum(problem, 60, 1.0, _matching_term(60, k))
    assert ws.ratio > 0.99
    ws0 = windowed_sum(problem, 60, 0.0, _matching_term(60, k))
    assert ws0.ratio < 1.0
    ws_small_n = windowed_sum(problem, 6, 1.0, _matching_term(6, k))
    assert ws_small_n.ratio == 1.0


def test_full_lattice_sum_reproduces_exact_moment(k3):
    # summing the per-edge matching weights over the whole joint lattice of
    # the E[Y] problem reproduces expected_Y_exact after normalisation
    from liftchroma.moments_exact import expected_Y_exact, multinomial

    k, n = 3, 9
    problem = build_ey_problem(k3, k)
    # one ((n/k)!)^{2k} block per base edge, over the joint variable vector
    quota_fact = math.factorial(n // k) ** (2 * k * k3.num_edges)

    def term(point):
        denom = 1
        for x in point:
            denom *= math.factorial(int(x * n))
        return Fraction(quota_fact, denom)

    ws = windowed_sum(problem, n, 1.0, term)
    vertex_factor = multinomial(n, (n // k,) * k) ** k3.num_vertices
    assert (
        Fraction(vertex_factor) * ws.full_sum / math.factorial(n) ** k3.num_edges
        == expected_Y_exact(k3, n, k)
    )


def test_lattice_enumeration_counts():
    # the zero-diagonal 3x3 tables with all margins q form a 1-parameter family
    problem = _single_edge_problem(3)
    points = list(enumerate_lattice_points(problem, 30))
    assert len(points) == 11  # q + 1 with q = 10
    d = incidence_unsigned(problem.gamma)
    for p in points:
        assert all(
            sum(Fraction(int(c)) * x for c, x in zip(row, p)) == Fraction(1, 3)
            for row in d
        )

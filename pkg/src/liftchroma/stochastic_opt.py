"""Entropy/overlap functionals over stochastic matrices and their maxima.

The central inequality family, with h(M) = -sum m log m (0 log 0 = 0) and
rho(M) = sum m^2 over a row-stochastic matrix M:

    square case (q x q, q >= 3, c < c_q):
        h(M)/q + c log(q^2 - 2q + rho(M)) <= log q + c log((q-1)^2)

    rectangular case (q x k, k <= q, c < (k-1)/(q-1) * c_q):
        h(M)/q + c log(kq - k - q + (k/q) rho(M))
            <= log k + c log((q-1)(k-1))

with equality exactly at the uniform matrix.  ``square_gap``/``rect_gap``
return RHS - LHS, which is nonnegative under the stated hypotheses.

The overlap functionals f, F evaluated here drive the moment sums: their
maxima over the feasible overlap polytopes sit at the uniform profiles, and
``verify_max_uniform`` corroborates that numerically with multi-start
projected gradient ascent.  The analytic theorems supply the guarantee; the
search only looks for counterexamples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .base_graph import BaseGraph, validate
from .errors import DegenerateEdgeError, DomainError
from .thresholds import c_q, ell_threshold

ROW_SUM_TOL = 1e-12
PROJECTION_TOL = 1e-10
PROJECTION_MAX_ITERS = 10**3


def _as_matrix(M) -> np.ndarray:
    out = np.asarray(M, dtype=float)
    if out.ndim != 2:
        raise ValueError("expected a 2-d matrix")
    return out


def validate_row_stochastic(M, tol: float = 1e-9) -> np.ndarray:
    M = _as_matrix(M)
    if np.any(M < -tol):
        raise ValueError("negative entry in stochastic matrix")
    if np.max(np.abs(M.sum(axis=1) - 1.0)) > tol:
        raise ValueError("row sums must equal 1")
    return M


def xlogx(x: np.ndarray) -> np.ndarray:
    """x log x with the 0 log 0 = 0 convention."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    mask = x > 0
    out[mask] = x[mask] * np.log(x[mask])
    return out


def rho(M) -> float:
    """Sum of squared entries."""
    M = _as_matrix(M)
    return float(np.sum(M * M))


def entropy_h(M) -> float:
    """-sum m log m with 0 log 0 = 0."""
    return float(-np.sum(xlogx(_as_matrix(M))))


def square_gap(M, c: float) -> float:
    """RHS - LHS of the square-matrix inequality; >= 0 when c < c_q."""
    M = validate_row_stochastic(M)
    q, cols = M.shape
    if cols != q:
        raise ValueError(f"square_gap needs a square matrix, got {q} x {cols}")
    if q < 3:
        raise ValueError("q must be >= 3")
    if not c < c_q(q):
        raise DomainError(f"coefficient c = {c} is not below c_q = {c_q(q)}")
    lhs = entropy_h(M) / q + c * math.log(q * q - 2 * q + rho(M))
    rhs = math.log(q) + c * math.log((q - 1) ** 2)
    return rhs - lhs


def extend_matrix(M) -> np.ndarray:
    """Extend a q x k row-stochastic matrix to q x q: first k columns scaled
    by k/q, the remaining q-k columns filled with 1/q.

    Asserts the two transform identities
        rho(ext) = (k/q)((k/q) rho(M) - 1) + 1
        log k - h(M)/q = (q/k)(log q - h(ext)/q)
    before returning.
    """
    M = validate_row_stochastic(M)
    q, k = M.shape
    if q < k:
        raise ValueError(f"need q >= k, got {q} x {k}")
    ext = np.full((q, q), 1.0 / q)
    ext[:, :k] = M * (k / q)
    predicted_rho = (k / q) * ((k / q) * rho(M) - 1.0) + 1.0
    assert abs(rho(ext) - predicted_rho) < 1e-10
    lhs_ent = math.log(k) - entropy_h(M) / q
    rhs_ent = (q / k) * (math.log(q) - entropy_h(ext) / q)
    assert abs(lhs_ent - rhs_ent) < 1e-10
    return ext


def rect_coefficient_bound(q: int, k: int) -> float:
    """Largest admissible coefficient for the rectangular inequality."""
    return (k - 1) / (q - 1) * c_q(q)


def rect_gap(M, c: float) -> float:
    """RHS - LHS of the rectangular inequality; >= 0 when c is admissible."""
    M = validate_row_stochastic(M)
    q, k = M.shape
    if q < 3 or k > q:
        raise ValueError(f"need q >= 3 and k <= q, got {q} x {k}")
    if not c < rect_coefficient_bound(q, k):
        raise DomainError(
            f"coefficient c = {c} is not below (k-1)/(q-1) c_q = "
            f"{rect_coefficient_bound(q, k)}"
        )
    lhs = entropy_h(M) / q + c * math.log(k * q - k - q + (k / q) * rho(M))
    rhs = math.log(k) + c * math.log((q - 1) * (k - 1))
    return rhs - lhs


def rect_gap_second_form(M, c: float) -> float:
    """The equivalent logarithm-ratio form of the rectangular inequality gap."""
    M = validate_row_stochastic(M)
    q, k = M.shape
    return (
        math.log(k)
        - entropy_h(M) / q
        - c * math.log1p(((k / q) * rho(M) - 1.0) / ((q - 1) * (k - 1)))
    )


def square_gap_batch(mats: np.ndarray, c: float) -> np.ndarray:
    """Vectorised square_gap over a stack of q x q row-stochastic matrices."""
    q = mats.shape[1]
    if not c < c_q(q):
        raise DomainError(f"coefficient c = {c} is not below c_q = {c_q(q)}")
    h = -np.sum(xlogx(mats), axis=(1, 2))
    r = np.sum(mats * mats, axis=(1, 2))
    lhs = h / q + c * np.log(q * q - 2 * q + r)
    return math.log(q) + c * math.log((q - 1) ** 2) - lhs


def rect_gap_batch(mats: np.ndarray, c: float) -> np.ndarray:
    """Vectorised rect_gap over a stack of q x k row-stochastic matrices."""
    q, k = mats.shape[1], mats.shape[2]
    if not c < rect_coefficient_bound(q, k):
        raise DomainError("coefficient not admissible")
    h = -np.sum(xlogx(mats), axis=(1, 2))
    r = np.sum(mats * mats, axis=(1, 2))
    lhs = h / q + c * np.log(k * q - k - q + (k / q) * r)
    return math.log(k) + c * math.log((q - 1) * (k - 1)) - lhs


# ---------------------------------------------------------------------------
# Overlap functionals


def f_ab(g: BaseGraph, a: np.ndarray, b: np.ndarray) -> float:
    """First-moment overlap functional
    f(a, b) = -sum_v sum_i a log a + sum_e sum_{i != i'} b log(a a' / b).

    ``a`` has shape (|V|, k); ``b`` has shape (|E|, k, k) with the diagonal
    (i, i) cells unused and required to be zero.
    """
    validate(g)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    k = a.shape[1]
    total = -float(np.sum(xlogx(a)))
    for e, (tail, head) in enumerate(g.edges):
        for i in range(k):
            if b[e, i, i] != 0:
                raise ValueError(f"edge {e}: diagonal overlap b[{i},{i}] must be 0")
            for i2 in range(k):
                if i2 == i:
                    continue
                bev = b[e, i, i2]
                if bev == 0:
                    continue
                prod = a[tail, i] * a[head, i2]
                if prod <= 0:
                    raise ValueError(
                        f"edge {e}: b[{i},{i2}] > 0 but an endpoint fraction is 0"
                    )
                total += bev * math.log(prod / bev)
    return total


def b_star(g: BaseGraph, a: np.ndarray) -> np.ndarray:
    """Per-edge maximiser of f in b for fixed a:
    b*_{e,i,i'} = a_{v,i} a_{v',i'} / z_e with z_e = 1 - <a_v, a_v'>."""
    validate(g)
    a = np.asarray(a, dtype=float)
    k = a.shape[1]
    out = np.zeros((g.num_edges, k, k))
    for e, (tail, head) in enumerate(g.edges):
        z = 1.0 - float(np.dot(a[tail], a[head]))
        if z <= 0:
            raise DegenerateEdgeError(
                f"edge {e}: fully correlated endpoint rows (z_e = {z})"
            )
        out[e] = np.outer(a[tail], a[head]) / z
        np.fill_diagonal(out[e], 0.0)
    return out


def f_at_b_star(g: BaseGraph, a: np.ndarray) -> float:
    """f(a, b*(a)) = h(a) + sum_e log(1 - <a_v, a_v'>)."""
    validate(g)
    a = np.asarray(a, dtype=float)
    total = -float(np.sum(xlogx(a)))
    for tail, head in g.edges:
        z = 1.0 - float(np.dot(a[tail], a[head]))
        if z <= 0:
            raise DegenerateEdgeError("fully correlated endpoint rows")
        total += math.log(z)
    return total


def g_of_a(a: np.ndarray, d: int, k: int) -> float:
    """Upper envelope used for complete bases:
    g(a) = h(a) + C(d+1, 2) log(1 - (d+1)/(dk) + rho(a)/(d(d+1)))."""
    a = np.asarray(a, dtype=float)
    h = -float(np.sum(xlogx(a)))
    r = float(np.sum(a * a))
    return h + math.comb(d + 1, 2) * math.log(
        1.0 - (d + 1) / (d * k) + r / (d * (d + 1))
    )


def f_AB(g: BaseGraph, A: np.ndarray, B: np.ndarray) -> float:
    """Second-moment overlap functional over pair profiles.

    ``A`` has shape (|V|, k, k); ``B`` has shape (|E|, k, k, k, k) indexed
    [e, i, j, i', j'], supported on i != i', j != j'.
    """
    validate(g)
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    k = A.shape[1]
    total = -float(np.sum(xlogx(A)))
    for e, (tail, head) in enumerate(g.edges):
        for i in range(k):
            for j in range(k):
                for i2 in range(k):
                    for j2 in range(k):
                        bev = B[e, i, j, i2, j2]
                        if bev == 0:
                            continue
                        if i == i2 or j == j2:
                            raise ValueError(
                                "pair overlap supported outside the proper region"
                            )
                        prod = A[tail, i, j] * A[head, i2, j2]
                        total += bev * math.log(prod / bev)
    return total


def F_A(g: BaseGraph, A: np.ndarray) -> float:
    """Outer-sum objective after the inner pair sums are integrated out:

    F(A) = (d-1) sum_v sum_{i,j} a log a
           - (k^2 (k-1)^2 / 2) sum_{e=vv'} [ (1/(2 lam)) sum (a_v + a_v' - 2/k^2)^2
             + (1/(2 lam')) sum (a_v - a_v')^2
             + (2/(k^2 (k-1)^2)) log(1/(k^2 (k-1)^2)) ].
    """
    d = validate(g)
    A = np.asarray(A, dtype=float)
    k = A.shape[1]
    lam = (k - 1) ** 2 + 1
    lamp = (k - 1) ** 2 - 1
    scale = k * k * (k - 1) ** 2
    total = (d - 1) * float(np.sum(xlogx(A)))
    const = (2.0 / scale) * math.log(1.0 / scale)
    acc = 0.0
    for tail, head in g.edges:
        plus = A[tail] + A[head] - 2.0 / (k * k)
        minus = A[tail] - A[head]
        acc += (
            float(np.sum(plus * plus)) / (2 * lam)
            + float(np.sum(minus * minus)) / (2 * lamp)
            + const
        )
    return total - (scale / 2.0) * acc


def uniform_pair_profile(g: BaseGraph, k: int) -> np.ndarray:
    return np.full((g.num_vertices, k, k), 1.0 / (k * k))


def uniform_profile(g: BaseGraph, k: int) -> np.ndarray:
    return np.full((g.num_vertices, k), 1.0 / k)


# ---------------------------------------------------------------------------
# Multi-start ascent


def project_rows_to_simplex(M: np.ndarray, total: float = 1.0) -> np.ndarray:
    """Euclidean projection of each row onto {x >= 0, sum x = total}."""
    M = np.asarray(M, dtype=float)
    out = np.empty_like(M)
    for i, row in enumerate(M):
        u = np.sort(row)[::-1]
        css = np.cumsum(u) - total
        idx = np.arange(1, len(row) + 1)
        cond = u - css / idx > 0
        r = idx[cond][-1]
        theta = css[r - 1] / r
        out[i] = np.maximum(row - theta, 0.0)
    return out


def project_transportation(M: np.ndarray, margin: float) -> np.ndarray:
    """Approximate projection onto {M >= 0, all row and column sums = margin}
    by alternating row/column rescaling with nonnegativity clipping."""
    M = np.maximum(np.asarray(M, dtype=float), 0.0)
    M[M.sum() == 0] = margin  # degenerate all-zero input
    for _ in range(PROJECTION_MAX_ITERS):
        rs = M.sum(axis=1, keepdims=True)
        rs[rs == 0] = 1.0
        M = M * (margin / rs)
        cs = M.sum(axis=0, keepdims=True)
        cs[cs == 0] = 1.0
        M = M * (margin / cs)
        err = max(
            float(np.max(np.abs(M.sum(axis=1) - margin))),
            float(np.max(np.abs(M.sum(axis=0) - margin))),
        )
        if err < PROJECTION_TOL:
            break
    return M


@dataclass
class AscentReport:
    objective: str
    best_point: np.ndarray
    best_value: float
    uniform_value: float
    gap_to_uniform: float
    grad_norm_at_uniform: float
    trials: int


def _ascend(x0, value_fn, grad_fn, project_fn, max_iters=400, floor=1e-12):
    x = project_fn(x0)
    x = np.maximum(x, floor)
    x = project_fn(x)
    val = value_fn(x)
    step = 0.5
    for _ in range(max_iters):
        grad = grad_fn(x)
        improved = False
        while step > 1e-14:
            cand = project_fn(np.maximum(x + step * grad, floor))
            cand_val = value_fn(cand)
            if cand_val > val + 1e-15:
                x, val = cand, cand_val
                improved = True
                step *= 1.5
                break
            step *= 0.5
        if not improved:
            break
    return x, val


def _projected_grad_norm(grad: np.ndarray, kind: str) -> float:
    """Norm of the gradient projected on the constraint tangent space."""
    if kind == "rows":
        centered = grad - grad.mean(axis=-1, keepdims=True)
    else:  # doubly stochastic: double centering per matrix
        centered = grad - grad.mean(axis=-1, keepdims=True)
        centered = centered - centered.mean(axis=-2, keepdims=True)
    return float(np.sqrt(np.sum(centered * centered)))


def verify_max_uniform(
    objective: str,
    *,
    g: BaseGraph | None = None,
    k: int,
    q: int | None = None,
    c: float | None = None,
    trials: int = 200,
    seed: int = 0,
) -> AscentReport:
    """Search for profiles beating the uniform one; report the best found.

    objective: "f" (first-moment functional f(a, b*(a)) over per-vertex
    colour fractions of a complete base), "F" (second-moment outer
    functional over doubly-stochastic pair profiles), or "rect" (LHS of the
    rectangular inequality over q x k row-stochastic matrices at
    coefficient c).  A positive gap_to_uniform means the optimum is at the
    uniform point, as the corresponding theorem guarantees under its
    hypotheses; a gap below -1e-9 is a reported finding.
    """
    rng = np.random.default_rng(seed)

    if objective == "f":
        if g is None:
            raise ValueError("objective 'f' needs a base graph")
        d = validate(g)
        if not (d * d - 1) / (d * math.log(d)) < 2 * (k - 1):
            raise DomainError("hypothesis (d^2-1)/(d log d) < 2(k-1) fails")
        uniform = uniform_profile(g, k)

        def value_fn(a):
            try:
                return f_at_b_star(g, a)
            except DegenerateEdgeError:
                return -math.inf  # boundary point; reject in line search

        def grad_fn(a):
            grad = -(np.log(np.maximum(a, 1e-300)) + 1.0)
            for tail, head in g.edges:
                z = max(1.0 - float(np.dot(a[tail], a[head])), 1e-300)
                grad[tail] -= a[head] / z
                grad[head] -= a[tail] / z
            return grad

        def project_fn(a):
            return project_rows_to_simplex(a, 1.0)

        def sample():
            return rng.dirichlet(np.ones(k), size=g.num_vertices)

        grad_kind = "rows"

    elif objective == "F":
        if g is None:
            raise ValueError("objective 'F' needs a base graph")
        d = validate(g)
        if not d < ell_threshold(k):
            raise DomainError("objective 'F' needs d < ell_k")
        uniform = uniform_pair_profile(g, k)
        lam = (k - 1) ** 2 + 1
        lamp = (k - 1) ** 2 - 1
        scale = k * k * (k - 1) ** 2

        def value_fn(A):
            return F_A(g, A)

        def grad_fn(A):
            grad = (d - 1) * (np.log(np.maximum(A, 1e-300)) + 1.0)
            for tail, head in g.edges:
                plus = A[tail] + A[head] - 2.0 / (k * k)
                minus = A[tail] - A[head]
                grad[tail] -= (scale / 2.0) * (plus / lam + minus / lamp)
                grad[head] -= (scale / 2.0) * (plus / lam - minus / lamp)
            return grad

        def project_fn(A):
            return np.stack([project_transportation(Av, 1.0 / k) for Av in A])

        def sample():
            raw = rng.gamma(1.0, size=(g.num_vertices, k, k))
            return project_fn(raw / raw.sum(axis=(1, 2), keepdims=True))

        grad_kind = "doubly"

    elif objective == "rect":
        if q is None or c is None:
            raise ValueError("objective 'rect' needs q and c")
        if not c < rect_coefficient_bound(q, k):
            raise DomainError("coefficient not admissible")
        uniform = np.full((q, k), 1.0 / k)

        def value_fn(M):
            return entropy_h(M) / q + c * math.log(
                k * q - k - q + (k / q) * rho(M)
            )

        def grad_fn(M):
            denom = k * q - k - q + (k / q) * rho(M)
            return -(np.log(np.maximum(M, 1e-300)) + 1.0) / q + (
                2.0 * c * k / (q * denom)
            ) * M

        def project_fn(M):
            return project_rows_to_simplex(M, 1.0)

        def sample():
            return rng.dirichlet(np.ones(k), size=q)

        grad_kind = "rows"

    else:
        raise ValueError(f"unknown objective {objective!r}")

    uniform_value = value_fn(uniform)
    grad_norm_unif = _projected_grad_norm(grad_fn(uniform), grad_kind)

    best_point, best_value = uniform, uniform_value
    for _ in range(trials):
        x0 = sample()
        x, val = _ascend(x0, value_fn, grad_fn, project_fn)
        if val > best_value:
            best_point, best_value = x, val

    return AscentReport(
        objective=objective,
        best_point=best_point,
        best_value=best_value,
        uniform_value=uniform_value,
        gap_to_uniform=uniform_value - best_value,
        grad_norm_at_uniform=grad_norm_unif,
        trials=trials,
    )

"""Element-marching driver: damped Newton with a descent-based initial guess.

Elements are solved in causal order; each solved element caches its values at
the shifted Lobatto points so that later elements assemble their history term
without re-expanding earlier solutions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .discretization import (
    ElementSolution,
    ProblemSpec,
    element_system,
    validate_problem,
)
from .mesh import Mesh, locate
from .orthopoly import JacobiParams, legendre_table
from .quadrature import RuleKind, gauss_rule, shift_nodes

__all__ = [
    "SolverOptions",
    "PiecewiseSolution",
    "SolverError",
    "NewtonDivergedError",
    "SingularJacobianError",
    "QuadratureConvergenceError",
    "solve",
    "newton",
    "steepest_descent_init",
    "evaluate",
    "forward_apply",
]


class SolverError(RuntimeError):
    pass


class NewtonDivergedError(SolverError):
    def __init__(self, n: int | None, last_residual_norm: float):
        self.n = n
        self.last_residual_norm = last_residual_norm
        where = f" on element {n}" if n is not None else ""
        super().__init__(
            f"Newton iteration did not converge{where} "
            f"(last residual max-norm {last_residual_norm:.3e})"
        )


class SingularJacobianError(SolverError):
    def __init__(self, n: int | None, iteration: int):
        self.n = n
        self.iteration = iteration
        where = f" on element {n}" if n is not None else ""
        super().__init__(f"singular Jacobian{where} at Newton iteration {iteration}")


class QuadratureConvergenceError(SolverError):
    pass


@dataclass(frozen=True)
class SolverOptions:
    """Knobs for the per-element nonlinear solves.

    ``init_constant`` seeds the first element with the constant function of
    that value; nonlinearities whose derivative vanishes at u = 0 (powers of
    u) or that are undefined there (logarithms, roots) need a nonzero seed.
    """

    newton_tol: float = 1e-12
    newton_max_iter: int = 50
    descent_steps: int = 50
    descent_step_size: float = 1e-2
    linear_solver: str = "lu_partial_pivot"
    init_constant: float = 0.0

    def __post_init__(self):
        if self.newton_tol <= 0.0:
            raise ValueError("newton_tol must be positive")
        if self.newton_max_iter < 1 or self.descent_steps < 0:
            raise ValueError("iteration counts out of range")
        if self.linear_solver != "lu_partial_pivot":
            raise ValueError(f"unknown linear solver {self.linear_solver!r}")


@dataclass
class PiecewiseSolution:
    """Per-element shifted-Legendre expansions, evaluable on (0, T]."""

    mesh: Mesh
    elements: list[ElementSolution] = field(repr=False)

    def __post_init__(self):
        if len(self.elements) != self.mesh.N:
            raise ValueError("solution must carry one entry per element")

    def __call__(self, t):
        return evaluate(self, t)

    def coefficients(self, n: int) -> np.ndarray:
        return self.elements[n - 1].coeffs


def _max_norm(r) -> float:
    r = np.asarray(r, dtype=float)
    return float(np.max(np.abs(r))) if r.size else 0.0


def _residual_norm(residual_fn, u):
    with np.errstate(all="ignore"):
        r = np.asarray(residual_fn(u), dtype=float)
    norm = _max_norm(r) if np.all(np.isfinite(r)) else np.inf
    return r, norm


def newton(residual_fn, jacobian_fn, init, options: SolverOptions, n: int | None = None):
    """Damped Newton iteration on a dense square system.

    Full steps are taken by default; the step is halved (up to 20 times) only
    when the least-squares merit of the residual fails to decrease or turns
    non-finite.  Convergence is declared on the residual max-norm.
    """
    u = np.array(init, dtype=float).ravel()
    r, norm = _residual_norm(residual_fn, u)
    g = float(r @ r) if np.isfinite(norm) else np.inf
    for it in range(options.newton_max_iter):
        if norm <= options.newton_tol:
            return u
        if not np.isfinite(norm):
            raise NewtonDivergedError(n, norm)
        with np.errstate(all="ignore"):
            J = np.atleast_2d(np.asarray(jacobian_fn(u), dtype=float))
        if not np.all(np.isfinite(J)):
            raise SingularJacobianError(n, it)
        try:
            step = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError:
            raise SingularJacobianError(n, it) from None
        if not np.all(np.isfinite(step)):
            raise SingularJacobianError(n, it)

        # the Newton direction is a descent direction for g = |r|^2 / 2, so
        # backtracking on g succeeds whenever J is nonsingular
        scale = 1.0
        for _ in range(20):
            cand = u + scale * step
            r_new, norm_new = _residual_norm(residual_fn, cand)
            g_new = float(r_new @ r_new) if np.isfinite(norm_new) else np.inf
            if g_new < g * (1.0 - 1e-4 * scale) or norm_new <= options.newton_tol:
                u, r, norm, g = cand, r_new, norm_new, g_new
                break
            scale *= 0.5
        else:
            raise NewtonDivergedError(n, norm)
    if norm <= options.newton_tol:
        return u
    raise NewtonDivergedError(n, norm)


def steepest_descent_init(
    residual_fn,
    jacobian_fn,
    dim: int,
    options: SolverOptions,
    warm_start=None,
):
    """Descent phase producing Newton's starting point (best effort).

    Runs fixed-step gradient descent on g(u) = ||r(u)||^2 / 2 with gradient
    J^T r, halving the step when g would increase, and returns the iterate
    with the smallest g seen.  A stationary start (zero gradient) is returned
    unchanged.
    """
    if warm_start is None:
        u = np.zeros(dim)
    else:
        u = np.array(warm_start, dtype=float).ravel()
        if u.size != dim:
            padded = np.zeros(dim)
            padded[: min(dim, u.size)] = u[: min(dim, u.size)]
            u = padded
    r, norm = _residual_norm(residual_fn, u)
    if not np.isfinite(norm):
        return u
    g = 0.5 * float(r @ r)
    best_u, best_g = u.copy(), g
    for _ in range(options.descent_steps):
        with np.errstate(all="ignore"):
            J = np.atleast_2d(np.asarray(jacobian_fn(u), dtype=float))
        if not np.all(np.isfinite(J)):
            break
        grad = J.T @ r
        if not np.all(np.isfinite(grad)) or np.all(grad == 0.0):
            break
        step = options.descent_step_size
        for _ in range(30):
            cand = u - step * grad
            r_c, norm_c = _residual_norm(residual_fn, cand)
            g_c = 0.5 * float(r_c @ r_c) if np.isfinite(norm_c) else np.inf
            if g_c < g:
                break
            step *= 0.5
        else:
            break
        u, r, g = cand, r_c, g_c
        if g < best_g:
            best_u, best_g = u.copy(), g
    return best_u


def _lobatto_cache(mesh: Mesh, n: int, coeffs: np.ndarray):
    elem = mesh.element(n)
    rule = gauss_rule(RuleKind.GAUSS_LOBATTO, None, elem.degree)
    pts = shift_nodes(rule, elem)
    vals = coeffs @ legendre_table(elem.degree, rule.nodes)
    return pts, vals


def solve(problem: ProblemSpec, mesh: Mesh, options: SolverOptions | None = None) -> PiecewiseSolution:
    """March elements 1..N, solving each local collocation system.

    Linear problems take one LU solve per element; nonlinear ones run the
    descent initializer followed by damped Newton.  Later elements warm-start
    from the previous element's coefficients.
    """
    options = options or SolverOptions()
    validate_problem(problem, mesh)
    solved: list[ElementSolution] = []
    prev_coeffs = None
    for n in range(1, mesh.N + 1):
        system = element_system(problem, mesh, n, solved)
        dim = mesh.element(n).degree + 1
        if problem.linear:
            A = system.operator.linear_matrix()
            try:
                coeffs = np.linalg.solve(A, system.rhs - system.history)
            except np.linalg.LinAlgError:
                raise SingularJacobianError(n, 0) from None
        else:
            if prev_coeffs is None:
                warm = np.zeros(dim)
                warm[0] = options.init_constant
            else:
                warm = prev_coeffs
            start = steepest_descent_init(
                system.residual, system.jacobian, dim, options, warm_start=warm
            )
            coeffs = newton(system.residual, system.jacobian, start, options, n=n)
        pts, vals = _lobatto_cache(mesh, n, coeffs)
        solved.append(ElementSolution(n, coeffs, pts, vals))
        prev_coeffs = coeffs
    return PiecewiseSolution(mesh, solved)


def evaluate(solution: PiecewiseSolution, t):
    """Value of the piecewise expansion at t in (0, T] (vectorized).

    t = 0 is evaluated as the limit from inside the first element.
    """
    mesh = solution.mesh
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    idx = locate(np.where(t_arr <= 0.0, mesh.breakpoints[1], t_arr), mesh)
    if np.any(t_arr < 0.0):
        raise ValueError("evaluation point below 0")
    idx = np.where(t_arr <= 0.0, 1, idx)
    out = np.empty_like(t_arr)
    for n in np.unique(idx):
        elem = mesh.element(int(n))
        sel = idx == n
        x = np.clip((2.0 * t_arr[sel] - elem.left - elem.right) / elem.width, -1.0, 1.0)
        coeffs = solution.elements[int(n) - 1].coeffs
        out[sel] = coeffs @ legendre_table(elem.degree, x)
    return float(out[0]) if np.ndim(t) == 0 else out


def _spend_panel(budget):
    budget[0] -= 1
    if budget[0] < 0:
        raise QuadratureConvergenceError("panel refinement did not converge")


def _panel_regular(F, a, b, npts, tol, depth, budget):
    """Adaptive Gauss-Legendre panel for a smooth stretch of the integrand."""
    _spend_panel(budget)
    r1 = gauss_rule(RuleKind.GAUSS_LEGENDRE, None, npts - 1)
    r2 = gauss_rule(RuleKind.GAUSS_LEGENDRE, None, 2 * npts - 1)
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    i1 = half * float(r1.weights @ F(mid + half * r1.nodes))
    i2 = half * float(r2.weights @ F(mid + half * r2.nodes))
    if abs(i2 - i1) <= tol or (b - a) < 1e-15 * max(1.0, abs(b)):
        return i2
    if depth <= 0:
        raise QuadratureConvergenceError("panel refinement did not converge")
    m = 0.5 * (a + b)
    return _panel_regular(F, a, m, npts, 0.5 * tol, depth - 1, budget) + _panel_regular(
        F, m, b, npts, 0.5 * tol, depth - 1, budget
    )


def _panel_singular(F, a, t, alpha, npts, tol, depth, budget):
    """Adaptive Gauss-Jacobi panel [a, t] absorbing the (t-s)^(alpha-1) factor."""
    _spend_panel(budget)

    def gj(n):
        rule = gauss_rule(RuleKind.GAUSS_JACOBI, JacobiParams(alpha - 1.0, 0.0), n - 1)
        s = t - 0.5 * (t - a) * (1.0 - rule.nodes)
        return (0.5 * (t - a)) ** alpha * float(rule.weights @ F(s))

    i1, i2 = gj(npts), gj(2 * npts)
    if abs(i2 - i1) <= tol or (t - a) < 1e-15 * max(1.0, abs(t)):
        return i2
    if depth <= 0:
        raise QuadratureConvergenceError("singular panel refinement did not converge")
    m = 0.5 * (a + t)
    return _panel_regular(
        lambda s: (t - s) ** (alpha - 1.0) * F(s), a, m, npts, 0.5 * tol, depth - 1, budget
    ) + _panel_singular(F, m, t, alpha, npts, 0.5 * tol, depth - 1, budget)


def forward_apply(
    problem: ProblemSpec,
    u_fn,
    t: float,
    oracle_order: int = 16,
    rel_tol: float = 1e-10,
    breakpoints: Sequence[float] = (),
) -> float:
    """Apply the integral operator to an arbitrary function at time t.

    Computes ``int_0^t (t-s)^(alpha-1) kappa(t, s) psi(t, s, u(s)) ds`` by
    composite quadrature: Gauss-Jacobi on the final (singular) panel,
    Gauss-Legendre on history panels, with panel subdivision until the
    node-doubling estimate converges.  ``breakpoints`` force panel edges,
    e.g. at kinks of u or of the kernel.  Used for manufactured right-hand
    sides and residual audits.
    """
    if t <= 0.0:
        return 0.0
    alpha = problem.alpha

    def F(s):
        s = np.asarray(s, dtype=float)
        u = np.asarray(u_fn(s), dtype=float)
        return np.broadcast_to(problem.kappa(t, s) * problem.psi(t, s, u), s.shape)

    def W(s):
        # history panels carry the kernel factor explicitly
        return (t - np.asarray(s, dtype=float)) ** (alpha - 1.0) * F(s)

    edges = [0.0] + sorted({float(b) for b in breakpoints if 0.0 < b < t}) + [t]
    # crude first pass fixes the absolute tolerance for panel acceptance
    coarse = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        if b == t:
            rule = gauss_rule(RuleKind.GAUSS_JACOBI, JacobiParams(alpha - 1.0, 0.0), oracle_order)
            s = t - 0.5 * (t - a) * (1.0 - rule.nodes)
            coarse += (0.5 * (t - a)) ** alpha * float(rule.weights @ F(s))
        else:
            rule = gauss_rule(RuleKind.GAUSS_LEGENDRE, None, oracle_order)
            mid, half = 0.5 * (a + b), 0.5 * (b - a)
            coarse += half * float(rule.weights @ W(mid + half * rule.nodes))
    tol = rel_tol * max(abs(coarse), 1e-30) / max(len(edges) - 1, 1)

    total = 0.0
    budget = [4000]  # shared panel allowance; exceeding it means stagnation
    for a, b in zip(edges[:-1], edges[1:]):
        if b == t:
            total += _panel_singular(F, a, t, alpha, oracle_order, tol, 40, budget)
        else:
            total += _panel_regular(W, a, b, oracle_order, tol, 40, budget)
    return total

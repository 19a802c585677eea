"""Per-element collocation systems for the weakly singular Volterra equation.

For element n the unknowns are the shifted-Legendre coefficients of the local
solution.  The equation is collocated in coefficient space: the weighted
moment of the current-element integral (assembled with Gauss-Jacobi product
quadrature) must match the corresponding moments of the right-hand side and
of the history accumulated over elements 1..n-1.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .mesh import Mesh
from .orthopoly import JacobiParams, legendre_table
from .quadrature import RuleKind, gauss_rule, history_weights_batch, shift_nodes

__all__ = [
    "ProblemSpec",
    "ElementSystem",
    "ElementSolution",
    "ProblemAssumptionWarning",
    "element_operator",
    "rhs_coeffs",
    "history_coeffs",
    "local_residual",
    "local_jacobian",
    "assemble_linear",
    "validate_problem",
]


class ProblemAssumptionWarning(UserWarning):
    """A well-posedness assumption failed a spot check (never an error)."""


@dataclass(frozen=True)
class ProblemSpec:
    """One Abel integral equation instance.

    The equation is ``int_0^t (t-s)^(alpha-1) kappa(t, s) psi(t, s, u(s)) ds
    = f(t)`` on (0, T].  All callables must accept numpy arrays and broadcast;
    ``psi`` and ``dpsi_du`` take the evaluation time t as first argument since
    some nonlinearities couple t into the integrand.  Set ``linear`` when
    psi(t, s, u) == u to enable the direct linear-solve path.
    """

    alpha: float
    T: float
    kappa: Callable
    psi: Callable
    dpsi_du: Callable
    f: Callable
    linear: bool = False

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha}")
        if not self.T > 0.0:
            raise ValueError("T must be positive")
        if self.linear:
            s = np.linspace(0.1, 0.9, 4) * self.T
            u = np.array([-1.3, -0.2, 0.4, 2.0])
            if np.max(np.abs(self.psi(s, s, u) - u)) > 1e-12:
                raise ValueError("linear flag set but psi(t, s, u) != u")


@dataclass
class ElementSolution:
    """Solved coefficients of one element plus cached Lobatto-point samples.

    The cached solution values at the shifted Lobatto points are what later
    elements contract against the product-integration weights, so history
    assembly never re-evaluates the local expansion.
    """

    n: int
    coeffs: np.ndarray
    lobatto_points: np.ndarray
    lobatto_u: np.ndarray


@dataclass
class ElementSystem:
    """Residual/Jacobian closure for one element's nonlinear system."""

    n: int
    residual: Callable[[np.ndarray], np.ndarray]
    jacobian: Callable[[np.ndarray], np.ndarray]
    history: np.ndarray
    rhs: np.ndarray
    operator: "ElementOperator" = field(repr=False)


class ElementOperator:
    """Precomputed quadrature tables for one element.

    Everything that does not depend on the coefficient vector (node images,
    Legendre tables, the kernel values at the tensor quadrature grid) is
    built once; residual and Jacobian evaluations are then a handful of
    vectorized contractions.
    """

    def __init__(self, problem: ProblemSpec, mesh: Mesh, n: int):
        self.problem = problem
        self.mesh = mesh
        self.n = n
        elem = mesh.element(n)
        self.elem = elem
        a, h, M = elem.left, elem.width, elem.degree
        alpha = problem.alpha

        gl = gauss_rule(RuleKind.GAUSS_LEGENDRE, None, M)
        gj = gauss_rule(RuleKind.GAUSS_JACOBI, JacobiParams(alpha - 1.0, 0.0), M)
        self.gl = gl
        self.t_nodes = shift_nodes(gl, elem)
        # reference image of the rescaled inner nodes is mesh independent
        x_sigma = 0.5 * (1.0 + gl.nodes)[:, None] * (1.0 + gj.nodes)[None, :] - 1.0
        self.sigma_nodes = a + 0.25 * h * (1.0 + gl.nodes)[:, None] * (1.0 + gj.nodes)[None, :]
        self.P = legendre_table(M, gl.nodes)            # (p, i)
        self.Q = legendre_table(M, x_sigma)             # (q, i, j)
        # (t_i - t_{n-1})^alpha from the width, not a difference of times
        self.prefac = (0.5 * h * (1.0 + gl.nodes)) ** alpha * gl.weights
        self.w_inner = gj.weights
        self.proj_scale = (2.0 * np.arange(M + 1) + 1.0) / 2.0
        self.sys_scale = (2.0 * np.arange(M + 1) + 1.0) / 2.0 ** (1.0 + alpha)
        self.kappa_grid = np.broadcast_to(
            problem.kappa(self.t_nodes[:, None], self.sigma_nodes),
            self.sigma_nodes.shape,
        )

    def u_at_sigma(self, coeffs: np.ndarray) -> np.ndarray:
        return np.einsum("q,qij->ij", coeffs, self.Q)

    def weighted_moments(self, coeffs: np.ndarray) -> np.ndarray:
        """Coefficient-space image of the current-element singular integral."""
        psi = self.problem.psi(
            self.t_nodes[:, None], self.sigma_nodes, self.u_at_sigma(coeffs)
        )
        inner = (self.kappa_grid * psi) @ self.w_inner
        return self.sys_scale * (self.P @ (self.prefac * inner))

    def jacobian(self, coeffs: np.ndarray) -> np.ndarray:
        dpsi = self.problem.dpsi_du(
            self.t_nodes[:, None], self.sigma_nodes, self.u_at_sigma(coeffs)
        )
        core = self.kappa_grid * dpsi * self.w_inner[None, :]
        J = np.einsum("pi,ij,qij->pq", self.P * self.prefac[None, :], core, self.Q)
        return self.sys_scale[:, None] * J

    def linear_matrix(self) -> np.ndarray:
        core = self.kappa_grid * self.w_inner[None, :]
        A = np.einsum("pi,ij,qij->pq", self.P * self.prefac[None, :], core, self.Q)
        return self.sys_scale[:, None] * A

    def project(self, values_at_nodes: np.ndarray) -> np.ndarray:
        """Discrete Legendre coefficients of values sampled at the Gauss nodes."""
        return self.proj_scale * (self.P @ (self.gl.weights * values_at_nodes))

    def rhs(self) -> np.ndarray:
        return self.project(np.broadcast_to(self.problem.f(self.t_nodes), self.t_nodes.shape))

    def history(self, prior: Sequence[ElementSolution]) -> np.ndarray:
        if not prior:
            return np.zeros(self.elem.degree + 1)
        if len(prior) != self.n - 1:
            raise ValueError(f"element {self.n} needs solutions for 1..{self.n - 1}")
        vals = np.array([_history_value(self.problem, self.mesh, t, prior)
                         for t in self.t_nodes])
        return self.project(vals)


def _history_value(problem: ProblemSpec, mesh: Mesh, t: float, prior) -> float:
    """Accumulated singular integral over all solved elements at time t."""
    alpha = problem.alpha
    bp = mesh.breakpoints
    total = 0.0
    # group contiguous runs of equal degree so the weight solve is batched
    k = 0
    while k < len(prior):
        d = prior[k].lobatto_points.size - 1
        k_end = k
        while k_end < len(prior) and prior[k_end].lobatto_points.size - 1 == d:
            k_end += 1
        lefts = bp[k:k_end]
        rights = bp[k + 1 : k_end + 1]
        w = history_weights_batch(lefts, rights, d, t, alpha)
        S = np.stack([prior[m].lobatto_points for m in range(k, k_end)])
        U = np.stack([prior[m].lobatto_u for m in range(k, k_end)])
        total += float(np.sum(w * problem.kappa(t, S) * problem.psi(t, S, U)))
        k = k_end
    return total


def element_operator(problem: ProblemSpec, mesh: Mesh, n: int) -> ElementOperator:
    return ElementOperator(problem, mesh, n)


def element_system(
    problem: ProblemSpec, mesh: Mesh, n: int, prior: Sequence[ElementSolution]
) -> ElementSystem:
    """Assemble residual and Jacobian closures for element n."""
    op = ElementOperator(problem, mesh, n)
    rhs = op.rhs()
    hist = op.history(prior)
    # the accumulated history enters the element equation on the right-hand
    # side with a negative sign: current-element moments = rhs - history
    target = rhs - hist

    def residual(coeffs):
        return op.weighted_moments(np.asarray(coeffs, dtype=float)) - target

    return ElementSystem(n, residual, op.jacobian, hist, rhs, op)


def rhs_coeffs(problem: ProblemSpec, mesh: Mesh, n: int) -> np.ndarray:
    """Legendre moments of f on element n (Gauss-point projection)."""
    return ElementOperator(problem, mesh, n).rhs()


def history_coeffs(
    problem: ProblemSpec, mesh: Mesh, n: int, prior: Sequence[ElementSolution]
) -> np.ndarray:
    """Legendre moments of the accumulated history integral on element n."""
    return ElementOperator(problem, mesh, n).history(prior)


def local_residual(
    problem: ProblemSpec, mesh: Mesh, n: int, history: np.ndarray, coeffs
) -> np.ndarray:
    """Collocation residual of element n at the given coefficient vector."""
    op = ElementOperator(problem, mesh, n)
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape != (op.elem.degree + 1,):
        raise ValueError("coefficient vector must have degree+1 entries")
    return op.weighted_moments(coeffs) - op.rhs() + np.asarray(history, dtype=float)


def local_jacobian(problem: ProblemSpec, mesh: Mesh, n: int, coeffs) -> np.ndarray:
    """Derivative of the element residual with respect to the coefficients."""
    return ElementOperator(problem, mesh, n).jacobian(np.asarray(coeffs, dtype=float))


def assemble_linear(
    problem: ProblemSpec, mesh: Mesh, n: int, prior: Sequence[ElementSolution] = ()
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Matrix and load vectors (A, history, rhs) of the linear-case system.

    The element coefficients solve ``A u = rhs - history``.
    """
    if not problem.linear:
        raise ValueError("assemble_linear requires the linear flag")
    op = ElementOperator(problem, mesh, n)
    return op.linear_matrix(), op.history(prior), op.rhs()


def _quiet_eval(fn, *args):
    with np.errstate(all="ignore"):
        try:
            return np.asarray(fn(*args), dtype=float)
        except (ValueError, FloatingPointError, ZeroDivisionError):
            return None


def validate_problem(problem: ProblemSpec, mesh: Mesh) -> list[str]:
    """Spot-check well-posedness assumptions; violations only warn.

    Checked: f(0) = 0, the kernel does not vanish on the diagonal, and the
    solution derivative of the nonlinearity stays away from zero on a sample
    box.  Benchmarks with degenerate kernels or sign-changing derivatives are
    still solvable, so none of these aborts a run.
    """
    notes = []
    f0 = _quiet_eval(problem.f, np.array(0.0))
    fs = _quiet_eval(problem.f, np.linspace(0.2, 1.0, 5) * problem.T)
    scale = 1.0 if fs is None else max(1.0, float(np.nanmax(np.abs(fs))))
    if f0 is not None and np.isfinite(f0) and abs(float(f0)) > 1e-10 * scale:
        notes.append(f"f(0) = {float(f0):.3e} is not zero")

    ts = np.linspace(0.05, 1.0, 9) * problem.T
    diag = _quiet_eval(problem.kappa, ts, ts)
    if diag is not None:
        finite = diag[np.isfinite(diag)]
        if finite.size and np.min(np.abs(finite)) <= 1e-12 * max(1.0, np.max(np.abs(finite))):
            notes.append("kernel vanishes on the diagonal at a sampled point")

    uu = np.array([-2.0, -0.75, -0.1, 0.1, 0.75, 2.0])
    tg, ug = np.meshgrid(ts, uu)
    dv = _quiet_eval(problem.dpsi_du, tg, tg, ug)
    if dv is not None:
        finite = dv[np.isfinite(dv)]
        if finite.size and np.min(np.abs(finite)) < 1e-8:
            notes.append(
                "d psi/du approaches zero on the sampled range; "
                "uniqueness assumptions may fail"
            )

    for msg in notes:
        warnings.warn(msg, ProblemAssumptionWarning, stacklevel=2)
    return notes

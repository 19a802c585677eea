"""Gauss-type quadrature rules and product integration for the Abel kernel.

Three rule families are used by the collocation scheme:

* Gauss-Jacobi with weight (1-x)^(alpha-1): absorbs the kernel singularity
  on the current element exactly,
* Gauss-Legendre: collocation points and plain projections,
* Legendre-Gauss-Lobatto: interpolation points on already-solved elements.

The history of solved elements enters through product-integration weights
``w_j(t) = int_element (t-s)^(alpha-1) l_j(s) ds`` for the Lagrange basis on
the Lobatto points.  They are assembled from the modified moments of the
singular factor against shifted Legendre polynomials.
"""

from __future__ import annotations

import enum
import threading
from dataclasses import dataclass, field

import numpy as np
from scipy.special import roots_jacobi, roots_legendre

from .orthopoly import DOMAIN_TOL, Element, JacobiParams, legendre_table

__all__ = [
    "RuleKind",
    "QuadRule",
    "HistoryWeights",
    "HistoryAccuracyError",
    "gauss_rule",
    "shift_nodes",
    "singular_element_integral",
    "modified_moments",
    "history_weights",
    "lobatto_lagrange_coeffs",
]


class RuleKind(str, enum.Enum):
    GAUSS_JACOBI = "gauss_jacobi"
    GAUSS_LEGENDRE = "gauss_legendre"
    GAUSS_LOBATTO = "gauss_lobatto"


class HistoryAccuracyError(ArithmeticError):
    """Raised when product-integration weights fail the constant-sum check."""


@dataclass(frozen=True)
class QuadRule:
    """Nodes and weights of an (order+1)-point rule on [-1, 1]."""

    kind: RuleKind
    params: JacobiParams
    order: int
    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        n = self.order + 1
        if self.nodes.shape != (n,) or self.weights.shape != (n,):
            raise ValueError("rule must have order+1 nodes and weights")
        if np.any(np.diff(self.nodes) <= 0.0):
            raise ValueError("nodes must be strictly increasing")
        if np.any(self.weights <= 0.0):
            raise ValueError("weights must be positive")
        if self.kind is RuleKind.GAUSS_LOBATTO and (
            self.nodes[0] != -1.0 or self.nodes[-1] != 1.0
        ):
            raise ValueError("Lobatto endpoints must be exactly +-1")

    @property
    def degree_of_exactness(self) -> int:
        if self.kind is RuleKind.GAUSS_LOBATTO:
            return 2 * self.order - 1
        return 2 * self.order + 1


_rule_cache: dict[tuple, QuadRule] = {}
_rule_lock = threading.Lock()


def gauss_rule(kind: RuleKind | str, params: JacobiParams | None, order: int) -> QuadRule:
    """Construct (and memoize) a quadrature rule with order+1 nodes.

    Gauss rules integrate polynomials of degree <= 2*order+1 exactly against
    the weight (1-x)^alpha (1+x)^beta; Lobatto is exact to 2*order-1 with the
    unit weight and includes both endpoints.
    """
    kind = RuleKind(kind)
    if order < 1:
        raise ValueError("rule order must be >= 1")
    if kind is RuleKind.GAUSS_LEGENDRE and params is None:
        params = JacobiParams(0.0, 0.0)
    if kind is RuleKind.GAUSS_LOBATTO:
        if params is None:
            params = JacobiParams(0.0, 0.0)
        if params != JacobiParams(0.0, 0.0):
            raise ValueError("Lobatto rule is defined for the unit weight only")
    if params is None:
        raise ValueError("Jacobi rule needs weight parameters")

    key = (kind, params.alpha, params.beta, order)
    rule = _rule_cache.get(key)
    if rule is not None:
        return rule

    if kind is RuleKind.GAUSS_LEGENDRE or (
        kind is RuleKind.GAUSS_JACOBI and params == JacobiParams(0.0, 0.0)
    ):
        x, w = roots_legendre(order + 1)
    elif kind is RuleKind.GAUSS_JACOBI:
        x, w = roots_jacobi(order + 1, params.alpha, params.beta)
    else:  # Lobatto: interior nodes are the zeros of P'_order
        if order == 1:
            x = np.array([-1.0, 1.0])
        else:
            interior, _ = roots_jacobi(order - 1, 1.0, 1.0)
            x = np.concatenate(([-1.0], interior, [1.0]))
        pm = legendre_table(order, x)[order]
        w = 2.0 / (order * (order + 1) * pm**2)

    rule = QuadRule(kind, params, order, np.asarray(x), np.asarray(w))
    with _rule_lock:
        _rule_cache.setdefault(key, rule)
    return rule


def shift_nodes(rule: QuadRule, elem: Element) -> np.ndarray:
    """Affine image of the rule's nodes on [elem.left, elem.right]."""
    return 0.5 * (elem.width * rule.nodes + elem.left + elem.right)


def singular_element_integral(g_at_mapped_nodes, elem: Element, t: float, alpha: float) -> float:
    """Weighted integral of g over (elem.left, t) against (t-s)^(alpha-1).

    ``g_at_mapped_nodes`` must hold g sampled at sigma(lambda_j, t), where
    lambda_j are the shifted Gauss-Jacobi(alpha-1, 0) nodes of the element.
    Exact whenever g is a polynomial of degree <= elem.degree.
    """
    g = np.asarray(g_at_mapped_nodes, dtype=float)
    if g.shape != (elem.degree + 1,):
        raise ValueError("need g at the element's degree+1 mapped Jacobi nodes")
    if not 0.0 < alpha <= 1.0:
        raise ValueError("alpha must lie in (0, 1]")
    if t <= elem.left:
        raise ValueError("evaluation point must lie strictly right of the element start")
    if t > elem.right + DOMAIN_TOL:
        raise ValueError("evaluation point beyond the element")
    rule = gauss_rule(RuleKind.GAUSS_JACOBI, JacobiParams(alpha - 1.0, 0.0), elem.degree)
    return (0.5 * (t - elem.left)) ** alpha * float(rule.weights @ g)


# ---------------------------------------------------------------------------
# Modified moments nu_p(c) = int_{-1}^{1} (c - x)^(alpha-1) P_p(x) dx, c >= 1.
#
# Near the singular limit c -> 1 the degree-ascending recurrence
#     (p+1+alpha) nu_{p+1} = (2p+1) c nu_p + (alpha-p) nu_{p-1}
# is stable.  For separated c the recurrence amplifies roundoff like the
# Legendre function P_p(c), so there the integrand is smooth and a fixed
# Gauss-Legendre rule is accurate instead.
# ---------------------------------------------------------------------------

_NEAR_FIELD_C = 1.2
_FAR_FIELD_POINTS = 64
_far_cache: dict[int, tuple] = {}


def _far_field_table(pmax: int):
    entry = _far_cache.get(pmax)
    if entry is None:
        x, w = roots_legendre(_FAR_FIELD_POINTS)
        entry = (x, w, legendre_table(pmax, x))
        with _rule_lock:
            _far_cache.setdefault(pmax, entry)
    return entry


def _nu_batch(c: np.ndarray, alpha: float, pmax: int) -> np.ndarray:
    """Moments nu_p(c), p = 0..pmax, for an array of offsets c >= 1."""
    c = np.atleast_1d(np.asarray(c, dtype=float))
    cm1 = np.maximum(c - 1.0, 0.0)  # clamp negative rounding at c ~ 1
    cp1 = c + 1.0
    nu = np.empty((c.size, pmax + 1))
    nu[:, 0] = (cp1**alpha - cm1**alpha) / alpha
    if pmax >= 1:
        i0 = (cp1 ** (alpha + 1.0) - cm1 ** (alpha + 1.0)) / (alpha + 1.0)
        nu[:, 1] = c * nu[:, 0] - i0
    if pmax <= 1:
        return nu

    near = c <= _NEAR_FIELD_C
    if np.any(near):
        cn = c[near]
        for p in range(1, pmax):
            nu[near, p + 1] = (
                (2.0 * p + 1.0) * cn * nu[near, p] + (alpha - p) * nu[near, p - 1]
            ) / (p + 1.0 + alpha)
    if np.any(~near):
        x, w, table = _far_field_table(pmax)
        kern = (c[~near, None] - x[None, :]) ** (alpha - 1.0) * w[None, :]
        nu[~near, 2:] = kern @ table[2:].T
    return nu


def modified_moments(elem: Element, t: float, alpha: float, max_degree: int) -> np.ndarray:
    """Moments of (t-s)^(alpha-1) against the element's shifted Legendre basis."""
    if max_degree < 0:
        raise ValueError("max_degree must be >= 0")
    if t < elem.right - DOMAIN_TOL * max(1.0, abs(elem.right)):
        raise ValueError("evaluation point must lie at or beyond the element")
    if not 0.0 < alpha <= 1.0:
        raise ValueError("alpha must lie in (0, 1]")
    c = (2.0 * t - elem.left - elem.right) / elem.width
    return (0.5 * elem.width) ** alpha * _nu_batch(np.array([c]), alpha, max_degree)[0]


_lagrange_cache: dict[int, np.ndarray] = {}


def lobatto_lagrange_coeffs(degree: int) -> np.ndarray:
    """Legendre expansion of the Lagrange basis on the Lobatto nodes.

    Returns C with C[p, j] the degree-p Legendre coefficient of the j-th
    Lagrange polynomial; exact via the discrete Lobatto transform (the top
    mode uses the modified discrete norm 2/degree).
    """
    C = _lagrange_cache.get(degree)
    if C is not None:
        return C
    rule = gauss_rule(RuleKind.GAUSS_LOBATTO, None, degree)
    table = legendre_table(degree, rule.nodes)
    scale = (2.0 * np.arange(degree + 1) + 1.0) / 2.0
    scale[degree] = degree / 2.0
    C = scale[:, None] * table * rule.weights[None, :]
    with _rule_lock:
        _lagrange_cache.setdefault(degree, C)
    return C


def _constant_moment(left, right, t, alpha):
    return ((t - left) ** alpha - np.maximum(t - right, 0.0) ** alpha) / alpha


@dataclass(frozen=True)
class HistoryWeights:
    """Product-integration weights for one solved element at a later time t.

    Contracting ``values`` with samples of a polynomial phi (degree <= the
    element degree) at the element's shifted Lobatto points reproduces
    ``int_element (t-s)^(alpha-1) phi(s) ds`` exactly.
    """

    element: Element
    eval_point: float
    alpha: float
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        expected = _constant_moment(
            self.element.left, self.element.right, self.eval_point, self.alpha
        )
        err = abs(float(np.sum(self.values)) - expected)
        if err > 1e-10 * expected + 1e-16 * float(np.sum(np.abs(self.values))):
            raise HistoryAccuracyError(
                f"constant-sum check failed: |sum w - {expected:.6e}| = {err:.3e}"
            )


def history_weights(elem: Element, t: float, alpha: float) -> HistoryWeights:
    """Exact singular-kernel weights for the Lobatto points of a past element."""
    mu = modified_moments(elem, t, alpha, elem.degree)
    values = mu @ lobatto_lagrange_coeffs(elem.degree)
    return HistoryWeights(elem, float(t), float(alpha), values)


def history_weights_batch(lefts, rights, degree: int, t: float, alpha: float) -> np.ndarray:
    """Weights for many same-degree elements at once; rows follow the inputs.

    Hot path of history assembly: moments are vectorized over elements and a
    single basis-change matrix serves the whole group.  Each row satisfies
    the same constant-sum check as :func:`history_weights`.
    """
    lefts = np.asarray(lefts, dtype=float)
    rights = np.asarray(rights, dtype=float)
    widths = rights - lefts
    c = (2.0 * t - lefts - rights) / widths
    nu = _nu_batch(c, alpha, degree)
    mu = (0.5 * widths)[:, None] ** alpha * nu
    weights = mu @ lobatto_lagrange_coeffs(degree)

    expected = _constant_moment(lefts, rights, t, alpha)
    err = np.abs(weights.sum(axis=1) - expected)
    bad = err > 1e-10 * expected + 1e-16 * np.abs(weights).sum(axis=1)
    if np.any(bad):
        k = int(np.argmax(err / expected))
        raise HistoryAccuracyError(
            f"constant-sum check failed for element [{lefts[k]}, {rights[k]}] "
            f"at t={t}: error {err[k]:.3e}"
        )
    return weights

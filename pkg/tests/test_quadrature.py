import numpy as np
import pytest

from abelhp.orthopoly import Element, JacobiParams, jacobi_norm_gamma, jacobi_table
from abelhp.quadrature import (
    HistoryAccuracyError,
    HistoryWeights,
    RuleKind,
    gauss_rule,
    history_weights,
    history_weights_batch,
    lobatto_lagrange_coeffs,
    modified_moments,
    shift_nodes,
    singular_element_integral,
)

from oracles import lagrange_values, singular_history_integral, weighted_poly_integral


def test_gauss_legendre_two_point():
    rule = gauss_rule(RuleKind.GAUSS_LEGENDRE, None, 1)
    assert rule.nodes == pytest.approx([-0.5773502691896257, 0.5773502691896257])
    assert rule.weights == pytest.approx([1.0, 1.0])


def test_lobatto_three_point():
    rule = gauss_rule(RuleKind.GAUSS_LOBATTO, None, 2)
    assert rule.nodes == pytest.approx([-1.0, 0.0, 1.0], abs=1e-15)
    assert rule.weights == pytest.approx([1 / 3, 4 / 3, 1 / 3], rel=1e-14)


@pytest.mark.parametrize("M", range(1, 9))
def test_jacobi_weights_sum(M):
    rule = gauss_rule(RuleKind.GAUSS_JACOBI, JacobiParams(-0.5, 0.0), M)
    assert rule.weights.sum() == pytest.approx(2.8284271247461903, rel=1e-12)


def test_rules_well_formed():
    for M in range(1, 11):
        for kind, params in [
            (RuleKind.GAUSS_LEGENDRE, None),
            (RuleKind.GAUSS_JACOBI, JacobiParams(-0.8, 0.0)),
            (RuleKind.GAUSS_LOBATTO, None),
        ]:
            rule = gauss_rule(kind, params, M)
            assert np.all(np.diff(rule.nodes) > 0)
            assert np.all(rule.weights > 0)
            assert rule.nodes.size == M + 1


def test_gauss_exactness_random_polynomials():
    rng = np.random.default_rng(11)
    for _ in range(40):
        a = float(rng.choice([-0.8, -0.5, -0.2]))
        M = int(rng.integers(1, 11))
        coeffs = rng.uniform(-1.0, 1.0, 2 * M + 2)  # degree 2M+1
        rule = gauss_rule(RuleKind.GAUSS_JACOBI, JacobiParams(a, 0.0), M)
        vals = np.polynomial.polynomial.polyval(rule.nodes, coeffs)
        mine = float(rule.weights @ vals)
        oracle = weighted_poly_integral(coeffs, a, 0.0, 2 * M + 1)
        scale = sum(
            abs(c) * abs(weighted_poly_integral([0] * j + [1], a, 0.0, j))
            for j, c in enumerate(coeffs)
        )
        assert abs(mine - oracle) <= 1e-10 * scale


def test_lobatto_exactness():
    rng = np.random.default_rng(3)
    for M in range(1, 9):
        rule = gauss_rule(RuleKind.GAUSS_LOBATTO, None, M)
        coeffs = rng.uniform(-1.0, 1.0, 2 * M)  # degree 2M-1
        vals = np.polynomial.polynomial.polyval(rule.nodes, coeffs)
        mine = float(rule.weights @ vals)
        oracle = weighted_poly_integral(coeffs, 0.0, 0.0, 2 * M - 1)
        assert mine == pytest.approx(oracle, abs=1e-12 * (1 + abs(oracle)))


@pytest.mark.parametrize("a", [-0.8, -0.5, 0.0])
def test_discrete_orthogonality(a):
    params = JacobiParams(a, 0.0)
    M = 7
    rule = gauss_rule(RuleKind.GAUSS_JACOBI, params, M)
    table = jacobi_table(params, M, rule.nodes)
    gram = (table * rule.weights) @ table.T
    expected = np.diag([jacobi_norm_gamma(params, p) for p in range(M + 1)])
    assert np.max(np.abs(gram - expected)) <= 1e-10 * expected.max()


def test_shift_nodes():
    rule = gauss_rule(RuleKind.GAUSS_LEGENDRE, None, 1)
    mapped = shift_nodes(rule, Element(0.0, 1.0, 1))
    assert mapped == pytest.approx(
        [0.5 * (1 - 1 / np.sqrt(3)), 0.5 * (1 + 1 / np.sqrt(3))]
    )
    assert shift_nodes(rule, Element(0.0, 2.0, 1)).mean() == pytest.approx(1.0)
    rule_l = gauss_rule(RuleKind.GAUSS_LOBATTO, None, 2)
    assert shift_nodes(rule_l, Element(1.0, 1.5, 2))[-1] == pytest.approx(1.5)


def test_singular_element_integral_values():
    elem = Element(0.0, 1.0, 4)
    ones = np.ones(5)
    assert singular_element_integral(ones, elem, 1.0, 0.5) == pytest.approx(2.0, rel=1e-13)
    assert singular_element_integral(ones, elem, 0.25, 0.5) == pytest.approx(1.0, rel=1e-13)
    # g(tau) = tau sampled at the mapped nodes, t = 1: Beta(2, 1/2) = 4/3
    rule = gauss_rule(RuleKind.GAUSS_JACOBI, JacobiParams(-0.5, 0.0), 4)
    tau = 0.0 + (shift_nodes(rule, elem) - 0.0) * (1.0 - 0.0) / 1.0
    assert singular_element_integral(tau, elem, 1.0, 0.5) == pytest.approx(
        4.0 / 3.0, rel=1e-12
    )


def test_singular_element_integral_preconditions():
    elem = Element(0.5, 1.0, 2)
    with pytest.raises(ValueError):
        singular_element_integral(np.ones(3), elem, 0.5, 0.5)
    with pytest.raises(ValueError):
        singular_element_integral(np.ones(3), elem, 0.2, 0.5)
    with pytest.raises(ValueError):
        singular_element_integral(np.ones(4), elem, 0.9, 0.5)


def test_history_weights_alpha_one_is_scaled_lobatto():
    elem = Element(0.25, 0.75, 5)
    hw = history_weights(elem, 2.0, 1.0)
    rule = gauss_rule(RuleKind.GAUSS_LOBATTO, None, 5)
    assert hw.values == pytest.approx(0.5 * elem.width * rule.weights, rel=1e-12)


def test_history_weights_constant_sum():
    hw = history_weights(Element(0.0, 1.0, 4), 2.0, 0.5)
    assert hw.values.sum() == pytest.approx(0.8284271247461901, rel=1e-12)


def test_history_weights_near_singular_oracle():
    elem = Element(0.0, 1.0, 4)
    t, alpha = 1.1, 0.3
    hw = history_weights(elem, t, alpha)
    rule = gauss_rule(RuleKind.GAUSS_LOBATTO, None, 4)
    pts = shift_nodes(rule, elem)
    for j in range(5):
        oracle = singular_history_integral(
            lambda s: lagrange_values(pts, j, s), 0.0, 1.0, t, alpha
        )
        assert hw.values[j] == pytest.approx(oracle, abs=1e-9)


def test_history_weight_random_oracle_sweep():
    rng = np.random.default_rng(42)
    for _ in range(25):
        left = rng.uniform(0.0, 2.0)
        h = rng.uniform(0.05, 1.5)
        M = int(rng.integers(1, 9))
        alpha = rng.uniform(0.1, 1.0)
        gap = rng.choice([rng.uniform(0.0, 5.0 * h), 1e-3 * h * rng.uniform(0.05, 1.0)])
        elem = Element(left, left + h, M)
        t = elem.right + gap
        hw = history_weights(elem, t, alpha)
        pts = shift_nodes(gauss_rule(RuleKind.GAUSS_LOBATTO, None, M), elem)
        for j in range(M + 1):
            oracle = singular_history_integral(
                lambda s: lagrange_values(pts, j, s), elem.left, elem.right, t, alpha
            )
            assert abs(hw.values[j] - oracle) < 1e-9


def test_history_weights_exact_on_polynomials():
    # contracting the weights with samples of a degree-M polynomial matches
    # the weighted integral of the polynomial itself
    elem = Element(0.2, 0.9, 5)
    t, alpha = 1.3, 0.45
    hw = history_weights(elem, t, alpha)
    pts = shift_nodes(gauss_rule(RuleKind.GAUSS_LOBATTO, None, 5), elem)
    rng = np.random.default_rng(5)
    coeffs = rng.uniform(-1, 1, 6)
    poly = lambda s: np.polynomial.polynomial.polyval(s, coeffs)
    mine = float(hw.values @ poly(pts))
    oracle = singular_history_integral(poly, elem.left, elem.right, t, alpha)
    assert mine == pytest.approx(oracle, rel=1e-10)


def test_modified_moments_closed_forms():
    elem = Element(0.0, 1.0, 4)
    mu = modified_moments(elem, 2.0, 0.5, 3)
    assert mu[0] == pytest.approx(0.8284271247461901, rel=1e-12)
    assert mu[1] == pytest.approx(0.047378541243650166, rel=1e-9)
    mu1 = modified_moments(elem, 1.7, 1.0, 4)
    assert mu1[0] == pytest.approx(1.0, rel=1e-13)
    assert np.max(np.abs(mu1[1:])) < 1e-13


def test_modified_moments_against_quadrature_oracle():
    from numpy.polynomial.legendre import legval

    rng = np.random.default_rng(12)
    for _ in range(12):
        left = rng.uniform(0.0, 1.5)
        h = rng.uniform(0.1, 1.0)
        elem = Element(left, left + h, 6)
        alpha = rng.uniform(0.15, 0.95)
        t = elem.right + rng.uniform(0.0, 3.0)
        mu = modified_moments(elem, t, alpha, 6)
        for p in range(7):
            unit = np.zeros(p + 1)
            unit[p] = 1.0
            fn = lambda s: legval((2 * s - elem.left - elem.right) / h, unit)
            oracle = singular_history_integral(fn, elem.left, elem.right, t, alpha)
            assert mu[p] == pytest.approx(oracle, rel=1e-10, abs=1e-12)


def test_lagrange_transform_consistency():
    # same weights through the public one-element path and the batched path
    elem = Element(0.3, 0.8, 6)
    w1 = history_weights(elem, 1.5, 0.35).values
    w2 = history_weights_batch([0.3], [0.8], 6, 1.5, 0.35)[0]
    assert w1 == pytest.approx(w2, rel=1e-14)
    C = lobatto_lagrange_coeffs(6)
    mu = modified_moments(elem, 1.5, 0.35, 6)
    assert w1 == pytest.approx(mu @ C, rel=1e-14)


def test_history_weights_reject_bad_sum():
    elem = Element(0.0, 1.0, 3)
    good = history_weights(elem, 2.0, 0.5)
    with pytest.raises(HistoryAccuracyError):
        HistoryWeights(elem, 2.0, 0.5, good.values * (1.0 + 1e-6))


def test_rule_cache_returns_same_object():
    r1 = gauss_rule(RuleKind.GAUSS_JACOBI, JacobiParams(-0.3, 0.0), 5)
    r2 = gauss_rule("gauss_jacobi", JacobiParams(-0.3, 0.0), 5)
    assert r1 is r2


def test_invalid_rules():
    with pytest.raises(ValueError):
        gauss_rule(RuleKind.GAUSS_JACOBI, None, 3)
    with pytest.raises(ValueError):
        gauss_rule(RuleKind.GAUSS_LOBATTO, JacobiParams(-0.5, 0.0), 3)
    with pytest.raises(ValueError):
        gauss_rule(RuleKind.GAUSS_LEGENDRE, None, 0)

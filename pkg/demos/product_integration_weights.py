"""History weights: exact product integration of the Abel kernel.

For a solved element, the integral of (t-s)^(alpha-1) times any polynomial of
the element's degree reduces to a weighted sum over the Lobatto points.  The
weights depend on the evaluation time t and stay accurate even when t sits a
fraction of an element width past the element (the nearly singular case that
dominates the error budget of naive quadrature).
"""

import numpy as np
from scipy.integrate import quad

from abelhp import Element, RuleKind, gauss_rule, history_weights, shift_nodes

elem = Element(0.0, 1.0, 4)
alpha = 0.3
pts = shift_nodes(gauss_rule(RuleKind.GAUSS_LOBATTO, None, elem.degree), elem)

print(f"element [{elem.left}, {elem.right}], degree {elem.degree}, alpha = {alpha}")
print("evaluation point t, weights, and the constant-sum identity:")
for t in (2.0, 1.1, 1.0 + 1e-4):
    hw = history_weights(elem, t, alpha)
    expected = ((t - elem.left) ** alpha - (t - elem.right) ** alpha) / alpha
    print(f"  t = {t:<10.6g} sum w = {hw.values.sum():.12f}  expected {expected:.12f}")

print()
print("Against brute-force adaptive quadrature (smooth test function cos):")
fn = np.cos
for t in (2.0, 1.002):
    hw = history_weights(elem, t, alpha)
    mine = float(hw.values @ fn(pts))
    brute = quad(
        lambda s: (t - s) ** (alpha - 1.0) * fn(s),
        elem.left,
        elem.right,
        epsabs=1e-13,
        epsrel=1e-13,
        limit=500,
    )[0]
    # cos is not a polynomial: the gap is the degree-4 interpolation error
    print(f"  t = {t:<8.4g} product rule {mine:.10f}  brute force {brute:.10f}"
          f"  gap {abs(mine - brute):.2e}")

"""Deterministic quadrature on coordinate spheres and radial shells.

The sphere rule is a product rule in hyperspherical angles: each polar
angle theta_j carries a sin^p weight that is folded into a Gauss-Jacobi
rule by the substitution t = cos(theta), and the azimuth is a uniform
(trapezoidal) rule, which is exact for trigonometric polynomials of
degree below the node count.  The resulting rule integrates polynomial
restrictions of degree <= 2*level - 1 exactly.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gamma as _gamma_fn, roots_jacobi

__all__ = [
    "SphereRule",
    "sphere_volume",
    "sphere_rule",
    "surface_integral",
    "ball_integral",
]


def sphere_volume(n):
    """Surface measure omega_{n-1} of the unit sphere in R^n."""
    return 2.0 * math.pi ** (n / 2.0) / _gamma_fn(n / 2.0)


@dataclass(frozen=True)
class SphereRule:
    """Nodes (unit vectors) and positive weights summing to omega_{n-1}."""

    n: int
    level: int
    nodes: np.ndarray
    weights: np.ndarray


def sphere_rule(n, level):
    """Product quadrature rule on the unit sphere S^{n-1} in R^n.

    level is the Gauss node count per polar angle; the azimuth gets
    2*level uniform nodes, for level**(n-2) * 2*level nodes total.
    """
    if n < 3:
        raise ValueError("sphere_rule requires ambient dimension n >= 3")
    if level < 2:
        raise ValueError("level must be at least 2")
    polar = []
    for j in range(1, n - 1):
        p = n - 1 - j  # sin power of this angle
        a = (p - 1) / 2.0
        t, w = roots_jacobi(level, a, a)
        polar.append((t, w))
    m_az = 2 * level
    phi = 2.0 * math.pi * np.arange(m_az) / m_az
    az_w = np.full(m_az, 2.0 * math.pi / m_az)

    grids = np.meshgrid(*[t for t, _ in polar], phi, indexing="ij")
    wgrids = np.meshgrid(*[w for _, w in polar], az_w, indexing="ij")
    tcols = [gr.ravel() for gr in grids[:-1]]
    phicol = grids[-1].ravel()
    weights = np.ones_like(phicol)
    for wg in wgrids:
        weights = weights * wg.ravel()

    N = len(phicol)
    nodes = np.empty((N, n))
    sin_prod = np.ones(N)
    for j, t in enumerate(tcols):
        nodes[:, j] = sin_prod * t
        sin_prod = sin_prod * np.sqrt(np.maximum(0.0, 1.0 - t * t))
    nodes[:, n - 2] = sin_prod * np.cos(phicol)
    nodes[:, n - 1] = sin_prod * np.sin(phicol)
    return SphereRule(n=n, level=level, nodes=nodes, weights=weights)


def surface_integral(F, r, rule):
    """Integral of F over the coordinate sphere of radius r.

    F is a batched evaluator (N, n) -> (N,).  The outward unit normal at
    a node is the node vector itself.
    """
    if r <= 0:
        raise ValueError("radius must be positive")
    vals = np.asarray(F(r * rule.nodes), dtype=float)
    if not np.all(np.isfinite(vals)):
        bad = rule.nodes[int(np.argmax(~np.isfinite(vals)))]
        raise FloatingPointError(
            f"integrand non-finite at node direction {bad.tolist()} (r={r})")
    return float(r ** (rule.n - 1) * np.dot(rule.weights, vals))


def ball_integral(F, r_inner, r_outer, rule, radial_level=48):
    """Integral of F over a ball or annulus in flat Lebesgue measure.

    Gauss-Legendre in the radius composed with sphere shells.  An
    infinite r_outer is handled by the substitution r = r_inner + t/(1-t)
    on t in [0, 1), which assumes the integrand decays polynomially.
    """
    if not (0 <= r_inner and (np.isinf(r_outer) or r_inner < r_outer)):
        raise ValueError("require 0 <= r_inner < r_outer")
    t, w = np.polynomial.legendre.leggauss(radial_level)
    if np.isinf(r_outer):
        tt = 0.5 * (t + 1.0)
        radii = r_inner + tt / (1.0 - tt)
        rad_w = 0.5 * w / (1.0 - tt) ** 2
    else:
        radii = 0.5 * (r_outer - r_inner) * t + 0.5 * (r_outer + r_inner)
        rad_w = 0.5 * (r_outer - r_inner) * w
    total = 0.0
    for rv, wv in zip(radii, rad_w):
        vals = np.asarray(F(rv * rule.nodes), dtype=float)
        if not np.all(np.isfinite(vals)):
            bad = rule.nodes[int(np.argmax(~np.isfinite(vals)))]
            raise FloatingPointError(
                f"integrand non-finite at node direction {bad.tolist()} "
                f"(r={rv})")
        total += wv * rv ** (rule.n - 1) * float(np.dot(rule.weights, vals))
    return total

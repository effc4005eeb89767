"""Graph hypersurfaces over flat space and their boundary geometry.

A graph x -> (x, f(x)) carries the induced metric delta + df x df.  For
these metrics the second-order curvature integrand is an exact flat
divergence, which turns the mass into a bulk integral of L_2 plus a
horizon boundary term built from the third mean curvature of the
horizon.  This module supplies the graph families, the pointwise
identities, the bulk and boundary integrals, second-fundamental-form
data, and the monotone chain of boundary functionals used in the
Penrose-type comparisons.
"""

import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional

import numpy as np
import sympy as sp

from . import curvature, mass as _mass, metrics, quadrature
from .metrics import RadialProfile, _scalar_radial_derivatives

__all__ = [
    "GraphFunction",
    "HypersurfaceData",
    "PenroseReport",
    "Ellipsoid",
    "sphere_surface",
    "radial_graph",
    "schwarzschild_graph",
    "schwarzschild_slope_profile",
    "egb_graph",
    "egb_graph_slope_profile",
    "gaussian_bump_graph",
    "sum_graph",
    "linear_graph",
    "quadratic_graph",
    "graph_L2",
    "graph_divergence_identity_residual",
    "bulk_mass",
    "hypersurface_data",
    "graph_hypersurface_data",
    "surface_hypersurface_data",
    "elementary_symmetric",
    "surface_area",
    "quermassintegral",
    "horizon_boundary_term",
    "penrose_report",
    "penrose_report_dict",
    "radial_graph_formulas",
    "adm_graph_mass",
    "egb_graph_penrose",
]


@dataclass(frozen=True)
class GraphFunction:
    """A graph function over (a region of) R^n with batched derivatives.

    grad/hess/third map (B, n) points to arrays with 1/2/3 trailing
    index axes.  tau is the decay order of the induced metric
    (grad = O(r^(-tau/2))).  horizon optionally describes the inner
    boundary where |grad f| blows up, r_min the radius below which the
    graph is not defined.
    """

    n: int
    grad: Callable
    hess: Callable
    third: Callable
    tau: float
    value: Optional[Callable] = None
    horizon: Optional["Ellipsoid"] = None
    r_min: float = 0.0
    name: str = "graph"

    @cached_property
    def metric(self):
        return metrics.graph_metric(self)


# ---------------------------------------------------------------------------
# graph families


def radial_graph(n, slope, tau, r_min=0.0, horizon=None, name="radial-graph"):
    """Rotationally symmetric graph from its radial slope profile f'(r).

    Derivatives of f through third order follow from the slope and its
    first two derivatives; the value of f itself is never needed.
    """

    def _pts(x):
        pts = np.asarray(x, dtype=float)
        r = np.linalg.norm(pts, axis=-1)
        if np.any(r <= r_min):
            raise metrics.DomainError(
                f"{name}: point inside domain radius {r_min:.6g}")
        return pts, r

    def grad(x):
        pts, r = _pts(x)
        return slope(r)[:, None] * pts / r[:, None]

    def hess(x):
        pts, r = _pts(x)
        u = pts / r[:, None]
        P = np.eye(n)[None] - u[:, :, None] * u[:, None, :]
        s, s1 = slope(r), slope.d1(r)
        return s1[:, None, None] * u[:, :, None] * u[:, None, :] \
            + (s / r)[:, None, None] * P

    def third(x):
        pts, r = _pts(x)
        u = pts / r[:, None]
        P = np.eye(n)[None] - u[:, :, None] * u[:, None, :]
        s, s1, s2 = slope(r), slope.d1(r), slope.d2(r)
        uuu = u[:, :, None, None] * u[:, None, :, None] * u[:, None, None, :]
        Pu = (P[:, :, :, None] * u[:, None, None, :]
              + P[:, :, None, :] * u[:, None, :, None]
              + P[:, None, :, :] * u[:, :, None, None])
        return s2[:, None, None, None] * uuu \
            + ((s1 - s / r) / r)[:, None, None, None] * Pu

    return GraphFunction(n=n, grad=grad, hess=hess, third=third, tau=tau,
                         horizon=horizon, r_min=r_min, name=name)


def schwarzschild_slope_profile(k, n, m):
    """Slope f'(r) = sqrt(2m / (r^(n/k-2) - 2m)) of the static graph."""
    r = sp.Symbol("r", positive=True)
    q = sp.Rational(n, k) - 2
    return RadialProfile(sp.sqrt(2 * m / (r ** q - 2 * m)), r)


def schwarzschild_graph(n, m, k=2):
    """Graph realization of the k-th static family (rho chart).

    The horizon is the round sphere of radius rho_0 with
    rho_0^(n/k-2) = 2m, where the slope blows up.
    """
    if m <= 0:
        raise ValueError("graph realization requires m > 0")
    q = n / k - 2.0
    rho0 = (2.0 * m) ** (1.0 / q)
    return radial_graph(n, schwarzschild_slope_profile(k, n, m),
                        tau=q, r_min=rho0,
                        horizon=sphere_surface(n, rho0),
                        name=f"schwarzschild-graph(k={k},n={n},m={m})")


def egb_graph_slope_profile(n, alpha, m):
    """Slope sqrt(1/F - 1) of the Gauss-Bonnet-corrected black hole."""
    at = 2 * (n - 2) * (n - 3) * sp.nsimplify(alpha, rational=False)
    r = sp.Symbol("r", positive=True)
    # 1/F - 1 written in conjugate form, stable for large r
    G = 4 * m / (r ** (n - 2) * (1 + sp.sqrt(1 + 4 * at * m / r ** n)))
    return RadialProfile(sp.sqrt(G / (1 - G)), r)


def egb_graph(n, alpha, m):
    """Graph realization of the Gauss-Bonnet-corrected black hole."""
    r0 = metrics.egb_horizon_radius(n, alpha, m)
    if r0 <= 0:
        raise ValueError("no horizon for these parameters")
    return radial_graph(n, egb_graph_slope_profile(n, alpha, m),
                        tau=float(n - 2), r_min=r0,
                        horizon=sphere_surface(n, r0),
                        name=f"egb-graph(n={n},alpha={alpha},m={m})")


def gaussian_bump_graph(n, centers, amplitudes, widths, name="bumps"):
    """Sum of Gaussian bumps; decays faster than any power."""
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    amplitudes = np.atleast_1d(np.asarray(amplitudes, dtype=float))
    widths = np.atleast_1d(np.asarray(widths, dtype=float))
    eye = np.eye(n)

    def _parts(x):
        pts = np.asarray(x, dtype=float)
        # y[b, a, i] = x_i - c_{a,i}
        y = pts[:, None, :] - centers[None, :, :]
        q = np.einsum('bai,bai->ba', y, y)
        E = amplitudes[None, :] * np.exp(-q / (2.0 * widths[None, :] ** 2))
        return y, E

    def grad(x):
        y, E = _parts(x)
        return np.einsum('ba,bai->bi', -E / widths[None, :] ** 2, y)

    def hess(x):
        y, E = _parts(x)
        w2 = widths[None, :] ** 2
        return (np.einsum('ba,bai,baj->bij', E / w2 ** 2, y, y)
                - np.einsum('ba,ij->bij', E / w2, eye))

    def third(x):
        y, E = _parts(x)
        w2 = widths[None, :] ** 2
        t1 = -np.einsum('ba,bai,baj,bak->bijk', E / w2 ** 3, y, y, y)
        t2 = (np.einsum('ba,ij,bak->bijk', E / w2 ** 2, eye, y)
              + np.einsum('ba,ik,baj->bijk', E / w2 ** 2, eye, y)
              + np.einsum('ba,jk,bai->bijk', E / w2 ** 2, eye, y))
        return t1 + t2

    return GraphFunction(n=n, grad=grad, hess=hess, third=third,
                         tau=float("inf"), name=name)


def sum_graph(*parts, name="sum"):
    """Pointwise sum of graph functions over the same base dimension."""
    n = parts[0].n
    if any(p.n != n for p in parts):
        raise ValueError("summands live over different dimensions")

    def grad(x):
        return sum(p.grad(x) for p in parts)

    def hess(x):
        return sum(p.hess(x) for p in parts)

    def third(x):
        return sum(p.third(x) for p in parts)

    tau = min(p.tau for p in parts)
    r_min = max(p.r_min for p in parts)
    return GraphFunction(n=n, grad=grad, hess=hess, third=third, tau=tau,
                         r_min=r_min, name=name)


def linear_graph(n, v):
    """Affine graph; the induced metric is flat."""
    v = np.asarray(v, dtype=float)

    def grad(x):
        pts = np.asarray(x, dtype=float)
        return np.broadcast_to(v, pts.shape).copy()

    def zeros(extra):
        def ev(x):
            pts = np.asarray(x, dtype=float)
            return np.zeros((len(pts),) + (n,) * extra)
        return ev

    return GraphFunction(n=n, grad=grad, hess=zeros(2), third=zeros(3),
                         tau=float("inf"), name="linear")


def quadratic_graph(n, H, v=None, name="quadratic"):
    """Graph with constant Hessian H (paraboloid for H = identity)."""
    H = np.asarray(H, dtype=float)
    v = np.zeros(n) if v is None else np.asarray(v, dtype=float)

    def grad(x):
        pts = np.asarray(x, dtype=float)
        return pts @ H.T + v

    def hess(x):
        pts = np.asarray(x, dtype=float)
        return np.broadcast_to(H, (len(pts), n, n)).copy()

    def third(x):
        pts = np.asarray(x, dtype=float)
        return np.zeros((len(pts), n, n, n))

    return GraphFunction(n=n, grad=grad, hess=hess, third=third,
                         tau=2.0, name=name)


# ---------------------------------------------------------------------------
# pointwise identities


def graph_L2(f, x):
    """L_2 on a graph via P^{ijkl}(f_ik f_jl - f_il f_jk) / (1 + |df|^2)."""
    pts = np.atleast_2d(np.asarray(x, dtype=float))
    single = np.asarray(x).ndim == 1
    g = f.metric
    bund = curvature.riemann(g, pts)
    P = curvature.p_tensor(g, pts, bund=bund).components
    d2f = f.hess(pts)
    df = f.grad(pts)
    denom = 1.0 + np.einsum('xi,xi->x', df, df)
    hh = (np.einsum('xik,xjl->xijkl', d2f, d2f)
          - np.einsum('xil,xjk->xijkl', d2f, d2f))
    out = np.einsum('xijkl,xijkl->x', P, hh) / denom
    return out[0] if single else out


def graph_divergence_identity_residual(f, x):
    """|d_i(P^{ijkl} d_l g_jk) - L_2 / 2| with the outer d_i by differences."""
    pts = np.atleast_2d(np.asarray(x, dtype=float))
    single = np.asarray(x).ndim == 1
    g = f.metric
    n = f.n

    def Q(p):
        bund = curvature.riemann(g, p)
        P = curvature.p_tensor(g, p, bund=bund).components
        return np.einsum('xijml,xjml->xi', P, bund.dg)

    h = metrics.fd_step_second(pts)
    div = np.zeros(len(pts))
    for idir in range(n):
        step = np.zeros_like(pts)
        step[:, idir] = h
        div += (Q(pts + step)[:, idir] - Q(pts - step)[:, idir]) / (2.0 * h)
    out = np.abs(div - 0.5 * curvature.lovelock_L(2, g, pts))
    return out[0] if single else out


# ---------------------------------------------------------------------------
# bulk integral


def bulk_mass(f, rule=None, r_inner=None, r_outer=float("inf"),
              radial_level=64, tail_check=True):
    """Second-order mass of a graph as (c2/2) * integral of L_2, flat measure.

    The domain is the annulus r_inner < r < r_outer; r_inner defaults to
    just outside the graph's inner domain radius.  A tail probe guards
    against non-integrable L_2 when the outer radius is infinite.
    """
    n = f.n
    rule = rule if rule is not None else quadrature.sphere_rule(n, _mass.default_level(n))
    if r_inner is None:
        r_inner = f.r_min * (1.0 + 1e-3) if f.r_min > 0 else 0.0
    g = f.metric

    def F(pts):
        return curvature.lovelock_L(2, g, pts)

    if tail_check and np.isinf(r_outer):
        probe = max(100.0, 10.0 * max(r_inner, 1.0))
        direction = np.zeros(n)
        direction[0] = 1.0
        sample = np.abs([float(F((rv * direction)[None, :])[0]) * rv ** (n - 1)
                         for rv in (probe, 2 * probe, 4 * probe)])
        if sample[0] > 1e-12 and not (sample[2] <= sample[1] <= sample[0]):
            raise FloatingPointError(
                "L_2 tail does not decay; bulk integral diverges")
    raw = quadrature.ball_integral(F, r_inner, r_outer, rule,
                                   radial_level=radial_level)
    return 0.5 * _mass.c2_constant(n) * raw


# ---------------------------------------------------------------------------
# hypersurfaces


def elementary_symmetric(values, k):
    """Elementary symmetric polynomial e_k over the trailing axis."""
    values = np.asarray(values, dtype=float)
    coeffs = np.ones(values.shape[:-1] + (1,))
    for j in range(values.shape[-1]):
        v = values[..., j:j + 1]
        grown = np.concatenate([coeffs, np.zeros_like(coeffs[..., :1])], axis=-1)
        grown[..., 1:] += coeffs * v
        coeffs = grown
    if k >= coeffs.shape[-1]:
        return np.zeros(values.shape[:-1])
    return coeffs[..., k]


@dataclass(frozen=True)
class HypersurfaceData:
    """Second fundamental form data at one point of a hypersurface."""

    second_ff: np.ndarray
    eigenvalues: np.ndarray
    mean_curvatures: np.ndarray  # H_1 .. H_4
    induced_scalar: float


def _mean_curvature_vector(lam):
    return np.array([elementary_symmetric(lam, k) for k in (1, 2, 3, 4)])


def graph_hypersurface_data(f, at):
    """Hypersurface data of the graph of f inside R^(n+1) at a point.

    The shape operator solves the generalized eigenproblem A v = lambda
    g v with A = hess/sqrt(1 + |df|^2) and g the induced metric.
    """
    x = np.asarray(at, dtype=float)
    df = f.grad(x[None, :])[0]
    H = f.hess(x[None, :])[0]
    W = 1.0 + df @ df
    A = H / math.sqrt(W)
    g = np.eye(f.n) + np.outer(df, df)
    lam = np.linalg.eigvals(np.linalg.solve(g, A))
    lam = np.sort(lam.real)
    Hks = _mean_curvature_vector(lam)
    return HypersurfaceData(second_ff=A, eigenvalues=lam,
                            mean_curvatures=Hks,
                            induced_scalar=float(2.0 * Hks[1]))


@dataclass(frozen=True)
class Ellipsoid:
    """Ellipsoid sum x_i^2 / a_i^2 = 1 in R^n (sphere when axes agree)."""

    semiaxes: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "semiaxes",
                           np.asarray(self.semiaxes, dtype=float))
        if np.any(self.semiaxes <= 0):
            raise ValueError("semiaxes must be positive")

    @property
    def n(self):
        return len(self.semiaxes)

    def embed(self, omega):
        """Map unit-sphere directions onto the surface."""
        return np.atleast_2d(omega) * self.semiaxes[None, :]

    def area_element(self, omega):
        """Surface measure Jacobian relative to the parameter sphere."""
        omega = np.atleast_2d(omega)
        a = self.semiaxes
        det = float(np.prod(a))
        return det * np.linalg.norm(omega / a[None, :], axis=-1)

    def principal_curvatures(self, x):
        """Principal curvatures at surface points (batched)."""
        x = np.atleast_2d(x)
        a2 = self.semiaxes ** 2
        Dx = x / a2[None, :]
        norm = np.linalg.norm(Dx, axis=-1)
        nu = Dx / norm[:, None]
        P = np.eye(self.n)[None] - nu[:, :, None] * nu[:, None, :]
        M = np.einsum('xab,b,xbc->xac', P, 1.0 / a2, P) / norm[:, None, None]
        lam = np.linalg.eigvalsh(M)
        # drop the null direction along the normal
        drop = np.argmin(np.abs(lam), axis=-1)
        keep = np.array([np.delete(row, d) for row, d in zip(lam, drop)])
        return keep


def sphere_surface(n, radius):
    """Round sphere of the given radius as a degenerate ellipsoid."""
    return Ellipsoid(semiaxes=np.full(n, float(radius)))


def surface_hypersurface_data(surface, omega):
    """Hypersurface data of a parametric surface at one direction."""
    omega = np.asarray(omega, dtype=float)
    x = surface.embed(omega[None, :])[0]
    lam = np.sort(surface.principal_curvatures(x[None, :])[0])
    Hks = _mean_curvature_vector(lam)
    a2 = surface.semiaxes ** 2
    Dx = x / a2
    nu = Dx / np.linalg.norm(Dx)
    A = (np.eye(surface.n) - np.outer(nu, nu)) @ np.diag(1.0 / a2) \
        @ (np.eye(surface.n) - np.outer(nu, nu)) / np.linalg.norm(Dx)
    return HypersurfaceData(second_ff=A, eigenvalues=lam,
                            mean_curvatures=Hks,
                            induced_scalar=float(2.0 * Hks[1]))


def hypersurface_data(source, at):
    """Dispatch on GraphFunction (point) or Ellipsoid (unit direction)."""
    if isinstance(source, GraphFunction):
        return graph_hypersurface_data(source, at)
    if isinstance(source, Ellipsoid):
        return surface_hypersurface_data(source, at)
    raise TypeError(f"unsupported hypersurface source {type(source)!r}")


def surface_area(surface, rule):
    """Total surface measure via the mapped sphere rule."""
    J = surface.area_element(rule.nodes)
    return float(np.dot(rule.weights, J))


def quermassintegral(surface, k, rule):
    """Integral of the k-th mean curvature H_k over the surface."""
    x = surface.embed(rule.nodes)
    lam = surface.principal_curvatures(x)
    hk = elementary_symmetric(lam, k)
    J = surface.area_element(rule.nodes)
    return float(np.dot(rule.weights, J * hk))


def horizon_boundary_term(f, sigma, rule):
    """Horizon contribution c2(n) * integral of 3 H_3 over sigma.

    H_3 is taken with respect to flat R^n; f only fixes the ambient
    dimension and may be None for a bare-surface evaluation.
    """
    n = sigma.n if f is None else f.n
    if sigma is None:
        raise ValueError("horizon surface required")
    return _mass.c2_constant(n) * 3.0 * quermassintegral(sigma, 3, rule)


# ---------------------------------------------------------------------------
# reports


@dataclass(frozen=True)
class PenroseReport:
    """Mass decomposition and the chain of boundary lower bounds.

    af_chain lists, in weakening order: the horizon boundary term, and
    the three isoperimetric-type bounds built from the integrals of
    2 H_2, H_1, and the area.  slack[i] = mass - af_chain[i].
    """

    bulk_term: float
    boundary_term: float
    mass: float
    af_chain: np.ndarray
    slack: np.ndarray
    per_component: tuple


def af_chain_bounds(sigma, rule):
    """The four boundary quantities of the comparison chain."""
    n = sigma.n
    omega = quadrature.sphere_volume(n)
    b0 = _mass.c2_constant(n) * 3.0 * quermassintegral(sigma, 3, rule)
    int_2h2 = 2.0 * quermassintegral(sigma, 2, rule)
    b1 = 0.25 * (int_2h2 / ((n - 1) * (n - 2) * omega)) ** ((n - 4) / (n - 3))
    int_h1 = quermassintegral(sigma, 1, rule)
    b2 = 0.25 * (int_h1 / ((n - 1) * omega)) ** ((n - 4) / (n - 2))
    b3 = 0.25 * (surface_area(sigma, rule) / omega) ** ((n - 4) / (n - 1))
    return np.array([b0, b1, b2, b3])


def penrose_report(f, sigma, rule=None, radial_level=64):
    """Mass = bulk + horizon boundary, with the chain of lower bounds.

    With f None only the boundary chain is evaluated (bulk 0), which is
    the bare-horizon comparison mode.
    """
    n = sigma.n if f is None else f.n
    rule = rule if rule is not None else quadrature.sphere_rule(n, _mass.default_level(n))
    if f is not None:
        bulk = bulk_mass(f, rule=rule, radial_level=radial_level)
    else:
        bulk = 0.0
    boundary = horizon_boundary_term(f, sigma, rule)
    total = bulk + boundary
    chain = af_chain_bounds(sigma, rule)
    slack = total - chain
    comp = ({"bulk": bulk, "boundary": boundary, "mass": total,
             "bounds": chain.tolist(), "slack": slack.tolist()},)
    return PenroseReport(bulk_term=bulk, boundary_term=boundary, mass=total,
                         af_chain=chain, slack=slack, per_component=comp)


def penrose_report_dict(report):
    """JSON-ready dict of a PenroseReport."""
    return {
        "bulk": float(report.bulk_term),
        "boundary": float(report.boundary_term),
        "mass": float(report.mass),
        "bounds": [float(b) for b in report.af_chain],
        "slack": [float(s) for s in report.slack],
        "per_component": list(report.per_component),
    }


def radial_graph_formulas(slope, r, n):
    """Closed forms for a radial graph: (L_2, mass density).

    L_2 = 24 [C(n-1,4) fr^4 / (r^4 (1+fr^2)^2)
              + C(n-1,3) fr^3 frr / (r^3 (1+fr^2)^3)],
    mass density = r^(n-4) fr^4 / 4, whose r -> infinity limit is the
    second-order mass.
    """
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise metrics.DomainError("radial formulas need r > 0")
    fr = slope(r)
    frr = slope.d1(r)
    W = 1.0 + fr ** 2
    L2 = 24.0 * (math.comb(n - 1, 4) * fr ** 4 / (r ** 4 * W ** 2)
                 + math.comb(n - 1, 3) * fr ** 3 * frr / (r ** 3 * W ** 3))
    density = r ** (n - 4) * fr ** 4 / 4.0
    return L2, density


def adm_graph_mass(f, rule=None, alpha=0.0, sigma=None, radial_level=64):
    """First-order mass of a graph from its bulk curvature integral.

    m = (1/(2(n-1) omega)) [ int (R + alpha L_2) dV_flat
                             + int_sigma (H_1 + 6 alpha H_3) dS ]
    where the boundary term appears only with a horizon sigma.
    """
    n = f.n
    rule = rule if rule is not None else quadrature.sphere_rule(n, _mass.default_level(n))
    sigma = sigma if sigma is not None else f.horizon
    r_inner = f.r_min * (1.0 + 1e-3) if f.r_min > 0 else 0.0
    g = f.metric

    def F(pts):
        bund = curvature.riemann(g, pts)
        out = bund.scalar.copy()
        if alpha != 0.0:
            out = out + alpha * curvature.lovelock_L(2, g, pts, bund=bund)
        return out

    bulk = quadrature.ball_integral(F, r_inner, float("inf"), rule,
                                    radial_level=radial_level)
    boundary = 0.0
    if sigma is not None:
        boundary = (quermassintegral(sigma, 1, rule)
                    + 6.0 * alpha * quermassintegral(sigma, 3, rule))
    norm = 2.0 * (n - 1) * quadrature.sphere_volume(n)
    return (bulk + boundary) / norm


def egb_graph_penrose(f, sigma, alpha, rule=None, radial_level=64):
    """Gauss-Bonnet-corrected Penrose comparison for a graph with horizon.

    Returns a dict with the computed mass, the area-based lower bound
    (1/2)(|S|/omega)^((n-2)/(n-1)) + (alpha/2)(n-2)(n-3)(|S|/omega)^((n-4)/(n-1)),
    and the slack.
    """
    n = f.n
    rule = rule if rule is not None else quadrature.sphere_rule(n, _mass.default_level(n))
    m_val = adm_graph_mass(f, rule=rule, alpha=alpha, sigma=sigma,
                           radial_level=radial_level)
    ratio = surface_area(sigma, rule) / quadrature.sphere_volume(n)
    bound = (0.5 * ratio ** ((n - 2) / (n - 1))
             + 0.5 * alpha * (n - 2) * (n - 3) * ratio ** ((n - 4) / (n - 1)))
    return {"mass": m_val, "bound": bound, "slack": m_val - bound,
            "alpha": alpha}

"""Closed-form metric families with analytic derivatives to third order.

Every metric is presented in a single Cartesian chart on (a subset of)
R^n.  Rotationally symmetric families A(rho) drho^2 + rho^2 dTheta^2
are realized through x = rho * omega, which turns them into
g_ij = delta_ij + (A(r) - 1) x_i x_j / r^2.

Evaluator conventions
---------------------
All evaluators are batched: an input of shape (..., n) yields
g of shape (..., n, n), dg of shape (..., n, n, n) with the derivative
index last (dg[..., i, j, k] = d_k g_ij), and so on through d3g with
three trailing derivative indices.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import sympy as sp

__all__ = [
    "DomainError",
    "MetricField",
    "CoordinateChange",
    "RadialProfile",
    "euclidean",
    "radial_metric",
    "schwarzschild_family",
    "conformal_radial",
    "with_tau",
    "schwarzschild_conformal_profile",
    "graph_metric",
    "egb_blackhole",
    "egb_horizon_radius",
    "pushforward",
    "from_g_only",
    "identity_change",
    "rotation_change",
    "perturbation_change",
    "radial_decay_profile",
    "fd_step_first",
    "fd_step_second",
]

TAU_INFINITE = float("inf")


class DomainError(ValueError):
    """A metric was evaluated outside its domain of definition."""


def fd_step_first(x):
    """Step for first-order central differences, scaled to the point."""
    r = np.linalg.norm(np.atleast_2d(x), axis=-1)
    return np.maximum(1.0, r) * 6e-6


def fd_step_second(x):
    """Step for second-order (and nested) central differences."""
    r = np.linalg.norm(np.atleast_2d(x), axis=-1)
    return np.maximum(1.0, r) * 3e-4


def _batch(x):
    pts = np.asarray(x, dtype=float)
    if pts.ndim == 1:
        return pts[None, :], True
    return pts.reshape(-1, pts.shape[-1]), False


def _unbatch(out, single, lead_shape=None):
    if single:
        return out[0]
    return out


@dataclass(frozen=True)
class MetricField:
    """A Riemannian metric on a region of R^n given by pointwise evaluators.

    Fields
    ------
    n : dimension (>= 4 for all mass computations)
    eval_g, eval_dg, eval_d2g, eval_d3g : batched evaluators, see module
        docstring for the index layout
    tau : declared decay order of g - delta (TAU_INFINITE for exact flat)
    derivative_provenance : "analytic" when dg and d2g come from closed
        forms, "finite-difference" otherwise
    name : short identifier used in reports
    """

    n: int
    eval_g: Callable
    eval_dg: Callable
    eval_d2g: Callable
    eval_d3g: Callable
    tau: float
    derivative_provenance: str = "analytic"
    name: str = "metric"


@dataclass(frozen=True)
class CoordinateChange:
    """A diffeomorphism given by the inverse map psi: xhat -> x.

    forward evaluates psi, jacobian its derivative d psi^i / d xhat^a
    (layout [..., i, a]), d_jacobian the second derivative with layout
    [..., i, a, b].  decay is the decay order of phi in xhat = x + phi.
    """

    n: int
    forward: Callable
    jacobian: Callable
    d_jacobian: Callable
    decay: float
    name: str = "change"


class RadialProfile:
    """A scalar profile c(r) with derivatives to third order.

    Constructed from a sympy expression in a single symbol; derivatives
    are generated symbolically and lambdified once.
    """

    def __init__(self, expr, symbol=None):
        if symbol is None:
            free = sorted(expr.free_symbols, key=str) if hasattr(expr, "free_symbols") else []
            if len(free) > 1:
                raise ValueError("profile expression must have one free symbol")
            symbol = free[0] if free else sp.Symbol("r", positive=True)
        expr = sp.sympify(expr)
        self.expr = expr
        self.symbol = symbol
        ds = [expr]
        for _ in range(3):
            ds.append(sp.diff(ds[-1], symbol))
        self._fns = [sp.lambdify(symbol, d, modules="numpy") for d in ds]

    def _eval(self, order, r):
        r = np.asarray(r, dtype=float)
        out = self._fns[order](r)
        return np.broadcast_to(np.asarray(out, dtype=float), r.shape).copy()

    def __call__(self, r):
        return self._eval(0, r)

    def d1(self, r):
        return self._eval(1, r)

    def d2(self, r):
        return self._eval(2, r)

    def d3(self, r):
        return self._eval(3, r)


def _scalar_radial_derivatives(profile, pts, r):
    """Cartesian derivatives to third order of c(|x|) at batched points.

    Returns (c, dc[...,k], d2c[...,k,l], d3c[...,k,l,m]).
    """
    B, n = pts.shape
    u = pts / r[:, None]
    P = np.eye(n)[None] - u[:, :, None] * u[:, None, :]
    c0 = profile(r)
    c1 = profile.d1(r)
    c2 = profile.d2(r)
    c3 = profile.d3(r)
    dc = c1[:, None] * u
    d2c = c2[:, None, None] * u[:, :, None] * u[:, None, :] + (c1 / r)[:, None, None] * P
    uuu = u[:, :, None, None] * u[:, None, :, None] * u[:, None, None, :]
    Pu = (P[:, :, :, None] * u[:, None, None, :]
          + P[:, :, None, :] * u[:, None, :, None]
          + P[:, None, :, :] * u[:, :, None, None])
    d3c = c3[:, None, None, None] * uuu + ((c2 - c1 / r) / r)[:, None, None, None] * Pu
    return c0, dc, d2c, d3c


def radial_metric(n, a_profile, b_profile, tau, r_min=0.0,
                  domain_check=None, name="radial"):
    """Metric g_ij = a(r) delta_ij + b(r) x_i x_j with analytic derivatives.

    b_profile may be None for a conformal (pure a) metric.  Queries with
    r <= r_min, or failing the optional domain_check(r) predicate, raise
    DomainError.
    """
    eye = np.eye(n)

    def _check(r):
        if np.any(r <= r_min):
            raise DomainError(
                f"{name}: point with |x| = {float(np.min(r)):.6g} outside "
                f"domain |x| > {r_min:.6g}")
        if domain_check is not None:
            ok = domain_check(r)
            if not np.all(ok):
                bad = float(r[np.argmin(ok)])
                raise DomainError(f"{name}: point with |x| = {bad:.6g} "
                                  "outside metric domain")

    def _parts(x):
        pts, single = _batch(x)
        r = np.linalg.norm(pts, axis=-1)
        _check(r)
        return pts, single, r

    def eval_g(x):
        pts, single, r = _parts(x)
        g = profile_a(r)[:, None, None] * eye[None]
        if b_profile is not None:
            g = g + b_profile(r)[:, None, None] * pts[:, :, None] * pts[:, None, :]
        return _unbatch(g, single)

    def eval_dg(x):
        pts, single, r = _parts(x)
        _, da, _, _ = _scalar_radial_derivatives(profile_a, pts, r)
        out = eye[None, :, :, None] * da[:, None, None, :]
        if b_profile is not None:
            b0, db, _, _ = _scalar_radial_derivatives(b_profile, pts, r)
            xx = pts[:, :, None] * pts[:, None, :]
            # d_k (x_i x_j) = delta_ik x_j + delta_jk x_i
            d1xx = (eye[None, :, None, :] * pts[:, None, :, None]
                    + eye[None, None, :, :] * pts[:, :, None, None])
            out = out + xx[:, :, :, None] * db[:, None, None, :] + b0[:, None, None, None] * d1xx
        return _unbatch(out, single)

    def eval_d2g(x):
        pts, single, r = _parts(x)
        _, _, d2a, _ = _scalar_radial_derivatives(profile_a, pts, r)
        out = eye[None, :, :, None, None] * d2a[:, None, None, :, :]
        if b_profile is not None:
            b0, db, d2b, _ = _scalar_radial_derivatives(b_profile, pts, r)
            xx = pts[:, :, None] * pts[:, None, :]
            d1xx = (eye[None, :, None, :] * pts[:, None, :, None]
                    + eye[None, None, :, :] * pts[:, :, None, None])
            d2xx = (eye[:, None, :, None] * eye[None, :, None, :]
                    + eye[:, None, None, :] * eye[None, :, :, None])[None]
            out = (out
                   + xx[:, :, :, None, None] * d2b[:, None, None, :, :]
                   + d1xx[:, :, :, :, None] * db[:, None, None, None, :]
                   + d1xx[:, :, :, None, :] * db[:, None, None, :, None]
                   + b0[:, None, None, None, None] * d2xx)
        return _unbatch(out, single)

    def eval_d3g(x):
        pts, single, r = _parts(x)
        _, _, _, d3a = _scalar_radial_derivatives(profile_a, pts, r)
        out = eye[None, :, :, None, None, None] * d3a[:, None, None, :, :, :]
        if b_profile is not None:
            b0, db, d2b, d3b = _scalar_radial_derivatives(b_profile, pts, r)
            xx = pts[:, :, None] * pts[:, None, :]
            d1xx = (eye[None, :, None, :] * pts[:, None, :, None]
                    + eye[None, None, :, :] * pts[:, :, None, None])
            d2xx = (eye[:, None, :, None] * eye[None, :, None, :]
                    + eye[:, None, None, :] * eye[None, :, :, None])[None]
            out = (out
                   + xx[:, :, :, None, None, None] * d3b[:, None, None, :, :, :]
                   + d1xx[:, :, :, :, None, None] * d2b[:, None, None, None, :, :]
                   + d1xx[:, :, :, None, :, None] * d2b[:, None, None, :, None, :]
                   + d1xx[:, :, :, None, None, :] * d2b[:, None, None, :, :, None]
                   + d2xx[:, :, :, :, :, None] * db[:, None, None, None, None, :]
                   + d2xx[:, :, :, :, None, :] * db[:, None, None, None, :, None]
                   + d2xx[:, :, :, None, :, :] * db[:, None, None, :, None, None])
        return _unbatch(out, single)

    profile_a = a_profile
    return MetricField(n=n, eval_g=eval_g, eval_dg=eval_dg,
                       eval_d2g=eval_d2g, eval_d3g=eval_d3g,
                       tau=tau, derivative_provenance="analytic", name=name)


def _const_profile(value):
    r = sp.Symbol("r", positive=True)
    return RadialProfile(sp.Float(value) + 0 * r, r)


def euclidean(n):
    """The flat metric on R^n."""
    if n < 2:
        raise ValueError("dimension must be at least 2")
    eye = np.eye(n)

    def eval_g(x):
        pts, single = _batch(x)
        return _unbatch(np.broadcast_to(eye, (len(pts), n, n)).copy(), single)

    def _zeros(extra):
        def ev(x):
            pts, single = _batch(x)
            return _unbatch(np.zeros((len(pts),) + (n,) * extra), single)
        return ev

    return MetricField(n=n, eval_g=eval_g, eval_dg=_zeros(3),
                       eval_d2g=_zeros(4), eval_d3g=_zeros(5),
                       tau=TAU_INFINITE, name="euclidean")


def schwarzschild_family(k, n, m, chart="conformal"):
    """Static spherically symmetric metric with mass-power parameter m.

    In the rho chart: (1 - 2m/rho^(n/k-2))^(-1) drho^2 + rho^2 dTheta^2,
    realized in Cartesian components.  In the conformal chart:
    (1 + m/(2 r^(n/k-2)))^(4k/(n-2k)) * delta.  Negative m is accepted
    wherever the metric stays positive definite.
    """
    if not (isinstance(k, (int, np.integer)) and 1 <= k < n / 2):
        raise ValueError("require integer 1 <= k < n/2")
    q = sp.Rational(n, k) - 2
    qf = n / k - 2.0
    r = sp.Symbol("r", positive=True)
    if chart == "conformal":
        phi = 1 + sp.Rational(1, 2) * m / r ** q
        a = phi ** sp.Rational(4 * k, n - 2 * k)
        r_min = 0.0 if m >= 0 else float((-m / 2) ** (1 / qf))
        return radial_metric(n, RadialProfile(a, r), None, tau=qf,
                             r_min=r_min,
                             name=f"schwarzschild(k={k},n={n},m={m},conformal)")
    if chart == "rho":
        A = (1 - 2 * m / r ** q) ** (-1)
        b = (A - 1) / r ** 2
        r_min = 0.0 if m <= 0 else float((2 * m) ** (1 / qf))

        def domain_check(rv):
            # positive-definite radial direction: A > 0
            return 1 - 2 * m * rv ** (-qf) > 0

        return radial_metric(n, _const_profile(1.0), RadialProfile(b, r),
                             tau=qf, r_min=r_min, domain_check=domain_check,
                             name=f"schwarzschild(k={k},n={n},m={m},rho)")
    raise ValueError(f"unknown chart {chart!r}; use 'rho' or 'conformal'")


def schwarzschild_conformal_profile(k, n, m):
    """The radial exponent u with e^(-2u) delta equal to the conformal chart.

    Defined by u = -(2k/(n-2k)) * log(1 + m/(2 r^(n/k-2))).
    """
    r = sp.Symbol("r", positive=True)
    q = sp.Rational(n, k) - 2
    u = -sp.Rational(2 * k, n - 2 * k) * sp.log(1 + sp.Rational(1, 2) * m / r ** q)
    return RadialProfile(u, r)


def conformal_radial(n, u):
    """Conformally flat metric g = e^(-2u(r)) delta from a radial exponent.

    u may be a RadialProfile or a sympy expression in one symbol.
    """
    if not isinstance(u, RadialProfile):
        u = RadialProfile(u)
    a = sp.exp(-2 * u.expr)
    # decay read off from the profile is the caller's business; assume the
    # exponent itself decays like r^-tau with tau unknown: keep a sentinel
    # unless the caller wraps the result.
    return radial_metric(n, RadialProfile(a, u.symbol), None,
                         tau=np.nan, name="conformal-radial")


def with_tau(g, tau):
    """Copy of a MetricField with the declared decay order replaced."""
    return MetricField(n=g.n, eval_g=g.eval_g, eval_dg=g.eval_dg,
                       eval_d2g=g.eval_d2g, eval_d3g=g.eval_d3g,
                       tau=tau, derivative_provenance=g.derivative_provenance,
                       name=g.name)


def graph_metric(f):
    """Induced metric delta + df x df of a graph over flat space.

    f must provide batched grad/hess/third evaluators (see graphcase).
    First and second metric derivatives are assembled from f; the third
    would need fourth derivatives of f, so it is backed by central
    differences of the analytic second derivative.
    """
    n = f.n
    eye = np.eye(n)

    def eval_g(x):
        pts, single = _batch(x)
        df = f.grad(pts)
        g = eye[None] + df[:, :, None] * df[:, None, :]
        return _unbatch(g, single)

    def eval_dg(x):
        pts, single = _batch(x)
        df = f.grad(pts)
        d2f = f.hess(pts)
        # d_k (f_i f_j) = f_ik f_j + f_i f_jk
        out = (d2f[:, :, None, :] * df[:, None, :, None]
               + df[:, :, None, None] * d2f[:, None, :, :])
        return _unbatch(out, single)

    def eval_d2g(x):
        pts, single = _batch(x)
        df = f.grad(pts)
        d2f = f.hess(pts)
        d3f = f.third(pts)
        out = (d3f[:, :, None, :, :] * df[:, None, :, None, None]
               + d2f[:, :, None, :, None] * d2f[:, None, :, None, :]
               + d2f[:, :, None, None, :] * d2f[:, None, :, :, None]
               + df[:, :, None, None, None] * d3f[:, None, :, :, :])
        return _unbatch(out, single)

    def eval_d3g(x):
        pts, single = _batch(x)
        h = fd_step_second(pts)
        out = np.empty((len(pts), n, n, n, n, n))
        for mdir in range(n):
            step = np.zeros_like(pts)
            step[:, mdir] = h
            out[..., mdir] = (eval_d2g(pts + step) - eval_d2g(pts - step)) \
                / (2.0 * h)[:, None, None, None, None]
        return _unbatch(out, single)

    return MetricField(n=n, eval_g=eval_g, eval_dg=eval_dg,
                       eval_d2g=eval_d2g, eval_d3g=eval_d3g,
                       tau=getattr(f, "tau", np.nan),
                       derivative_provenance="analytic",
                       name=f"graph({getattr(f, 'name', 'f')})")


def egb_horizon_radius(n, alpha, m):
    """Largest root r0 of 1 + (r^2/at)(1 - sqrt(1 + 4 at m / r^n)) = 0.

    Here at = 2 (n-2)(n-3) alpha.  Returns 0.0 when the profile has no
    positive root (e.g. m <= 0 or alpha = 0 with m <= 0).
    """
    at = 2.0 * (n - 2) * (n - 3) * alpha
    if at == 0.0:
        return (2.0 * m) ** (1.0 / (n - 2)) if m > 0 else 0.0

    def F(rv):
        # conjugate form of 1 + (r^2/at)(1 - sqrt(1 + 4 at m / r^n)),
        # stable for large r
        y = 4.0 * at * m / rv ** n
        return 1.0 - 4.0 * m / (rv ** (n - 2) * (1.0 + np.sqrt(1.0 + y)))

    if m <= 0:
        return 0.0
    from scipy.optimize import brentq
    lo = 1e-8
    hi = max(1.0, (4.0 * m) ** (1.0 / (n - 2)))
    while F(hi) <= 0:
        hi *= 2.0
    return float(brentq(F, lo, hi, xtol=1e-14, rtol=8.9e-16))


def egb_blackhole(n, alpha, m):
    """Static Gauss-Bonnet-corrected black hole metric in the r chart.

    g = F(r)^(-1) dr^2 + r^2 dTheta^2 with
    F = 1 + (r^2/at)(1 - sqrt(1 + 4 at m / r^n)), at = 2(n-2)(n-3) alpha.
    alpha = 0 falls back to the k=1 member of schwarzschild_family.
    """
    if alpha == 0.0:
        return schwarzschild_family(1, n, m, chart="rho")
    at = 2 * (n - 2) * (n - 3) * sp.nsimplify(alpha, rational=False)
    r = sp.Symbol("r", positive=True)
    # conjugate form of the textbook profile, stable for large r
    G = 4 * m / (r ** (n - 2) * (1 + sp.sqrt(1 + 4 * at * m / r ** n)))
    F = 1 - G
    b = G / (F * r ** 2)
    r0 = egb_horizon_radius(n, alpha, m)
    return radial_metric(n, _const_profile(1.0), RadialProfile(b, r),
                         tau=float(n - 2), r_min=r0,
                         name=f"egb(n={n},alpha={alpha},m={m})")


def identity_change(n):
    """The trivial coordinate change."""
    def forward(x):
        return np.asarray(x, dtype=float).copy()

    def jacobian(x):
        pts, single = _batch(x)
        return _unbatch(np.broadcast_to(np.eye(n), (len(pts), n, n)).copy(), single)

    def d_jacobian(x):
        pts, single = _batch(x)
        return _unbatch(np.zeros((len(pts), n, n, n)), single)

    return CoordinateChange(n=n, forward=forward, jacobian=jacobian,
                            d_jacobian=d_jacobian, decay=TAU_INFINITE,
                            name="identity")


def rotation_change(Q):
    """Rigid rotation xhat = Q^T x, i.e. psi(xhat) = Q xhat."""
    Q = np.asarray(Q, dtype=float)
    n = Q.shape[0]
    if not np.allclose(Q @ Q.T, np.eye(n), atol=1e-12):
        raise ValueError("rotation matrix must be orthogonal")

    def forward(x):
        pts, single = _batch(x)
        return _unbatch(pts @ Q.T, single)

    def jacobian(x):
        pts, single = _batch(x)
        return _unbatch(np.broadcast_to(Q, (len(pts), n, n)).copy(), single)

    def d_jacobian(x):
        pts, single = _batch(x)
        return _unbatch(np.zeros((len(pts), n, n, n)), single)

    return CoordinateChange(n=n, forward=forward, jacobian=jacobian,
                            d_jacobian=d_jacobian, decay=TAU_INFINITE,
                            name="rotation")


def radial_decay_profile(eps, tau_phi):
    """Profile c(r) = eps * (1 + r^2)^(-tau_phi/2) for perturbation maps."""
    r = sp.Symbol("r", positive=True)
    return RadialProfile(eps * (1 + r ** 2) ** (-sp.nsimplify(tau_phi) / 2), r)


def perturbation_change(n, profile, decay):
    """Coordinate change xhat = x + phi(x) with phi^i = x^i c(|x|).

    The inverse map psi is evaluated by Newton iteration; the Jacobian
    and its derivative come from the closed form of D phi.
    """
    def _phi_parts(pts):
        r = np.linalg.norm(pts, axis=-1)
        r = np.maximum(r, 1e-300)
        c0, dc, d2c, _ = _scalar_radial_derivatives(profile, pts, r)
        phi = c0[:, None] * pts
        eye = np.eye(n)
        dphi = eye[None] * c0[:, None, None] + pts[:, :, None] * dc[:, None, :]
        d2phi = (eye[None, :, :, None] * dc[:, None, None, :]
                 + eye[None, :, None, :] * dc[:, None, :, None]
                 + pts[:, :, None, None] * d2c[:, None, :, :])
        return phi, dphi, d2phi

    def forward(x):
        pts, single = _batch(x)
        cur = pts.copy()
        for _ in range(60):
            phi, dphi, _ = _phi_parts(cur)
            res = cur + phi - pts
            if np.max(np.abs(res)) < 1e-14 * max(1.0, np.max(np.abs(pts))):
                break
            M = np.eye(n)[None] + dphi
            cur = cur - np.linalg.solve(M, res[..., None])[..., 0]
        else:
            raise RuntimeError("perturbation inverse did not converge")
        return _unbatch(cur, single)

    def jacobian(x):
        pts, single = _batch(x)
        cur = forward(pts)
        _, dphi, _ = _phi_parts(cur)
        J = np.linalg.inv(np.eye(n)[None] + dphi)
        return _unbatch(J, single)

    def d_jacobian(x):
        pts, single = _batch(x)
        cur = forward(pts)
        _, dphi, d2phi = _phi_parts(cur)
        J = np.linalg.inv(np.eye(n)[None] + dphi)
        # d_b J^i_a = -J^i_p (d_s d_q phi^p) J^q_a J^s_b
        dJ = -np.einsum('xip,xpqs,xqa,xsb->xiab', J, d2phi, J, J)
        return _unbatch(dJ, single)

    return CoordinateChange(n=n, forward=forward, jacobian=jacobian,
                            d_jacobian=d_jacobian, decay=decay,
                            name="perturbation")


def pushforward(g, c):
    """Metric of g in the coordinates of c (identity passes through)."""
    if c.name == "identity":
        return g
    return _pushforward(g, c)


def _pushforward(g, c):
    """The metric g expressed in the new coordinates of a CoordinateChange.

    ghat_ab(xhat) = J^i_a J^j_b g_ij(psi(xhat)); the first derivative is
    assembled by the chain rule, higher ones by central differences of
    the analytic layers below them.
    """
    n = g.n

    def eval_g(x):
        pts, single = _batch(x)
        base = c.forward(pts)
        J = c.jacobian(pts)
        gv = g.eval_g(base)
        out = np.einsum('xia,xij,xjb->xab', J, gv, J)
        return _unbatch(out, single)

    def eval_dg(x):
        pts, single = _batch(x)
        base = c.forward(pts)
        J = c.jacobian(pts)
        dJ = c.d_jacobian(pts)
        gv = g.eval_g(base)
        dgv = g.eval_dg(base)
        out = (np.einsum('xiac,xij,xjb->xabc', dJ, gv, J)
               + np.einsum('xia,xij,xjbc->xabc', J, gv, dJ)
               + np.einsum('xia,xijs,xsc,xjb->xabc', J, dgv, J, J))
        return _unbatch(out, single)

    def _fd_of(fun, extra):
        def ev(x):
            pts, single = _batch(x)
            h = fd_step_second(pts)
            out = np.empty((len(pts),) + (n,) * extra)
            for mdir in range(n):
                step = np.zeros_like(pts)
                step[:, mdir] = h
                diff = (fun(pts + step) - fun(pts - step))
                out[..., mdir] = diff / (2.0 * h).reshape((-1,) + (1,) * (extra - 1))
            return _unbatch(out, single)
        return ev

    eval_d2g = _fd_of(eval_dg, 4)
    eval_d3g = _fd_of(eval_d2g, 5)
    return MetricField(n=n, eval_g=eval_g, eval_dg=eval_dg,
                       eval_d2g=eval_d2g, eval_d3g=eval_d3g,
                       tau=g.tau, derivative_provenance="finite-difference",
                       name=f"pushforward({g.name},{c.name})")


def from_g_only(n, eval_g_batched, tau, name="fd-metric"):
    """Adapter: build a MetricField from a bare batched g evaluator.

    All derivatives are central finite differences (first order with the
    tight step, higher orders nested on the wide step).
    """
    def eval_dg(x):
        pts, single = _batch(x)
        h = fd_step_first(pts)
        out = np.empty((len(pts), n, n, n))
        for k in range(n):
            step = np.zeros_like(pts)
            step[:, k] = h
            out[..., k] = (eval_g_batched(pts + step) - eval_g_batched(pts - step)) \
                / (2.0 * h)[:, None, None]
        return _unbatch(out, single)

    def _fd_of(fun, extra):
        def ev(x):
            pts, single = _batch(x)
            h = fd_step_second(pts)
            out = np.empty((len(pts),) + (n,) * extra)
            for mdir in range(n):
                step = np.zeros_like(pts)
                step[:, mdir] = h
                out[..., mdir] = (fun(pts + step) - fun(pts - step)) \
                    / (2.0 * h).reshape((-1,) + (1,) * (extra - 1))
            return _unbatch(out, single)
        return ev

    def eval_g(x):
        pts, single = _batch(x)
        return _unbatch(eval_g_batched(pts), single)

    return MetricField(n=n, eval_g=eval_g, eval_dg=eval_dg,
                       eval_d2g=_fd_of(eval_dg, 4), eval_d3g=_fd_of(_fd_of(eval_dg, 4), 5),
                       tau=tau, derivative_provenance="finite-difference",
                       name=name)

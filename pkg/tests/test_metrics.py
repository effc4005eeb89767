import numpy as np
import pytest
import sympy as sp

from lovelock_mass import graphcase, metrics

import oracles


def _random_points(rng, n, count, lo=1.5, hi=4.0):
    pts = rng.uniform(lo, hi, size=(count, n))
    return pts * rng.choice([-1.0, 1.0], size=(count, n))


def _families(n=5):
    r = sp.Symbol("r", positive=True)
    yield metrics.schwarzschild_family(2, n, 1.0, chart="conformal")
    yield metrics.schwarzschild_family(1, n, 0.8, chart="rho")
    yield metrics.egb_blackhole(n, 0.05, 0.8)
    yield metrics.conformal_radial(n, metrics.RadialProfile(
        sp.Rational(1, 4) / (1 + r ** 2), r))


def test_euclidean_is_flat():
    g = metrics.euclidean(5)
    x = np.array([1.0, -2.0, 0.5, 3.0, 0.1])
    assert np.array_equal(g.eval_g(x), np.eye(5))
    assert not g.eval_dg(x).any()
    assert not g.eval_d2g(x).any()
    assert np.isinf(g.tau)


def test_analytic_derivatives_match_finite_differences():
    rng = np.random.default_rng(10)
    for g in _families():
        pts = _random_points(rng, g.n, 50, lo=2.0, hi=4.0)
        for x in pts[:6]:
            dg, d2g, d3g = oracles.fd_metric_derivatives(g, x)
            scale1 = 1.0 + np.abs(dg).max()
            scale2 = 1.0 + np.abs(d2g).max()
            scale3 = 1.0 + np.abs(d3g).max()
            assert np.abs(dg - g.eval_dg(x)).max() <= 1e-6 * scale1
            assert np.abs(d2g - g.eval_d2g(x)).max() <= 1e-4 * scale2
            assert np.abs(d3g - g.eval_d3g(x)).max() <= 1e-2 * scale3
        # cheap first-order screen on the rest of the 50 points
        for x in pts[6:]:
            dg = oracles._central_d1(g.eval_g, x, 1e-5, richardson=True)
            assert np.abs(dg - g.eval_dg(x)).max() <= 1e-5 * (
                1.0 + np.abs(dg).max())


def test_metric_symmetry_and_positivity():
    rng = np.random.default_rng(11)
    for g in _families():
        pts = _random_points(rng, g.n, 20, lo=2.0, hi=5.0)
        gv = g.eval_g(pts)
        assert np.abs(gv - gv.transpose(0, 2, 1)).max() < 1e-14
        assert np.linalg.eigvalsh(gv).min() > 0
        dg = g.eval_dg(pts)
        assert np.abs(dg - dg.transpose(0, 2, 1, 3)).max() < 1e-12
        d2g = g.eval_d2g(pts)
        assert np.abs(d2g - d2g.transpose(0, 1, 2, 4, 3)).max() < 1e-10


def test_declared_decay_rate():
    # |g - delta| must decay at the declared rate within factor 4,
    # sampled at r in {10, 100, 1000}
    for g in _families():
        if not np.isfinite(g.tau) or g.tau <= 0:
            continue
        direction = np.full(g.n, 1.0 / np.sqrt(g.n))
        devs = []
        for r in (10.0, 100.0, 1000.0):
            devs.append(np.abs(g.eval_g(r * direction) - np.eye(g.n)).max())
        for (r1, d1), (r2, d2) in zip(
                zip((10.0, 100.0), devs), zip((100.0, 1000.0), devs[1:])):
            observed = np.log(d1 / d2) / np.log(r2 / r1)
            assert observed >= g.tau / 4.0
            assert observed <= g.tau * 4.0


def test_schwarzschild_conformal_factor_value():
    # k=2, n=6, m=1 conformal chart: factor (1 + 1/(2 r^{n/2-2}))^{4k/(n-2k)}
    g = metrics.schwarzschild_family(2, 6, 1.0, chart="conformal")
    x = np.zeros(6)
    x[1] = 10.0
    expected = (1.0 + 1.0 / (2.0 * 10.0)) ** 4
    gv = g.eval_g(x)
    assert gv[0, 0] == pytest.approx(expected, rel=1e-12)
    assert np.allclose(gv, expected * np.eye(6), rtol=1e-12)


def test_schwarzschild_m0_is_flat():
    g = metrics.schwarzschild_family(1, 5, 0.0)
    x = np.array([2.0, 1.0, -1.0, 0.5, 0.3])
    assert np.allclose(g.eval_g(x), np.eye(5), atol=1e-14)


def test_schwarzschild_horizon_domain_error():
    # rho chart: horizon where rho^{n/k-2} = 2m
    g = metrics.schwarzschild_family(2, 6, 1.0, chart="rho")
    rho0 = 2.0 ** (1.0 / (6 / 2 - 2))  # 2m = rho0^{n/2-2}
    inside = np.zeros(6)
    inside[0] = 0.9 * rho0
    with pytest.raises(metrics.DomainError):
        g.eval_g(inside)
    outside = np.zeros(6)
    outside[0] = 1.5 * rho0
    assert np.isfinite(g.eval_g(outside)).all()


def test_conformal_radial_zero_profile():
    r = sp.Symbol("r", positive=True)
    g = metrics.conformal_radial(5, metrics.RadialProfile(r * 0, r))
    x = np.array([1.0, 2.0, -0.5, 0.3, 0.7])
    assert np.allclose(g.eval_g(x), np.eye(5), atol=1e-15)
    with pytest.raises(metrics.DomainError):
        g.eval_g(np.zeros(5))


def test_conformal_radial_hessian_structure():
    # at x = (r, 0, ..., 0): u_11 = u_rr and u_aa = u_r / r for a >= 2,
    # read off the metric second derivatives of g = e^{-2u} delta
    r = sp.Symbol("r", positive=True)
    prof = metrics.RadialProfile(sp.Rational(1, 3) / (1 + r ** 2), r)
    g = metrics.conformal_radial(5, prof)
    rv = 2.0
    x = np.zeros(5)
    x[0] = rv
    # d_a d_b of the conformal factor F = e^{-2u}:
    # F_ab = e^{-2u} (4 u_a u_b - 2 u_ab); diagonal metric entries carry F
    d2g = g.eval_d2g(x)
    u, ur, urr = float(prof(rv)), float(prof.d1(rv)), float(prof.d2(rv))
    F = np.exp(-2 * u)
    f11 = F * (4 * ur * ur - 2 * urr)
    faa = F * (-2 * ur / rv)
    assert d2g[0, 0, 0, 0] == pytest.approx(f11, rel=1e-10)
    assert d2g[0, 0, 1, 1] == pytest.approx(faa, rel=1e-10)
    assert d2g[2, 2, 1, 1] == pytest.approx(faa, rel=1e-10)


def test_graph_metric_inverse_and_determinant():
    rng = np.random.default_rng(12)
    f = graphcase.gaussian_bump_graph(5, rng.normal(size=(2, 5)),
                                      [0.8, -0.6], [1.2, 1.9])
    g = f.metric
    pts = rng.normal(size=(30, 5)) * 2.0
    gv = g.eval_g(pts)
    df = f.grad(pts)
    expected_det = 1.0 + np.einsum('xi,xi->x', df, df)
    assert np.abs(np.linalg.det(gv) - expected_det).max() < 1e-12
    ginv = np.linalg.inv(gv)
    w = expected_det
    expected_inv = np.eye(5)[None] - df[:, :, None] * df[:, None, :] / w[:, None, None]
    assert np.abs(ginv - expected_inv).max() < 1e-10


def test_graph_metric_unit_gradient_entries():
    f = graphcase.linear_graph(5, np.array([1.0, 0, 0, 0, 0]))
    g = f.metric
    x = np.zeros(5)
    gv = g.eval_g(x)
    assert gv[0, 0] == pytest.approx(2.0)
    assert np.linalg.inv(gv)[0, 0] == pytest.approx(0.5)


def test_egb_blackhole_limits():
    x = np.array([3.0, 1.0, 0.5, -1.0, 0.2, 0.1])
    flat = metrics.egb_blackhole(6, 0.1, 0.0)
    assert np.allclose(flat.eval_g(x), np.eye(6), atol=1e-13)
    # alpha -> 0 approaches the k=1 Schwarzschild rho chart
    near = metrics.egb_blackhole(6, 1e-8, 1.0)
    sch = metrics.schwarzschild_family(1, 6, 1.0, chart="rho")
    assert np.abs(near.eval_g(x) - sch.eval_g(x)).max() < 1e-6


def test_egb_horizon_relation():
    # m = r0^{n-2}/2 + (alpha_tilde/4) r0^{n-4}
    n, alpha, m = 6, 0.1, 1.0
    at = 2.0 * (n - 2) * (n - 3) * alpha
    r0 = metrics.egb_horizon_radius(n, alpha, m)
    assert 0.5 * r0 ** (n - 2) + 0.25 * at * r0 ** (n - 4) == \
        pytest.approx(m, rel=1e-12)
    g = metrics.egb_blackhole(n, alpha, m)
    inside = np.zeros(n)
    inside[0] = 0.9 * r0
    with pytest.raises(metrics.DomainError):
        g.eval_g(inside)


def test_egb_scalar_curvature_positive():
    from lovelock_mass import curvature
    g = metrics.egb_blackhole(6, 0.1, 1.0)
    rng = np.random.default_rng(13)
    pts = _random_points(rng, 6, 20, lo=2.0, hi=6.0)
    assert curvature.riemann(g, pts).scalar.min() > 0


def test_pushforward_identity_and_rotation():
    g = metrics.schwarzschild_family(2, 5, 1.0)
    x = np.array([2.0, 1.0, -1.5, 0.5, 0.2])
    ident = metrics.pushforward(g, metrics.identity_change(5))
    assert np.abs(ident.eval_g(x) - g.eval_g(x)).max() < 1e-12
    rng = np.random.default_rng(14)
    Q = np.linalg.qr(rng.normal(size=(5, 5)))[0]
    rot = metrics.pushforward(metrics.euclidean(5), metrics.rotation_change(Q))
    assert np.abs(rot.eval_g(x) - np.eye(5)).max() < 1e-12


def test_pushforward_derivative_chain_rule():
    # pushed-forward first derivatives must agree with finite
    # differences of the pushed-forward metric itself
    g = metrics.schwarzschild_family(2, 5, 1.0)
    c = metrics.perturbation_change(
        5, metrics.radial_decay_profile(0.1, 1.0), decay=1.0)
    ghat = metrics.pushforward(g, c)
    assert ghat.derivative_provenance == "finite-difference"
    x = np.array([2.5, -1.0, 1.5, 0.5, -0.4])
    dg_fd = oracles._central_d1(ghat.eval_g, x, 1e-5, richardson=True)
    assert np.abs(dg_fd - ghat.eval_dg(x)).max() < 1e-7


def test_coordinate_change_jacobian_consistency():
    c = metrics.perturbation_change(
        5, metrics.radial_decay_profile(0.1, 1.0), decay=1.0)
    rng = np.random.default_rng(15)
    pts = _random_points(rng, 5, 10, lo=2.0, hi=5.0)
    J = c.jacobian(pts)
    h = 1e-6
    for a in range(5):
        e = np.zeros(5)
        e[a] = h
        fd = (c.forward(pts + e) - c.forward(pts - e)) / (2 * h)
        assert np.abs(J[:, :, a] - fd).max() < 1e-8

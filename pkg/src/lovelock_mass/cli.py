"""Command-line front end.

Subcommands:
  mass     flux-limit mass of a configured metric family
  flux     flux-versus-radius table as CSV
  verify   randomized identity suites with residuals and pass/fail
  penrose  bulk + horizon-boundary report with the bound chain

Configuration is a single JSON document (--config); individual flags
override config fields.  Numbers are serialized with full double
precision so reruns with the same config and seed are bit-identical.
Exit codes: 0 success, 1 error, 2 fit warning, 3 violated bound.
"""

import argparse
import json
import math
import os
import sys

import numpy as np
import sympy as sp

from . import curvature, graphcase, mass as massmod, metrics, quadrature

_MAX_DIMENSION = 8

_CONFIG_KEYS = {"metric", "mass", "quad_level", "seed", "output", "alpha",
                "horizon", "suite", "n", "tolerance"}
_METRIC_KEYS = {"family", "k", "n", "m", "alpha", "chart", "u"}
_MASS_KEYS = {"k", "as", "radii", "r0", "ratio", "count"}


def _fail(msg):
    print(f"error: {msg}", file=sys.stderr)
    return 1


def _thread_cap():
    """Validate the LOVELOCK_MASS_THREADS cap and apply it if possible."""
    raw = os.environ.get("LOVELOCK_MASS_THREADS")
    if raw is None:
        return None
    try:
        cap = int(raw)
        if cap < 1:
            raise ValueError
    except ValueError:
        raise SystemExit(_fail(
            f"LOVELOCK_MASS_THREADS must be a positive integer, got {raw!r}"))
    try:
        from threadpoolctl import threadpool_limits
        threadpool_limits(limits=cap)
    except ImportError:
        # computation is deterministic regardless; the cap is best-effort
        pass
    return cap


def _load_config(path):
    if path is None:
        return {}
    with open(path) as fh:
        cfg = json.load(fh)
    unknown = set(cfg) - _CONFIG_KEYS
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    for sub, allowed in (("metric", _METRIC_KEYS), ("mass", _MASS_KEYS)):
        extra = set(cfg.get(sub, {})) - allowed
        if extra:
            raise ValueError(f"unknown {sub} config keys: {sorted(extra)}")
    return cfg


def _build_metric(mcfg):
    family = mcfg.get("family")
    if family is None:
        raise ValueError("metric.family is required")
    n = int(mcfg.get("n", 0))
    if n < 4:
        raise ValueError("metric.n must be an integer >= 4")
    if n > _MAX_DIMENSION:
        raise ValueError(
            f"dimension {n} exceeds the supported maximum {_MAX_DIMENSION} "
            "(deterministic product quadrature only)")
    if family == "euclidean":
        return metrics.euclidean(n)
    if family == "schwarzschild":
        k = int(mcfg.get("k", 2))
        m = float(mcfg.get("m", 1.0))
        chart = mcfg.get("chart", "conformal")
        return metrics.schwarzschild_family(k, n, m, chart=chart)
    if family == "egb":
        return metrics.egb_blackhole(n, float(mcfg.get("alpha", 0.0)),
                                     float(mcfg.get("m", 1.0)))
    if family == "conformal-radial":
        expr = mcfg.get("u")
        if expr is None:
            raise ValueError("conformal-radial needs metric.u "
                             "(expression in r)")
        r = sp.Symbol("r", positive=True)
        u = sp.sympify(expr, locals={"r": r})
        return metrics.conformal_radial(n, metrics.RadialProfile(u, r))
    raise ValueError(f"unknown metric.family {family!r}")


def _build_graph(mcfg):
    family = mcfg.get("family")
    n = int(mcfg.get("n", 0))
    if family == "schwarzschild-graph":
        return graphcase.schwarzschild_graph(n, float(mcfg.get("m", 1.0)),
                                             k=int(mcfg.get("k", 2)))
    if family == "egb-graph":
        return graphcase.egb_graph(n, float(mcfg.get("alpha", 0.0)),
                                   float(mcfg.get("m", 1.0)))
    if family in (None, "none"):
        return None
    raise ValueError(f"unknown graph family {family!r}")


def _build_horizon(hcfg, n):
    if hcfg in (None, "none"):
        return None
    kind = hcfg.get("type")
    if kind == "sphere":
        return graphcase.sphere_surface(n, float(hcfg["radius"]))
    if kind == "ellipsoid":
        axes = [float(a) for a in hcfg["semiaxes"]]
        if len(axes) != n:
            raise ValueError(f"horizon needs {n} semiaxes, got {len(axes)}")
        return graphcase.Ellipsoid(np.array(axes))
    raise ValueError(f"unknown horizon type {kind!r}")


def _radii(mass_cfg):
    if "radii" in mass_cfg and mass_cfg["radii"] is not None:
        radii = np.asarray([float(r) for r in mass_cfg["radii"]])
        if len(radii) < 4 or np.any(np.diff(radii) <= 0):
            raise ValueError("radii must be >= 4 strictly increasing values")
        return radii
    return massmod.default_radii(float(mass_cfg.get("r0", 20.0)),
                                 float(mass_cfg.get("ratio", 2.0)),
                                 int(mass_cfg.get("count", 4)))


def _emit(doc, out_path):
    text = json.dumps(doc, indent=2, sort_keys=True)
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _merge_flags(cfg, args):
    mcfg = dict(cfg.get("metric", {}))
    if args.metric is not None:
        mcfg["family"] = args.metric
    for key in ("k", "n", "m", "alpha"):
        v = getattr(args, key, None)
        if v is not None:
            mcfg[key] = v
    cfg = dict(cfg)
    cfg["metric"] = mcfg
    mass_cfg = dict(cfg.get("mass", {}))
    if getattr(args, "k", None) is not None:
        mass_cfg["k"] = args.k
    if getattr(args, "as_", None) is not None:
        mass_cfg["as"] = args.as_
    for key in ("radii", "r0", "ratio", "count"):
        v = getattr(args, key, None)
        if v is not None:
            mass_cfg[key] = v
    cfg["mass"] = mass_cfg
    if getattr(args, "quad_level", None) is not None:
        cfg["quad_level"] = args.quad_level
    if getattr(args, "seed", None) is not None:
        cfg["seed"] = args.seed
    return cfg


def _rule_from(cfg, n):
    level = int(cfg.get("quad_level", massmod.default_level(n)))
    if level < 2:
        raise ValueError("quad_level must be >= 2")
    return quadrature.sphere_rule(n, level)


def cmd_mass(args):
    cfg = _merge_flags(_load_config(args.config), args)
    g = _build_metric(cfg.get("metric", {}))
    mass_cfg = cfg.get("mass", {})
    radii = _radii(mass_cfg)
    rule = _rule_from(cfg, g.n)
    which = mass_cfg.get("as")
    k = int(mass_cfg.get("k", cfg.get("metric", {}).get("k", 2)))
    if which is None:
        which = {1: "adm", 2: "gbc"}.get(k, "mk")
    if which == "adm":
        est = massmod.adm_mass(g, radii, rule)
    elif which == "gbc":
        est = massmod.gbc_mass(g, radii, rule)
    elif which == "mk":
        est = massmod.mk_mass(k, g, radii, rule)
    elif which == "egb":
        alpha = float(cfg.get("alpha", cfg.get("metric", {}).get("alpha", 0.0)))
        est = massmod.egb_mass(g, alpha, radii, rule)
    else:
        raise ValueError(f"unknown mass kind {which!r}")
    doc = massmod.mass_estimate_dict(est)
    doc["metric"] = g.name
    doc["quad_level"] = rule.level
    _emit(doc, args.out)
    print(f"mass = {est.value!r}  (model={est.model}, "
          f"exponent={est.fit_exponent!r}, residual={est.residual!r})",
          file=sys.stderr)
    return 2 if est.warning else 0


def cmd_flux(args):
    cfg = _merge_flags(_load_config(args.config), args)
    g = _build_metric(cfg.get("metric", {}))
    mass_cfg = cfg.get("mass", {})
    radii = _radii(mass_cfg)
    rule = _rule_from(cfg, g.n)
    k = int(mass_cfg.get("k", cfg.get("metric", {}).get("k", 2)))
    vals = [massmod.mk_flux(k, g, r, rule) for r in radii]
    lines = [f"# integrand=m{k} n={g.n} k={k}", "r,flux"]
    lines += [f"{float(r)!r},{float(v)!r}" for r, v in zip(radii, vals)]
    text = "\n".join(lines) + "\n"
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(text)
    else:
        print(text, end="")
    return 0


def _suite_divergence(n, rng):
    r = sp.Symbol("r", positive=True)
    g = metrics.conformal_radial(
        n, metrics.RadialProfile(sp.Rational(3, 10) / (1 + r ** 2), r))
    pts = rng.uniform(1.5, 4.0, size=(12, n)) * rng.choice([-1, 1], size=(12, n))
    checks = []
    for k in (1, 2):
        res = float(np.abs(curvature.divergence_of_P(k, g, pts)).max())
        checks.append(("divergence-conformal-k%d" % k, res, 1e-6))
    f = graphcase.gaussian_bump_graph(n, rng.normal(size=(2, n)),
                                      [0.4, -0.3], [1.5, 2.0])
    res = float(np.abs(curvature.divergence_of_P(2, f.metric, pts)).max())
    checks.append(("divergence-graph-k2", res, 1e-4))
    return checks


def _suite_graph_identity(n, rng):
    f = graphcase.gaussian_bump_graph(n, rng.normal(size=(2, n)),
                                      [0.5, -0.4], [1.4, 2.1])
    pts = rng.normal(size=(20, n)) * 2.0
    res = float(np.max(graphcase.graph_divergence_identity_residual(f, pts)))
    return [("graph-divergence-identity", res, 1e-4)]


def _suite_sigma2(n, rng):
    f = graphcase.gaussian_bump_graph(n, rng.normal(size=(2, n)),
                                      [0.6, 0.5], [1.3, 1.9])
    pts = rng.normal(size=(25, n)) * 1.5
    g = f.metric
    L2 = curvature.lovelock_L(2, g, pts)
    w2, s2 = curvature.weyl_sigma2_split(g, pts)
    scale = 1.0 + float(np.abs(L2).max())
    res = float(np.abs(L2 - (w2 + 8.0 * (n - 2) * (n - 3) * s2)).max()) / scale
    return [("weyl-sigma2-split", res, 1e-9)]


def _suite_hypersurface(n, rng):
    checks = []
    rho = 2.0
    S = graphcase.sphere_surface(n, rho)
    hd = graphcase.surface_hypersurface_data(S, np.eye(n)[0])
    res = float(np.abs(hd.eigenvalues - 1.0 / rho).max())
    checks.append(("sphere-umbilic", res, 1e-10))
    res = abs(hd.mean_curvatures[2] - math.comb(n - 1, 3) / rho ** 3)
    checks.append(("sphere-H3", res, 1e-10))
    axes = 1.0 + rng.uniform(0.0, 1.0, size=n)
    E = graphcase.Ellipsoid(axes)
    om = rng.normal(size=n)
    om /= np.linalg.norm(om)
    hd = graphcase.surface_hypersurface_data(E, om)
    lam = hd.eigenvalues
    # scalar curvature of the induced metric vs twice the second
    # elementary symmetric function (Gauss equation, flat ambient)
    res = abs(hd.induced_scalar - 2.0 * graphcase.elementary_symmetric(
        lam[None, :], 2)[0])
    checks.append(("gauss-2H2", float(res), 1e-12))
    # contracted Gauss identity: -(Ric - R/2 h) : A = 3 H_3 in the
    # principal frame, where Ric_aa = lam_a (H_1 - lam_a)
    H1 = lam.sum()
    ric = lam * (H1 - lam)
    Rhat = float(hd.induced_scalar)
    lhs = -np.sum((ric - 0.5 * Rhat) * lam)
    rhs = 3.0 * graphcase.elementary_symmetric(lam[None, :], 3)[0]
    checks.append(("contracted-gauss-3H3", float(abs(lhs - rhs)), 1e-9))
    return checks


def _suite_l2_24h4(n, rng):
    f = graphcase.gaussian_bump_graph(n, rng.normal(size=(2, n)),
                                      [0.7, -0.6], [1.2, 1.7])
    pts = rng.normal(size=(25, n)) * 1.5
    L2 = curvature.lovelock_L(2, f.metric, pts)
    h4 = np.array([graphcase.graph_hypersurface_data(f, p).mean_curvatures[3]
                   for p in pts])
    scale = 1.0 + float(np.abs(L2).max())
    res = float(np.abs(L2 - 24.0 * h4).max()) / scale
    return [("l2-equals-24H4", res, 1e-8)]


def _suite_invariance(n, rng, quad_level=3):
    g = metrics.schwarzschild_family(2, n, 1.0, chart="conformal")
    rule = quadrature.sphere_rule(n, quad_level)
    prof = metrics.radial_decay_profile(0.1, 1.0)
    c = metrics.perturbation_change(n, prof, decay=1.0)
    _, _, delta = massmod.invariance_check(g, c, 2, rule=rule)
    return [("mass-coordinate-invariance", float(abs(delta)), 5e-3)]


_SUITES = {
    "divergence": _suite_divergence,
    "graph-identity": _suite_graph_identity,
    "sigma2": _suite_sigma2,
    "hypersurface": _suite_hypersurface,
    "l2-24h4": _suite_l2_24h4,
    "invariance": _suite_invariance,
}


def cmd_verify(args):
    cfg = _load_config(args.config)
    suite = args.suite or cfg.get("suite")
    if suite not in _SUITES:
        return _fail(f"unknown suite {suite!r}; available: "
                     f"{sorted(_SUITES)}")
    n = int(args.n or cfg.get("n") or 5)
    if not 4 <= n <= _MAX_DIMENSION:
        return _fail(f"n must be in [4, {_MAX_DIMENSION}]")
    seed = int(args.seed if args.seed is not None else cfg.get("seed", 0))
    rng = np.random.default_rng(seed)
    checks = _SUITES[suite](n, rng)
    doc = {"suite": suite, "n": n, "seed": seed, "checks": []}
    ok = True
    for name, residual, tol in checks:
        residual = float(residual)
        passed = residual <= tol
        ok = ok and passed
        doc["checks"].append({"name": name, "residual": float(residual),
                              "tolerance": float(tol), "pass": bool(passed)})
        print(f"{name}: residual={residual!r} tol={tol!r} "
              f"{'PASS' if passed else 'FAIL'}", file=sys.stderr)
    _emit(doc, args.out)
    return 0 if ok else 1


def cmd_penrose(args):
    cfg = _merge_flags(_load_config(args.config), args)
    mcfg = cfg.get("metric", {})
    f = _build_graph(mcfg)
    n = int(mcfg.get("n", 0) or (f.n if f is not None else 0))
    if not 4 <= n <= _MAX_DIMENSION:
        return _fail(f"need metric.n in [4, {_MAX_DIMENSION}]")
    horizon = _build_horizon(cfg.get("horizon"), n)
    if horizon is None and f is not None:
        horizon = f.horizon
    if horizon is None:
        return _fail("penrose requires a horizon description")
    rule = _rule_from(cfg, n)
    tol = float(cfg.get("tolerance", 2e-3))
    report = graphcase.penrose_report(f, horizon, rule=rule)
    doc = graphcase.penrose_report_dict(report)
    doc["n"] = n
    _emit(doc, args.out)
    if float(np.min(report.slack)) < -tol:
        print("bound violated beyond tolerance", file=sys.stderr)
        return 3
    return 0


def _add_common(p):
    p.add_argument("--config", help="JSON configuration file")
    p.add_argument("--out", help="JSON output path (default stdout)")
    p.add_argument("--quad-level", dest="quad_level", type=int)
    p.add_argument("--seed", type=int)


def _add_metric_flags(p):
    p.add_argument("--metric", help="metric family name")
    p.add_argument("--k", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--as", dest="as_", choices=["adm", "gbc", "mk", "egb"])
    p.add_argument("--radii", type=lambda s: [float(v) for v in s.split(",")])
    p.add_argument("--r0", type=float)
    p.add_argument("--ratio", type=float)
    p.add_argument("--count", type=int)


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="lovelock-mass",
        description="Flux-integral masses of asymptotically flat metrics")
    sub = parser.add_subparsers(dest="command", required=True)

    p_mass = sub.add_parser("mass", help="extrapolated mass of a metric")
    _add_common(p_mass)
    _add_metric_flags(p_mass)

    p_flux = sub.add_parser("flux", help="flux-vs-radius CSV table")
    _add_common(p_flux)
    _add_metric_flags(p_flux)
    p_flux.add_argument("--csv", help="CSV output path (default stdout)")

    p_ver = sub.add_parser("verify", help="randomized identity suites")
    _add_common(p_ver)
    p_ver.add_argument("--suite", help=f"one of {sorted(_SUITES)}")
    p_ver.add_argument("--n", type=int)

    p_pen = sub.add_parser("penrose", help="bulk/boundary mass report")
    _add_common(p_pen)
    _add_metric_flags(p_pen)

    args = parser.parse_args(argv)
    _thread_cap()
    try:
        if args.command == "mass":
            return cmd_mass(args)
        if args.command == "flux":
            return cmd_flux(args)
        if args.command == "verify":
            return cmd_verify(args)
        if args.command == "penrose":
            return cmd_penrose(args)
    except (ValueError, metrics.DomainError, OSError, KeyError) as exc:
        return _fail(str(exc))
    return _fail(f"unknown command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())

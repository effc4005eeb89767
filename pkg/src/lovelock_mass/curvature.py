"""Pointwise curvature engine.

Christoffel symbols, the Riemann tensor under the convention

    R^m_{ijk} = d_i Gamma^m_{jk} - d_j Gamma^m_{ik}
                + Gamma^m_{is} Gamma^s_{jk} - Gamma^m_{js} Gamma^s_{ik},
    R_{ijkl} = R^m_{ijl} g_{mk},    R_{ik} = g^{jl} R_{ijkl},

and the derived objects: scalar curvature, Weyl/sigma_2 split, the
Gauss-Bonnet curvatures L_k, the divergence-free curvature 2-tensors
E^(k), and the rank-4 flux tensors P_(k).

All operations are batched over points; a CurvatureBundle holds the
arrays for one batch and is cached per (metric, batch) so that flux
integrands can share it.
"""

import math
import warnings
from collections import OrderedDict
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .multiindex import (lovelock_scalar_table, p_tensor_table,
                         lovelock_einstein_table)
from . import metrics as _metrics

__all__ = [
    "CurvatureBundle",
    "Rank4Field",
    "christoffel",
    "riemann",
    "bundle",
    "lovelock_L",
    "gauss_bonnet_L2_direct",
    "p_tensor",
    "p_tensor_general",
    "lovelock_einstein",
    "weyl_sigma2_split",
    "divergence_of_P",
    "kulkarni_nomizu",
]

# batch-size * term-count budget for the gather buffers
_TERM_BUDGET = 6_000_000


@dataclass(frozen=True)
class CurvatureBundle:
    """Curvature data of one metric on one batch of points.

    Index layout mirrors the formulas: gamma[..., k, i, j] = Gamma^k_ij,
    dgamma[..., k, i, j, l] = d_l Gamma^k_ij, riemann_lo[..., i, j, k, l]
    = R_ijkl, riemann_mix[..., a, b, c, d] = R_ab^cd, riemann_hi fully
    raised, ricci[..., i, k] = R_ik, scalar[...] = R.
    """

    x: np.ndarray
    n: int
    g: np.ndarray
    ginv: np.ndarray
    dg: np.ndarray
    gamma: np.ndarray
    dgamma: np.ndarray
    riemann_lo: Optional[np.ndarray] = None
    riemann_mix: Optional[np.ndarray] = None
    riemann_hi: Optional[np.ndarray] = None
    ricci: Optional[np.ndarray] = None
    scalar: Optional[np.ndarray] = None


@dataclass(frozen=True)
class Rank4Field:
    """A contravariant rank-4 tensor batch with Riemann-type symmetries."""

    components: np.ndarray
    symmetry_class: str = "riemann-type"


def _as_batch(x):
    pts = np.asarray(x, dtype=float)
    if pts.ndim == 1:
        return pts[None, :], True
    return pts, False


_cache: OrderedDict = OrderedDict()
_CACHE_SLOTS = 8


def _christoffel_arrays(g, pts):
    gv = g.eval_g(pts)
    dg = g.eval_dg(pts)
    d2g = g.eval_d2g(pts)
    ginv = np.linalg.inv(gv)
    # U[x,s,i,j] = d_j g_si + d_i g_sj - d_s g_ij
    U = dg + dg.transpose(0, 1, 3, 2) - dg.transpose(0, 3, 1, 2)
    gamma = 0.5 * np.einsum('xks,xsij->xkij', ginv, U)
    dU = (d2g + d2g.transpose(0, 1, 3, 2, 4)
          - d2g.transpose(0, 3, 1, 2, 4))
    dginv = -np.einsum('xka,xabl,xbs->xksl', ginv, dg, ginv)
    dgamma = 0.5 * (np.einsum('xksl,xsij->xkijl', dginv, U)
                    + np.einsum('xks,xsijl->xkijl', ginv, dU))
    return gv, ginv, dg, gamma, dgamma


def christoffel(g, x):
    """Partial bundle: metric, Christoffels and their first derivatives."""
    pts, single = _as_batch(x)
    gv, ginv, dg, gamma, dgamma = _christoffel_arrays(g, pts)
    return CurvatureBundle(x=pts, n=g.n, g=gv, ginv=ginv, dg=dg,
                           gamma=gamma, dgamma=dgamma)


def riemann(g, x):
    """Full curvature bundle at a batch of points (cached)."""
    pts, single = _as_batch(x)
    key = (id(g), pts.shape, pts.tobytes())
    hit = _cache.get(key)
    if hit is not None:
        _cache.move_to_end(key)
        return hit
    gv, ginv, dg, gamma, dgamma = _christoffel_arrays(g, pts)
    # R^m_{ijk} = d_i Gamma^m_jk - d_j Gamma^m_ik + Gamma Gamma terms
    r_updown = (np.einsum('xmjki->xmijk', dgamma)
                - np.einsum('xmikj->xmijk', dgamma)
                + np.einsum('xmis,xsjk->xmijk', gamma, gamma)
                - np.einsum('xmjs,xsik->xmijk', gamma, gamma))
    riemann_lo = np.einsum('xmijl,xmk->xijkl', r_updown, gv)
    riemann_mix = np.einsum('xijef,xec,xfd->xijcd', riemann_lo, ginv, ginv)
    riemann_hi = np.einsum('xabcd,xae,xbf->xefcd', riemann_mix, ginv, ginv)
    ricci = np.einsum('xjl,xijkl->xik', ginv, riemann_lo)
    scalar = np.einsum('xik,xik->x', ginv, ricci)
    out = CurvatureBundle(x=pts, n=g.n, g=gv, ginv=ginv, dg=dg,
                          gamma=gamma, dgamma=dgamma,
                          riemann_lo=riemann_lo, riemann_mix=riemann_mix,
                          riemann_hi=riemann_hi, ricci=ricci, scalar=scalar)
    _cache[key] = out
    while len(_cache) > _CACHE_SLOTS:
        _cache.popitem(last=False)
    return out


bundle = riemann


def _gathered_products(table, rmix):
    """prod[x, T] = sign_T * product of table factors gathered from rmix."""
    B = rmix.shape[0]
    T = len(table.signs)
    prod = np.broadcast_to(table.signs, (B, T)).copy()
    for t in range(table.factors.shape[1]):
        f = table.factors[:, t]
        prod *= rmix[:, f[:, 0], f[:, 1], f[:, 2], f[:, 3]]
    return prod


def _chunks(B, T):
    step = max(1, _TERM_BUDGET // max(T, 1))
    for lo in range(0, B, step):
        yield lo, min(B, lo + step)


def lovelock_L(k, g, x, bund=None):
    """k-th Gauss-Bonnet curvature L_k; L_1 is the scalar curvature.

    Returns 0 with a warning when 2k > n; k = n/2 is the Euler-density
    borderline and is allowed.
    """
    pts, single = _as_batch(x)
    n = g.n
    if 2 * k > n:
        warnings.warn(f"L_{k} vanishes identically for 2k > n = {n}")
        out = np.zeros(len(pts))
        return out[0] if single else out
    if bund is None:
        bund = riemann(g, pts)
    table = lovelock_scalar_table(n, k)
    rmix = bund.riemann_mix
    out = np.empty(len(pts))
    for lo, hi in _chunks(len(pts), len(table.signs)):
        out[lo:hi] = _gathered_products(table, rmix[lo:hi]).sum(axis=1)
    out *= table.constant
    return out[0] if single else out


def gauss_bonnet_L2_direct(g, x, bund=None):
    """L_2 from curvature norms: |Rm|^2 - 4 |Ric|^2 + R^2."""
    pts, single = _as_batch(x)
    if bund is None:
        bund = riemann(g, pts)
    norm_rm = np.einsum('xijkl,xijkl->x', bund.riemann_lo, bund.riemann_hi)
    ric_up = np.einsum('xia,xab,xbj->xij', bund.ginv, bund.ricci, bund.ginv)
    norm_ric = np.einsum('xij,xij->x', bund.ricci, ric_up)
    out = norm_rm - 4.0 * norm_ric + bund.scalar ** 2
    return out[0] if single else out


def p_tensor(g, x, bund=None):
    """The rank-4 flux tensor entering the second-order mass integrand.

    P^{ijkl} = R^{ijkl} + R^{jk} g^{il} - R^{jl} g^{ik} - R^{ik} g^{jl}
               + R^{il} g^{jk} + (R/2)(g^{ik} g^{jl} - g^{il} g^{jk}).
    """
    pts, single = _as_batch(x)
    if bund is None:
        bund = riemann(g, pts)
    ginv = bund.ginv
    ric_up = np.einsum('xia,xab,xbj->xij', ginv, bund.ricci, ginv)
    R = bund.scalar
    P = (bund.riemann_hi
         + np.einsum('xjk,xil->xijkl', ric_up, ginv)
         - np.einsum('xjl,xik->xijkl', ric_up, ginv)
         - np.einsum('xik,xjl->xijkl', ric_up, ginv)
         + np.einsum('xil,xjk->xijkl', ric_up, ginv)
         + 0.5 * R[:, None, None, None, None]
         * (np.einsum('xik,xjl->xijkl', ginv, ginv)
            - np.einsum('xil,xjk->xijkl', ginv, ginv)))
    if single:
        P = P[0]
    return Rank4Field(components=P)


def p_tensor_general(k, g, x, bund=None):
    """The order-k rank-4 flux tensor P_(k) via the delta-contraction table.

    P_(1)^{ijlm} = (g^{il} g^{jm} - g^{im} g^{jl}) / 2; P_(2) agrees with
    p_tensor.  Returns a zero field with a warning when 2k > n.
    """
    pts, single = _as_batch(x)
    n = g.n
    if 2 * k > n:
        warnings.warn(f"P_({k}) vanishes identically for 2k > n = {n}")
        Z = np.zeros((len(pts), n, n, n, n))
        return Rank4Field(components=Z[0] if single else Z)
    if bund is None:
        bund = riemann(g, pts)
    table = p_tensor_table(n, k)
    rmix = bund.riemann_mix
    ginv = bund.ginv
    B = len(pts)
    C = np.zeros((B, n, n, n, n))
    for lo, hi in _chunks(B, len(table.signs)):
        prod = _gathered_products(table, rmix[lo:hi])
        sums = np.add.reduceat(prod, table.group_starts, axis=1)
        gi = table.group_index
        C[lo:hi, gi[:, 0], gi[:, 1], gi[:, 2], gi[:, 3]] = sums
    C = C - C.transpose(0, 2, 1, 3, 4)
    P = table.constant * np.einsum('xstab,xal,xbm->xstlm', C, ginv, ginv)
    if single:
        P = P[0]
    return Rank4Field(components=P)


def lovelock_einstein(k, g, x, bund=None):
    """The divergence-free symmetric curvature 2-tensor of order k.

    k = 1 gives Ric - (R/2) g; the k = 2 tensor matches the expanded
    quadratic-curvature form (tested).  Indices are both covariant.
    """
    pts, single = _as_batch(x)
    n = g.n
    if 2 * k > n:
        raise ValueError(f"require 2k <= n, got k={k}, n={n}")
    if bund is None:
        bund = riemann(g, pts)
    table = lovelock_einstein_table(n, k)
    rmix = bund.riemann_mix
    B = len(pts)
    D = np.zeros((B, n, n))
    for lo, hi in _chunks(B, len(table.signs)):
        prod = _gathered_products(table, rmix[lo:hi])
        sums = np.add.reduceat(prod, table.group_starts, axis=1)
        gi = table.group_index
        D[lo:hi, gi[:, 0], gi[:, 1]] = sums
    D *= table.constant
    E = -(1.0 / 2.0 ** (k + 1)) * np.einsum('xli,xlj->xij', bund.g, D)
    return E[0] if single else E


def weyl_sigma2_split(g, x, bund=None):
    """Split L_2 into Weyl and Schouten parts.

    Returns (|W|^2, sigma_2) with sigma_2 the second elementary symmetric
    function of the Schouten tensor, so that
    L_2 = |W|^2 + 8 (n-2)(n-3) sigma_2.
    """
    pts, single = _as_batch(x)
    n = g.n
    if bund is None:
        bund = riemann(g, pts)
    gv, ginv = bund.g, bund.ginv
    R = bund.scalar
    schouten = (bund.ricci - (R / (2.0 * (n - 1)))[:, None, None] * gv) / (n - 2)
    W = bund.riemann_lo - kulkarni_nomizu(schouten, gv)
    W_hi = np.einsum('xijkl,xia,xjb,xkc,xld->xabcd', W, ginv, ginv, ginv, ginv)
    weyl_norm_sq = np.einsum('xijkl,xijkl->x', W, W_hi)
    ric_up = np.einsum('xia,xab,xbj->xij', ginv, bund.ricci, ginv)
    norm_ric = np.einsum('xij,xij->x', bund.ricci, ric_up)
    sigma2 = (n * R ** 2 / (n - 1) - 4.0 * norm_ric) / (8.0 * (n - 2) ** 2)
    if single:
        return weyl_norm_sq[0], sigma2[0]
    return weyl_norm_sq, sigma2


def kulkarni_nomizu(A, B):
    """Kulkarni-Nomizu product of symmetric 2-tensor batches.

    (A o B)_ijkl = A_ik B_jl + A_jl B_ik - A_il B_jk - A_jk B_il.
    """
    return (np.einsum('xik,xjl->xijkl', A, B)
            + np.einsum('xjl,xik->xijkl', A, B)
            - np.einsum('xil,xjk->xijkl', A, B)
            - np.einsum('xjk,xil->xijkl', A, B))


def divergence_of_P(k, g, x):
    """Covariant divergence on the first slot of P_(k); expected ~ 0.

    div[..., j, k, l] = d_i P^{ijkl} + Gamma-correction terms on all four
    slots.  The outer partial derivative is a central difference of the
    P field with the wide step, so the result is a numerical residual,
    not an exact zero.
    """
    pts, single = _as_batch(x)
    n = g.n
    h = _metrics.fd_step_second(pts)
    dP = np.empty((len(pts), n, n, n, n, n))
    for idir in range(n):
        step = np.zeros_like(pts)
        step[:, idir] = h
        Pp = p_tensor_general(k, g, pts + step).components
        Pm = p_tensor_general(k, g, pts - step).components
        dP[..., idir] = (Pp - Pm) / (2.0 * h)[:, None, None, None, None]
    bund = riemann(g, pts)
    P = p_tensor_general(k, g, pts, bund=bund).components
    gamma = bund.gamma
    div = (np.einsum('xijkli->xjkl', dP)
           + np.einsum('xiis,xsjkl->xjkl', gamma, P)
           + np.einsum('xjis,xiskl->xjkl', gamma, P)
           + np.einsum('xkis,xijsl->xjkl', gamma, P)
           + np.einsum('xlis,xijks->xjkl', gamma, P))
    return div[0] if single else div

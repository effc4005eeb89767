import itertools
import math

import numpy as np
import pytest

from lovelock_mass import multiindex as mi

import oracles


def test_delta_identity_and_transposition():
    assert mi.gen_kronecker_delta((0, 1), (0, 1)) == 1
    assert mi.gen_kronecker_delta((0, 1), (1, 0)) == -1
    assert mi.gen_kronecker_delta((0, 0), (0, 1)) == 0


def test_delta_matches_brute_force_exhaustively():
    # r <= 4, n <= 6 cross-check against the permutation-sum oracle
    for n, r in ((4, 2), (5, 3), (6, 4)):
        idx = range(n)
        for up in itertools.product(idx, repeat=r):
            for lo in itertools.product(idx, repeat=r):
                assert mi.gen_kronecker_delta(up, lo) == \
                    oracles.brute_delta(up, lo)


def test_delta_contraction_identity():
    # summing the last upper=lower slot gives (n - r + 1) times the
    # lower-order delta
    rng = np.random.default_rng(0)
    for n, r in ((5, 3), (6, 4)):
        for _ in range(40):
            up = tuple(rng.integers(0, n, r - 1))
            lo = tuple(rng.integers(0, n, r - 1))
            contracted = sum(
                mi.gen_kronecker_delta(up + (s,), lo + (s,), n=n)
                for s in range(n))
            assert contracted == (n - r + 1) * mi.gen_kronecker_delta(up, lo)


def test_delta_antisymmetry():
    rng = np.random.default_rng(1)
    for _ in range(60):
        up = list(rng.choice(6, size=4, replace=False))
        lo = list(rng.choice(6, size=4, replace=False))
        base = mi.gen_kronecker_delta(up, lo)
        up_swapped = [up[1], up[0]] + up[2:]
        lo_swapped = [lo[0], lo[2], lo[1], lo[3]]
        assert mi.gen_kronecker_delta(up_swapped, lo) == -base
        assert mi.gen_kronecker_delta(up, lo_swapped) == -base


def test_delta_order_guard():
    with pytest.raises(ValueError):
        mi.gen_kronecker_delta(tuple(range(7)), tuple(range(7)))
    with pytest.raises(ValueError):
        mi.gen_kronecker_delta((0, 1), (0,))


def test_antisymmetric_index_pairs_counts():
    subsets = list(mi.antisymmetric_index_pairs(4, 2))
    assert len(subsets) == 1 and subsets[0][1] == math.factorial(4)
    assert len(list(mi.antisymmetric_index_pairs(5, 2))) == 5
    assert list(mi.antisymmetric_index_pairs(3, 2)) == []


def test_permutation_sign_cycles():
    assert mi.permutation_sign((1, 2, 0)) == 1
    assert mi.permutation_sign((0, 2, 1)) == -1
    assert mi.relative_sign((3, 1, 2), (1, 2, 3)) == 1


def test_scalar_table_matches_raw_delta_contraction():
    # the reduced term table must equal the defining contraction
    # (1/2^k) delta^{I}_{J} prod R_{i i'}^{j j'} summed over all tuples,
    # evaluated on a genuine curvature tensor
    from lovelock_mass import curvature, graphcase

    n = 5
    rng = np.random.default_rng(2)
    f = graphcase.gaussian_bump_graph(n, rng.normal(size=(2, n)),
                                      [0.6, -0.5], [1.3, 1.8])
    x = rng.normal(size=(1, n))
    bund = curvature.riemann(f.metric, x)
    rmix = np.einsum('xijab,xak,xbl->xijkl', bund.riemann_lo,
                     bund.ginv, bund.ginv)[0]  # R_ab^cd
    for k in (1, 2):
        raw = 0.0
        for idx in itertools.product(range(n), repeat=2 * k):
            for jdx in itertools.product(range(n), repeat=2 * k):
                d = mi.gen_kronecker_delta(idx, jdx)
                if d == 0:
                    continue
                term = d
                for a in range(k):
                    term *= rmix[idx[2 * a], idx[2 * a + 1],
                                 jdx[2 * a], jdx[2 * a + 1]]
                raw += term
        raw /= 2.0 ** k
        lib = float(curvature.lovelock_L(k, f.metric, x, bund=bund)[0])
        assert abs(raw - lib) <= 1e-10 * (1.0 + abs(lib))

import numpy as np
import pytest
from scipy.special import erf

from ricci_bounds import (attraction_rho, build_discrete_ou_chain,
                          curvature_envelope,
                          curvature_profile, kappa_pair, local_curvature,
                          subgaussian_s2, w1_to_point)
from ricci_bounds.errors import DegenerateKernelError, EmptyAnnulusError

from conftest import line_chain


def mmk_kappa_closed_form(n0, k, x, y):
    x, y = min(x, y), max(x, y)
    if y <= k:
        return 1.0 / (n0 + k)
    if x < k < y:
        return (k - x) / (y - x) / (n0 + k)
    return 0.0


# ------------------------------------------------------------- kappa_pair

def test_kappa_pair_three_branches(mmk_2_4):
    assert kappa_pair(mmk_2_4, 1, 2) == pytest.approx(1 / 6, abs=1e-12)
    assert kappa_pair(mmk_2_4, 3, 5) == pytest.approx(1 / 12, abs=1e-12)
    assert kappa_pair(mmk_2_4, 5, 6) == pytest.approx(0.0, abs=1e-12)


def test_kappa_pair_symmetric_and_bounded(mmk_5_10):
    rng = np.random.default_rng(2)
    for _ in range(10):
        x, y = rng.choice(mmk_5_10.n - 1, size=2, replace=False)
        k_xy = kappa_pair(mmk_5_10, int(x), int(y))
        k_yx = kappa_pair(mmk_5_10, int(y), int(x))
        assert abs(k_xy - k_yx) <= 1e-9
        assert k_xy <= 1.0


def test_kappa_pair_rejects_diagonal(mmk_2_4):
    with pytest.raises(ValueError):
        kappa_pair(mmk_2_4, 3, 3)


# -------------------------------------------------------- local curvature

def test_local_curvature_mmk_plateau_and_zero(mmk_2_4):
    kloc = local_curvature(mmk_2_4, 1.0)
    np.testing.assert_allclose(kloc[:4], 1 / 6, atol=1e-12)      # n <= k-1
    np.testing.assert_allclose(kloc[4:-1], 0.0, atol=1e-12)      # k <= n < trunc


def test_local_curvature_matches_pair_route(mmk_5_10):
    eps = 3.0
    kloc = local_curvature(mmk_5_10, eps)
    rng = np.random.default_rng(4)
    for x in rng.choice(mmk_5_10.n - 4, size=6, replace=False):
        x = int(x)
        ball = [y for y in range(mmk_5_10.n)
                if 0 < abs(y - x) <= eps]
        ref = min(kappa_pair(mmk_5_10, x, y) for y in ball)
        assert kloc[x] == pytest.approx(ref, abs=1e-9)


def test_local_curvature_ou_near_alpha():
    chain = build_discrete_ou_chain(0.5, 10.0, 0.05)
    kloc = local_curvature(chain, 0.5)
    assert np.max(np.abs(kloc - 0.5)) <= 2 * 0.05


def test_local_curvature_warns_on_isolated_points():
    chain = line_chain([0.0, 1.0, 5.0], np.eye(3))
    with pytest.warns(UserWarning, match="no neighbour"):
        kloc = local_curvature(chain, 1.5)
    assert np.isinf(kloc[2])


# --------------------------------------------------------------- envelope

def test_envelope_mmk_eps1(mmk_2_4):
    env = curvature_envelope(mmk_2_4, 1.0, origin=2)
    for r in range(0, 10):
        expect = (1 / 6) if r < 2 else 0.0
        assert env(float(r)) == pytest.approx(expect, abs=1e-12)


def test_envelope_mmk_eps3(mmk_2_4):
    env = curvature_envelope(mmk_2_4, 3.0, origin=2)
    for r in range(0, 6):
        expect = (1 / 6) * min(1.0, max(0.0, (2 - r) / 3))
        assert env(float(r)) == pytest.approx(expect, abs=1e-12)


def test_envelope_constant_curvature_chain():
    chain = build_discrete_ou_chain(0.5, 6.0, 0.1)
    kloc = local_curvature(chain, 1.0)
    env = curvature_envelope(chain, 1.0, origin=chain.origin_hint, kappa_local=kloc)
    assert np.max(env.values) - np.min(env.values) <= 1e-10
    assert env(0.0) == pytest.approx(float(np.min(kloc)), abs=1e-15)


def test_envelope_minorant_and_monotone(mmk_5_10):
    kloc = local_curvature(mmk_5_10, 2.0)
    env = curvature_envelope(mmk_5_10, 2.0, origin=5, kappa_local=kloc)
    d = mmk_5_10.dist[5]
    assert np.all(env(d) <= kloc + 1e-9)
    assert np.all(np.diff(env.values) <= 1e-15)
    assert np.all(env.values >= 0.0)


def test_envelope_maximality(mmk_2_4):
    # raising any breakpoint value by 1e-6 must yield an illegal candidate:
    # either the minorant property breaks at a point at that distance, or the
    # raised step breaks the non-increasing shape
    kloc = local_curvature(mmk_2_4, 1.0)
    env = curvature_envelope(mmk_2_4, 1.0, origin=2, kappa_local=kloc)
    d = mmk_2_4.dist[2]
    for j, r in enumerate(env.breakpoints):
        raised = env.values[j] + 1e-6
        breaks_minorant = raised > np.min(kloc[np.abs(d - r) <= 1e-12])
        breaks_monotone = j > 0 and raised > env.values[j - 1]
        assert breaks_minorant or breaks_monotone, f"breakpoint {r} not binding"


# ------------------------------------------------------------------- rho

def test_rho_mmk_eps1(mmk_2_4):
    assert attraction_rho(mmk_2_4, 1.0, 2) == pytest.approx(1 / 6, abs=1e-12)


def test_rho_mmk_eps3(mmk_2_4):
    assert attraction_rho(mmk_2_4, 3.0, 2) == pytest.approx(1 / 3, abs=1e-12)


def test_rho_ou_matches_folded_normal_drift():
    # drift at distance eps: eps - E|N((1-alpha) eps, 1)|, exact via erf
    alpha, eps, step = 0.5, 4.0, 0.05
    chain = build_discrete_ou_chain(alpha, 10.0, step)
    rho = attraction_rho(chain, eps, chain.origin_hint)
    m = (1 - alpha) * eps
    drift = eps - m * erf(m / np.sqrt(2)) - np.sqrt(2 / np.pi) * np.exp(-m * m / 2)
    assert abs(rho - drift) <= 2 * step


def test_rho_empty_annulus():
    chain = line_chain([0.0, 1.0], np.eye(2))
    with pytest.raises(EmptyAnnulusError, match="larger epsilon"):
        attraction_rho(chain, 0.4, 0)


def test_rho_one_step_drift_guarantee(mmk_5_10):
    # every annulus point moves at least rho closer to the origin in W1
    eps, origin = 2.0, 5
    rho = attraction_rho(mmk_5_10, eps, origin)
    d = mmk_5_10.dist[origin]
    annulus = np.nonzero((d >= eps) & (d <= 2 * eps))[0]
    assert annulus.size > 0
    for x in annulus:
        assert w1_to_point(mmk_5_10, int(x), origin) <= d[x] - rho + 1e-9


# ------------------------------------------------------------------- s^2

def test_s2_hoeffding_mmk(mmk_2_4, mmk_5_10):
    assert subgaussian_s2(mmk_2_4) == 1.0
    assert subgaussian_s2(mmk_5_10) == 1.0


def test_s2_gaussian_variance_paths():
    chain = build_discrete_ou_chain(0.5, 6.0, 0.1)
    assert subgaussian_s2(chain, method="gaussian_variance") == 1.0


def test_s2_gaussian_variance_rejected_for_mmk(mmk_2_4):
    with pytest.raises(ValueError, match="Gaussian"):
        subgaussian_s2(mmk_2_4, method="gaussian_variance")


def test_s2_degenerate_identity_kernel():
    chain = line_chain([0.0, 1.0, 2.0], np.eye(3))
    with pytest.raises(DegenerateKernelError):
        subgaussian_s2(chain)


def test_s2_user_supplied():
    chain = line_chain([0.0, 1.0], [[0.5, 0.5], [0.5, 0.5]])
    assert subgaussian_s2(chain, method="user_supplied", value=2.5) == 2.5
    with pytest.raises(ValueError):
        subgaussian_s2(chain, method="user_supplied")


# ----------------------------------------------------------------- profile

def test_profile_assembles_consistently(mmk_2_4):
    profile = curvature_profile(mmk_2_4, 1.0)
    assert profile.origin == 2
    assert profile.rho == pytest.approx(1 / 6, abs=1e-12)
    assert profile.j0 == pytest.approx(2 * 2 / 6, abs=1e-12)
    assert profile.s2 == 1.0
    # j0 is recomputable from transport
    assert profile.j0 == pytest.approx(w1_to_point(mmk_2_4, 2, 2), abs=1e-9)

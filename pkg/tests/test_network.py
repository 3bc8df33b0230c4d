"""Network fixed points, stability thresholds and maximum throughput."""

import math

import numpy as np
import pytest

from backoffq.network import (
    RootBracketError,
    bisect_root,
    consistency_tau_r,
    count_sign_changes,
    fair_fixed_point,
    greedy_operating_point,
    lambda_max_fair,
    lambda_max_greedy,
    network_ergodic_greedy,
    optimal_window,
    saturation_throughput,
    solve_u,
    solve_z,
    success_throughput,
)
from backoffq.params import ParameterError, SystemParams

DEFAULTS = SystemParams(lam=0.05, T=1.0, sigma=0.05, W=31)


def test_bisect_root_simple():
    assert bisect_root(lambda x: x - 0.25, 0.0, 1.0) == pytest.approx(0.25, abs=1e-13)
    with pytest.raises(RootBracketError):
        bisect_root(lambda x: x + 1.0, 0.0, 1.0)


def test_count_sign_changes():
    assert count_sign_changes(lambda x: np.asarray(x) - 0.5, 0.0, 1.0) == 1
    assert count_sign_changes(lambda x: np.sin(4 * np.pi * np.asarray(x)), 0.01, 0.99) == 3


def test_z_residual_over_peer_range():
    coeff = DEFAULTS.lam * (DEFAULTS.T - DEFAULTS.sigma)
    for M in range(0, 101):
        z = solve_z(DEFAULTS, M)
        assert abs(coeff * z ** (M + 1) - z + 1.0 - DEFAULTS.lam * DEFAULTS.T) < 1e-12


def test_z_closed_form_when_slots_equal():
    # sigma = T kills the polynomial term, so z = 1 - lam T exactly
    p = SystemParams(lam=0.3, T=1.0, sigma=1.0, W=31)
    for M in (1, 5, 40):
        assert solve_z(p, M) == pytest.approx(0.7, abs=1e-13)


def test_z_requires_subcritical_rate():
    with pytest.raises(ParameterError):
        solve_z(SystemParams(lam=1.1, T=1.0, sigma=0.05, W=31), 5)


def test_tau_r_coupling():
    for M in (1, 5, 20, 100):
        z = solve_z(DEFAULTS, M)
        tau, r = consistency_tau_r(DEFAULTS, z, M)
        assert 1.0 - (1.0 - tau) ** M == pytest.approx(r, abs=1e-10)
        assert r == pytest.approx(1.0 - z**M, abs=1e-12)


def test_u_residual_and_closed_form():
    for W in (1, 2, 31, 128, 1024):
        for M in (0, 1, 5, 50, 100):
            u = solve_u(W, M)
            assert abs(2.0 * u ** (M + 1) - W * (1.0 - u)) < 1e-12
            assert count_sign_changes(
                lambda x, W=W, M=M: 2.0 * np.asarray(x) ** (M + 1) - W * (1.0 - np.asarray(x)),
                0.0,
                1.0,
            ) == 1
    # W = 31, M = 1: 2u^2 + 31u - 31 = 0
    assert solve_u(31, 1) == pytest.approx((-31.0 + math.sqrt(1209.0)) / 4.0, abs=1e-13)


def test_ergodicity_flips_at_lambda_max():
    for M in (1, 10, 50):
        lam_max = lambda_max_greedy(DEFAULTS, M)
        below = SystemParams(lam=lam_max * 0.999, T=1.0, sigma=0.05, W=31)
        above = SystemParams(lam=lam_max * 1.001, T=1.0, sigma=0.05, W=31)
        assert network_ergodic_greedy(below, M)
        assert not network_ergodic_greedy(above, M)


def test_offered_load_exceeds_one_at_defaults():
    offered = [(M + 1) * lambda_max_greedy(DEFAULTS, M) for M in range(1, 101)]
    assert max(offered) > 1.0
    assert min(offered) > 0.0


def test_fair_below_greedy_everywhere():
    for W in (1, 4, 31, 128):
        for sigma in (0.01, 0.05, 0.5):
            p = SystemParams(lam=0.01, T=1.0, sigma=sigma, W=W)
            for M in (1, 3, 10, 50, 100):
                assert lambda_max_fair(p, M) < lambda_max_greedy(p, M)


def test_forms_still_agree_at_vanishing_minislot():
    # the internal 1e-12 cross-checks must hold down to sigma ~ 0
    p = SystemParams(lam=0.01, T=1.0, sigma=1e-12, W=31)
    for M in (1, 10, 100):
        assert lambda_max_fair(p, M) < lambda_max_greedy(p, M)


def test_fair_lambda_max_needs_peers():
    with pytest.raises(ParameterError):
        lambda_max_fair(DEFAULTS, 0)


def test_greedy_operating_point_fields():
    point = greedy_operating_point(DEFAULTS, 10)
    assert point.M == 10
    assert 0.0 < point.z < 1.0
    assert 0.0 < point.tau < 1.0
    assert 0.0 <= point.r < 1.0
    assert point.lambda_max == pytest.approx(lambda_max_greedy(DEFAULTS, 10), abs=1e-15)


def test_fair_fixed_point_unique_at_defaults():
    p = SystemParams(lam=0.01, T=1.0, sigma=0.05, W=31)
    point, multiplicity = fair_fixed_point(p, 10)
    assert multiplicity == 1
    assert 0.0 < point.r < 1.0
    assert 1.0 - (1.0 - point.tau) ** 10 == pytest.approx(point.r, abs=1e-9)


def test_fair_fixed_point_beyond_capacity_not_ergodic():
    # the coupling equation keeps a root for lam T < 1, but past the fair
    # capacity the per-station queue is unstable there
    heavy = SystemParams(lam=0.2, T=1.0, sigma=0.05, W=31)
    point, _ = fair_fixed_point(heavy, 10)
    assert not point.ergodic
    assert heavy.lam > lambda_max_fair(heavy, 10)


def test_success_throughput_convention():
    # single station transmitting with certainty uses the whole full slot
    assert success_throughput(1, 1.0, 1.0, 0.05) == pytest.approx(1.0)
    with pytest.raises(ParameterError):
        success_throughput(0, 0.1, 1.0, 0.05)


def test_saturation_throughput_uses_window_root():
    u = solve_u(31, 10)
    direct = success_throughput(11, 1.0 - u, 1.0, 0.05)
    assert saturation_throughput(31, 10, 1.0, 0.05, 11) == pytest.approx(direct, abs=1e-15)


def test_optimal_window_dominates_fixed_window():
    for M in (1, 5, 10, 50):
        w_opt, s_opt, unimodal = optimal_window(M, 1.0, 0.05, M + 1, (1, 1024))
        assert w_opt >= 1
        assert s_opt >= saturation_throughput(31, M, 1.0, 0.05, M + 1)
        assert unimodal

"""Truncated-chain oracle: kernel structure and stationary solve."""

import numpy as np
import pytest

from backoffq.oracle import (
    build_kernel,
    poisson_pmf_lumped,
    solve_stationary,
    stationary,
)
from backoffq.params import ChannelMode, ParameterError, SystemParams

GREEDY_REF = (SystemParams(lam=0.05, T=1.0, sigma=0.05, W=4), 0.3)
FAIR_REF = (SystemParams(lam=0.04, T=1.0, sigma=0.05, W=4), 0.4)


def test_poisson_pmf_lumped_sums_to_one():
    for mean in (0.001, 0.05, 2.0, 30.0):
        pmf = poisson_pmf_lumped(mean, 40)
        assert pmf.sum() == pytest.approx(1.0, abs=1e-15)
        assert np.min(pmf) >= 0.0


def test_kernel_rows_are_stochastic():
    for mode, (params, r) in (
        (ChannelMode.GREEDY, GREEDY_REF),
        (ChannelMode.FAIR, FAIR_REF),
    ):
        chain = build_kernel(mode, params, r, 40)
        rows = np.asarray(chain.kernel.sum(axis=1)).ravel()
        assert np.max(np.abs(rows - 1.0)) < 1e-14


def test_kernel_argument_checks():
    params, r = GREEDY_REF
    with pytest.raises(ParameterError):
        build_kernel(ChannelMode.GREEDY, params, 1.5, 40)
    with pytest.raises(ParameterError):
        build_kernel(ChannelMode.GREEDY, params, r, 5)


def test_stationary_balance_residuals():
    """Re-derive the balance equations directly from the slot semantics and
    check the solved vector against them away from the truncation edge."""
    params, r = GREEDY_REF
    n_max = 80
    chain = build_kernel(ChannelMode.GREEDY, params, r, n_max)
    table = stationary(chain)
    pi = table.probs
    W = params.W
    pT = poisson_pmf_lumped(params.lam * params.T, n_max + 1)
    ps = poisson_pmf_lumped(params.lam * params.sigma, n_max + 1)
    worst = 0.0
    for n in range(1, n_max - 20):
        # flow into (W, n): frozen counter in a full slot, a fresh uniform
        # draw after a transmission, or an arrival to an idle station
        frozen = r * sum(pT[j] * pi[W, n - j] for j in range(0, n))
        redraw = sum(pi[0, m + 1] * pT[n - m] for m in range(0, n + 1)) / (W + 1)
        idle_src = pi[0, 0] * (r * pT[n] + (1.0 - r) * ps[n]) / (W + 1)
        expected = frozen + redraw + idle_src
        worst = max(worst, abs(pi[W, n] - expected))
    assert worst < 1e-14


def test_zero_queue_rows_vanish():
    params, r = GREEDY_REF
    table = stationary(build_kernel(ChannelMode.GREEDY, params, r, 60))
    assert np.max(np.abs(table.probs[1:, 0])) < 1e-15


def test_truncation_leak_small_and_doubling_stable():
    params, r = GREEDY_REF
    table = solve_stationary(ChannelMode.GREEDY, params, r, n_max=30)
    assert table.leak < 1e-9
    wider = solve_stationary(ChannelMode.GREEDY, params, r, n_max=60)
    assert abs(table.idle_prob() - wider.idle_prob()) < 1e-10


def test_tiny_rate_concentrates_at_idle():
    quiet = SystemParams(lam=1e-10, T=1.0, sigma=0.05, W=4)
    table = stationary(build_kernel(ChannelMode.GREEDY, quiet, 0.3, 20))
    assert table.idle_prob() == pytest.approx(1.0, abs=1e-8)


def test_fair_solve_matches_closed_idle_probability():
    from backoffq.fair import FairSolution

    params, r = FAIR_REF
    table = solve_stationary(ChannelMode.FAIR, params, r, n_max=60)
    assert table.idle_prob() == pytest.approx(FairSolution(params, r).q00(), abs=1e-10)

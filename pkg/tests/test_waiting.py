"""Waiting-time transform of the greedy station."""

import numpy as np
import pytest

from backoffq.greedy import GreedySolution
from backoffq.params import ParameterError, SystemParams
from backoffq.waiting import WaitTransform

REF = SystemParams(lam=0.05, T=1.0, sigma=0.05, W=4)
R_REF = 0.3

# 40-digit evaluations of the defining expressions, rounded to double.
F_AT_01 = 0.95602210823510053493
V_AT_01 = 0.82867545994322579387


@pytest.fixture(scope="module")
def wt():
    return WaitTransform(GreedySolution(REF, R_REF))


def test_frozen_stage_and_service_values(wt):
    assert float(wt.f_eval(0.1)) == pytest.approx(F_AT_01, abs=1e-15)
    assert float(wt.v_eval(0.1)) == pytest.approx(V_AT_01, abs=1e-15)


def test_transform_is_one_at_zero(wt):
    assert wt.psi_star(0.0) == 1.0
    assert float(wt.f_eval(0.0)) == pytest.approx(1.0, abs=1e-15)
    assert float(wt.v_eval(0.0)) == pytest.approx(1.0, abs=1e-15)


def test_transform_bounded_and_decreasing(wt):
    ss = np.linspace(0.0, 8.0, 30)
    vals = [wt.psi_star(float(s)) for s in ss]
    assert all(0.0 < v <= 1.0 for v in vals)
    assert all(a >= b - 1e-13 for a, b in zip(vals, vals[1:]))


def test_transform_log_convex_spot_check(wt):
    # LSTs of nonnegative variables are log-convex
    for s in (0.2, 0.7, 1.5):
        h = 1e-3
        mid = np.log(wt.psi_star(s))
        assert np.log(wt.psi_star(s - h)) + np.log(wt.psi_star(s + h)) >= 2 * mid - 1e-12


def test_negative_argument_rejected(wt):
    with pytest.raises(ValueError):
        wt.psi_star(-0.1)


def test_transform_matches_table_sum(wt):
    table = GreedySolution(REF, R_REF).stationary_table(80)
    ns = np.arange(table.n_max + 1)
    for s in (0.05, 0.3, 1.0, 2.0):
        f = float(wt.f_eval(s))
        v = float(wt.v_eval(s))
        direct = sum(
            f**k * float(np.dot(table.probs[k], v**ns)) for k in range(table.W + 1)
        )
        assert wt.psi_star(s) == pytest.approx(direct, abs=1e-10)


def test_mean_wait_nonnegative_on_grid():
    for lam in np.linspace(0.01, 0.35, 10):
        for r in np.linspace(0.0, 0.6, 5):
            sol = GreedySolution(SystemParams(lam=float(lam), T=1.0, sigma=0.05, W=4), float(r))
            if not sol.is_ergodic():
                continue
            assert WaitTransform(sol).mean_wait() >= 0.0


def test_mean_wait_grows_with_load():
    waits = []
    for lam in (0.02, 0.08, 0.14):
        sol = GreedySolution(SystemParams(lam=lam, T=1.0, sigma=0.05, W=4), R_REF)
        waits.append(WaitTransform(sol).mean_wait())
    assert waits[0] < waits[1] < waits[2]


def test_mean_cycle_length(wt):
    p, r = REF, R_REF
    alpha = GreedySolution(REF, R_REF).tau()
    expected = (r + alpha * (1.0 - r)) * p.T + (1.0 - r) * (1.0 - alpha) * p.sigma
    assert wt.mean_cycle_length() == pytest.approx(expected, abs=1e-15)


def test_cdf_monotone_with_idle_atom(wt):
    # the wait is a lattice mixture of full and mini slots, so its CDF is
    # a step function; the Fourier inversion rings mildly near the jumps
    ts = np.linspace(0.05, 12.0, 40)
    vals = wt.wait_cdf(ts)
    assert np.all(np.diff(vals) >= -1e-3)
    assert np.all((0.0 <= vals) & (vals <= 1.0))
    # the wait has an atom at zero of mass p(0,0) (a probe arriving at an
    # idle station is served immediately) and no support below one full
    # slot, so the CDF is flat at p(0,0) on (0, T)
    p00 = GreedySolution(REF, R_REF).p00()
    assert vals[-1] > 0.999
    assert wt.wait_cdf(0.5) == pytest.approx(p00, abs=1e-3)


def test_cdf_needs_positive_time(wt):
    with pytest.raises(ValueError):
        wt.wait_cdf(0.0)


def test_transform_requires_ergodic_solution():
    from backoffq.params import NonErgodicError

    heavy = GreedySolution(SystemParams(lam=0.9, T=1.0, sigma=0.05, W=4), R_REF)
    with pytest.raises(NonErgodicError):
        WaitTransform(heavy)

"""Acceptance gate: every release-blocking invariant at its stated tolerance.

Each test runs one named check from :mod:`backoffq.validation`, prints its
pass/fail line (also echoed after the pytest summary via conftest), and
asserts both the tolerance and the runtime budget.
"""

from conftest import ACCEPTANCE_RESULTS

from backoffq import validation


def _run(label, check, budget_s, **kwargs):
    result = check(**kwargs) if kwargs else check()
    ACCEPTANCE_RESULTS.append((label, result))
    print(f"{label}  {result.line()}")
    assert result.passed, result.line()
    assert result.runtime < budget_s, (
        f"{result.name} took {result.runtime:.1f} s (budget {budget_s} s)"
    )
    return result


def test_criterion_01_oracle_equivalence_greedy():
    _run("criterion 01", validation.check_oracle_greedy, budget_s=5.0)


def test_criterion_02_oracle_equivalence_fair():
    _run("criterion 02", validation.check_oracle_fair, budget_s=5.0)


def test_criterion_03_gf_system_residuals():
    _run("criterion 03", validation.check_gf_residuals, budget_s=1.0)


def test_criterion_04_ergodicity_dual_route():
    _run("criterion 04", validation.check_ergodicity_routes, budget_s=5.0)


def test_criterion_05_closed_form_limits():
    _run("criterion 05", validation.check_limits, budget_s=1.0)


def test_criterion_06_root_solvers():
    _run("criterion 06", validation.check_root_solvers, budget_s=10.0)


def test_criterion_07_throughput_formulas():
    _run("criterion 07", validation.check_throughput_identities, budget_s=5.0)


def test_criterion_08_simulator_vs_analytic():
    _run("criterion 08", validation.check_sim_greedy, budget_s=120.0)
    _run("criterion 08", validation.check_sim_fair, budget_s=120.0)


def test_criterion_09_waiting_time():
    # transform identities plus simulated virtual-probe agreement; the
    # stated budget covers both parts
    r1 = _run("criterion 09", validation.check_wait_transform, budget_s=180.0)
    r2 = _run("criterion 09", validation.check_wait_simulation, budget_s=180.0)
    assert r1.runtime + r2.runtime < 180.0


def test_criterion_10_figure_analogue_sweeps():
    _run("criterion 10", validation.check_sweep_determinism, budget_s=120.0)

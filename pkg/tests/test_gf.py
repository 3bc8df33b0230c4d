"""Slot transforms, geometric sums and coefficient extraction."""

import numpy as np
import pytest

from backoffq.gf import (
    ExtractionError,
    SlotGF,
    extract_coefficients,
    power_sum,
)
from backoffq.params import SystemParams

REF = SystemParams(lam=0.05, T=1.0, sigma=0.05, W=4)

# High-precision reference values (40-digit evaluation of the defining
# expressions, rounded to double).
B_AT_0 = 0.71463117264978579727  # 1 - 0.3 exp(-0.05)
UGS_AT_09 = 5.0239378432714867874  # sum_{i<=4} u(0.9)^i at r = 0.3


def test_b_at_zero_frozen_value():
    gf = SlotGF(REF, 0.3)
    assert gf.eval_b(0.0) == pytest.approx(B_AT_0, abs=1e-15)


def test_u_geom_sum_frozen_value():
    gf = SlotGF(REF, 0.3)
    assert gf.u_geom_sum(0.9) == pytest.approx(UGS_AT_09, abs=1e-13)


def test_power_sum_handles_base_one_exactly():
    assert power_sum(1.0, 6) == 6.0
    xs = np.ones(4)
    assert np.all(power_sum(xs, 3) == 3.0)


def test_power_sum_matches_closed_form_away_from_one():
    base = 0.7
    assert power_sum(base, 9) == pytest.approx((1 - base**9) / (1 - base), rel=1e-14)


def test_u_exceeds_one_inside_unit_interval():
    gf = SlotGF(REF, 0.3)
    xs = np.linspace(0.01, 0.99, 50)
    assert np.all(gf.eval_u(xs) > 1.0)
    assert gf.eval_u(1.0) == pytest.approx(1.0, abs=1e-15)


def test_geom_sum_identity():
    gf = SlotGF(REF, 0.3)
    xs = np.linspace(0.05, 0.95, 20)
    u = gf.eval_u(xs)
    lhs = power_sum(u, REF.W + 1) * (1.0 - u)
    rhs = 1.0 - u ** (REF.W + 1)
    assert np.max(np.abs(lhs - rhs)) < 1e-12


def test_u_tail_regular_at_one():
    gf = SlotGF(REF, 0.3)
    assert gf.u_tail(1.0) == pytest.approx(1.0, abs=1e-15)


def test_u_undefined_at_r_one():
    gf = SlotGF(REF, 1.0)
    with pytest.raises(ZeroDivisionError):
        gf.eval_u(0.5)


# --- coefficient extraction ---------------------------------------------------


def test_extraction_reproduces_polynomial():
    coeffs_in = np.array([0.3, 0.0, 0.25, 0.1, 0.0, 0.35])

    def g(x):
        return sum(c * x**i for i, c in enumerate(coeffs_in))

    out = extract_coefficients(g, 10)
    assert np.max(np.abs(out.values[:6] - coeffs_in)) < 1e-13
    assert np.max(np.abs(out.values[6:])) < 1e-13


def test_extraction_reproduces_geometric_series():
    out = extract_coefficients(lambda x: 1.0 / (1.0 - 0.5 * x), 30)
    assert np.max(np.abs(out.values - 0.5 ** np.arange(31))) < 1e-12
    assert out.est_error < 1e-10


def test_extraction_rejects_complex_series():
    # Taylor coefficients (0.5 + 0.3j)^n are not real
    with pytest.raises(ExtractionError):
        extract_coefficients(lambda x: 1.0 / (1.0 - (0.5 + 0.3j) * x), 10)


def test_extraction_argument_checks():
    with pytest.raises(ValueError):
        extract_coefficients(lambda x: x, 5, radius=1.5)
    with pytest.raises(ValueError):
        extract_coefficients(lambda x: x, 500, n_points=100)

"""Steady state of a single station in greedy mode.

In greedy mode a station whose back-off counter hits zero with a pending
packet forces a full transmission slot, so the slot sequence is not a pure
Bernoulli outcome.  The stationary queue/back-off distribution is carried
by the generating functions F_k(x) = sum_n p(k, n) x^n, which admit the
closed forms

    F_0(x) = p(0,0) Q(x) / R(x),
    F_k(x) = (F_0(x) - p(0,0)) / a(x) * (u^(k-1) - u^W) / (1 - u^(W+1)),

with R, Q built from the slot transforms of :mod:`backoffq.gf`.  Both R
and Q vanish at x = 1; values there use the closed-form derivatives, and a
small neighbourhood of 1 is bridged by a local polynomial fit of
Q(x)/(x-1) and R(x)/(x-1) to avoid 0/0 cancellation.

Stability: the station is ergodic iff lam * B < 1, equivalently

    lam < 1 / (T * (1 + r W / (2 (1 - r))) + W sigma / 2).
"""

from __future__ import annotations

import numpy as np

from .gf import SlotGF, extract_coefficients, power_sum
from .params import ChannelMode, NonErgodicError, ParameterError, SystemParams, validate
from .tables import StationaryTable

_NEAR_ONE = 1e-4
_FIT_STEP = 1e-3


class GreedySolution:
    """Closed-form steady-state solution of one greedy station.

    Construction is cheap; evaluators are pure and the object is immutable
    in practice (no public mutation), so it can be shared across parallel
    parameter sweeps.
    """

    def __init__(self, params: SystemParams, r: float):
        if not 0.0 <= r < 1.0:
            raise ParameterError(f"greedy steady state requires 0 <= r < 1, got {r}")
        self.params = validate(params)
        self.r = float(r)
        self.gf = SlotGF(self.params, self.r)
        self._qr_fit = None

    # --- closed-form constants -------------------------------------------

    def constants_AB(self) -> tuple[float, float]:
        """Mean-drift constants A and B; B - A = r T + (1 - r) sigma."""
        p, r = self.params, self.r
        window_term = p.W * (r * p.T + (1.0 - r) * p.sigma) / (2.0 * (1.0 - r))
        A = (1.0 - r) * (p.T - p.sigma) + window_term
        B = p.T + window_term
        return A, B

    def derivatives_at_1(self) -> tuple[float, float]:
        """(R'(1), Q'(1)) in closed form."""
        p, r = self.params, self.r
        window_term = p.lam * p.W * (r * p.T + (1.0 - r) * p.sigma) / (2.0 * (1.0 - r))
        R1 = -1.0 + p.lam * p.T + window_term
        Q1 = -1.0 + (1.0 - r) * p.lam * (p.T - p.sigma) + window_term
        return R1, Q1

    def is_ergodic(self) -> bool:
        """Stability verdict, computed through both printed routes.

        ``lam * B < 1`` and the explicit threshold inequality are evaluated
        independently; away from the boundary they must agree.
        """
        p, r = self.params, self.r
        _, B = self.constants_AB()
        verdict = p.lam * B < 1.0
        threshold = 1.0 / (p.T * (1.0 + r * p.W / (2.0 * (1.0 - r))) + p.W * p.sigma / 2.0)
        direct = p.lam < threshold
        if direct != verdict and abs(p.lam * B - 1.0) > 1e-12:
            raise AssertionError(
                f"ergodicity routes disagree: lam*B={p.lam * B!r}, threshold={threshold!r}"
            )
        return verdict

    def lambda_threshold(self) -> float:
        """Largest stable arrival rate at this (exogenous) busy probability."""
        p, r = self.params, self.r
        return 1.0 / (p.T * (1.0 + r * p.W / (2.0 * (1.0 - r))) + p.W * p.sigma / 2.0)

    def _require_ergodic(self) -> None:
        if not self.is_ergodic():
            raise NonErgodicError(
                f"parameters (lam={self.params.lam}, r={self.r}) are outside the "
                f"stability region (threshold {self.lambda_threshold():.6g}); "
                "steady-state quantities do not exist"
            )

    def p00(self) -> float:
        """Stationary idle probability p(0, 0)."""
        self._require_ergodic()
        p = self.params
        A, B = self.constants_AB()
        return (1.0 - p.lam * B) / (
            1.0 - p.lam * A + p.lam * p.W * (B - A) / (2.0 * (1.0 - self.r))
        )

    def tau(self) -> float:
        """Transmit probability tau = sum_{n>=1} p(0, n)."""
        p, r = self.params, self.r
        if not p.lam * p.T < 1.0:
            raise ParameterError(f"tau requires lam*T < 1, got lam*T = {p.lam * p.T}")
        e_busy = r * p.T + (1.0 - r) * p.sigma
        return p.lam * e_busy / (1.0 - p.lam * p.T + p.lam * e_busy)

    # --- R, Q and the generating functions --------------------------------

    def R_eval(self, x):
        """R(x); exactly 0 at x = 1, pole at x = 0."""
        x = np.asarray(x)
        if np.any(x == 0):
            raise ZeroDivisionError("R(x) has an explicit 1/x pole at x = 0")
        p = self.params
        val = np.exp(-p.lam * p.T * (1.0 - x)) / x - self.gf.u_tail(x)
        return self._zero_at_one(x, val)

    def Q_eval(self, x):
        """Q(x); exactly 0 at x = 1, pole at x = 0."""
        x = np.asarray(x)
        if np.any(x == 0):
            raise ZeroDivisionError("Q(x) has an explicit 1/x pole at x = 0")
        p, r = self.params, self.r
        head = (
            1.0
            + (1.0 / x - r) * np.exp(-p.lam * p.T * (1.0 - x))
            - (1.0 - r) * np.exp(-p.lam * p.sigma * (1.0 - x))
        )
        return self._zero_at_one(x, head - self.gf.u_tail(x))

    @staticmethod
    def _zero_at_one(x, val):
        val = np.asarray(val)
        if val.ndim == 0:
            return val[()] if x != 1.0 else type(val[()])(0)
        out = val.copy()
        out[x == 1.0] = 0.0
        return out

    def C_eval(self, x):
        """Boundary constant C(x) of the generating-function linear system."""
        x = np.asarray(x)
        p, r = self.params, self.r
        eT = np.exp(-p.lam * p.T * (1.0 - x))
        es = np.exp(-p.lam * p.sigma * (1.0 - x))
        return (-eT / ((p.W + 1) * x)) * self.F0_eval(x) + (
            self.p00() / (p.W + 1)
        ) * (1.0 + (1.0 / x - r) * eT - (1.0 - r) * es)

    def _fit_near_one(self):
        # Interpolating polynomials (in the scaled offset (x-1)/h) of
        # Q(x)/(x-1) and R(x)/(x-1) around x = 1; the centre values are the
        # closed-form derivatives, so x = 1 evaluates to Q'(1)/R'(1) exactly.
        if self._qr_fit is None:
            R1, Q1 = self.derivatives_at_1()
            t_off = np.array([-2.0, -1.0, 1.0, 2.0])
            dx = t_off * _FIT_STEP
            xs = 1.0 + dx
            qv = self.Q_eval(xs) / dx
            rv = self.R_eval(xs) / dx
            t_all = np.array([-2.0, -1.0, 0.0, 1.0, 2.0])
            q_all = np.concatenate([qv[:2], [Q1], qv[2:]])
            r_all = np.concatenate([rv[:2], [R1], rv[2:]])
            self._qr_fit = (np.polyfit(t_all, q_all, 4), np.polyfit(t_all, r_all, 4))
        return self._qr_fit

    def _qr_ratio(self, x):
        """Q(x)/R(x) with the removable singularity at x = 1 bridged."""
        x = np.asarray(x)
        near = np.abs(x - 1.0) < _NEAR_ONE
        if not np.any(near):
            return self.Q_eval(x) / self.R_eval(x)
        qfit, rfit = self._fit_near_one()
        t = (x - 1.0) / _FIT_STEP
        near_val = np.polyval(qfit, t) / np.polyval(rfit, t)
        if x.ndim == 0:
            return near_val[()]
        out = np.asarray(near_val).astype(near_val.dtype, copy=True)
        far = ~near
        if np.any(far):
            out[far] = self.Q_eval(x[far]) / self.R_eval(x[far])
        return out

    def F0_eval(self, x):
        """Generating function of the k = 0 row, F_0(x) = p(0,0) Q(x)/R(x)."""
        self._require_ergodic()
        return self.p00() * self._qr_ratio(x)

    def Fk_eval(self, k: int, x):
        """Generating function of row k, 1 <= k <= W."""
        if not 1 <= k <= self.params.W:
            raise ParameterError(f"k must lie in [1, W], got {k}")
        self._require_ergodic()
        x = np.asarray(x)
        u = self.gf.eval_u(x)
        # (u^(k-1) - u^W) / (1 - u^(W+1)) as a ratio of geometric sums,
        # regular at u = 1 where it equals (W-k+1)/(W+1).
        ratio = u ** (k - 1) * power_sum(u, self.params.W - k + 1) / power_sum(
            u, self.params.W + 1
        )
        f0t = self.F0_eval(x) - self.p00()
        return f0t / self.gf.eval_a(x) * ratio

    def stationary_table(
        self, n_max: int, radius: float = 0.9, n_points: int | None = None
    ) -> StationaryTable:
        """p(k, n) for k = 0..W, n = 0..n_max by coefficient extraction."""
        self._require_ergodic()
        W = self.params.W
        probs = np.empty((W + 1, n_max + 1))
        err = 0.0
        for k in range(W + 1):
            g = self.F0_eval if k == 0 else (lambda x, k=k: self.Fk_eval(k, x))
            coeffs = extract_coefficients(g, n_max, radius=radius, n_points=n_points)
            probs[k] = coeffs.values
            err = max(err, coeffs.est_error)
        return StationaryTable(
            mode=ChannelMode.GREEDY, params=self.params, r=self.r, probs=probs, leak=err
        )

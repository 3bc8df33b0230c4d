"""Steady state of a single station under the fair load model.

Here slot types form an exogenous Bernoulli(r) renewal sequence: a
head-of-line packet transmits only when the sampled slot happens to be a
full slot (probability r) and otherwise redraws its back-off.  The
structure mirrors :mod:`backoffq.greedy`: generating functions G_k share
the same slot transforms a, b, u, and

    G_0(x) = q(0,0) Qbar(x) / Rbar(x),

with ergodicity iff Rbar'(1) < 0, i.e.

    lam < r (1 - r) / ((1 - r + W/2) (r T + (1 - r) sigma)).

Since the station can only transmit in full slots, r = 0 admits no steady
state for lam > 0 and is rejected.
"""

from __future__ import annotations

import numpy as np

from .gf import SlotGF, extract_coefficients, power_sum
from .params import ChannelMode, NonErgodicError, ParameterError, SystemParams, validate
from .tables import StationaryTable

_NEAR_ONE = 1e-4
_FIT_STEP = 1e-3


class FairSolution:
    """Closed-form steady-state solution of one fair-load station."""

    def __init__(self, params: SystemParams, r: float):
        if not 0.0 < r < 1.0:
            raise ParameterError(
                f"fair steady state requires 0 < r < 1 (a station transmitting only "
                f"in full slots cannot drain its queue at r = 0), got {r}"
            )
        self.params = validate(params)
        self.r = float(r)
        self.gf = SlotGF(self.params, self.r)
        self._qr_fit = None

    # --- closed-form constants -------------------------------------------

    def derivatives_at_1(self) -> tuple[float, float]:
        """(Rbar'(1), Qbar'(1)) in closed form."""
        p, r = self.params, self.r
        e_busy = r * p.T + (1.0 - r) * p.sigma
        window_term = p.lam * p.W * e_busy / (2.0 * (1.0 - r))
        Rbar1 = -r + p.lam * e_busy + window_term
        Qbar1 = -r + window_term
        return Rbar1, Qbar1

    def is_ergodic(self) -> bool:
        """Stability verdict through both routes: Rbar'(1) < 0 and the
        explicit threshold inequality."""
        p, r = self.params, self.r
        Rbar1, _ = self.derivatives_at_1()
        verdict = Rbar1 < 0.0
        threshold = self.lambda_threshold()
        direct = p.lam < threshold
        if direct != verdict and abs(Rbar1) > 1e-12:
            raise AssertionError(
                f"fair ergodicity routes disagree: Rbar'(1)={Rbar1!r}, threshold={threshold!r}"
            )
        return verdict

    def lambda_threshold(self) -> float:
        p, r = self.params, self.r
        return (
            r * (1.0 - r) / ((1.0 - r + p.W / 2.0) * (r * p.T + (1.0 - r) * p.sigma))
        )

    def _require_ergodic(self) -> None:
        if not self.is_ergodic():
            raise NonErgodicError(
                f"parameters (lam={self.params.lam}, r={self.r}) are outside the fair "
                f"stability region (threshold {self.lambda_threshold():.6g})"
            )

    def q00(self) -> float:
        """Stationary idle probability q(0, 0), cross-checked via -Rbar'(1)/r."""
        self._require_ergodic()
        p, r = self.params, self.r
        e_busy = r * p.T + (1.0 - r) * p.sigma
        closed = 1.0 - p.lam * e_busy * (1.0 + p.W / (2.0 * (1.0 - r))) / r
        Rbar1, _ = self.derivatives_at_1()
        via_deriv = -Rbar1 / r
        if abs(closed - via_deriv) > 1e-12 * max(1.0, abs(closed)):
            raise AssertionError(
                f"q(0,0) routes disagree: {closed!r} vs -Rbar'(1)/r = {via_deriv!r}"
            )
        return closed

    def taubar(self) -> float:
        """Transmit probability taubar = lam (r T + (1 - r) sigma) / r."""
        p, r = self.params, self.r
        if r <= 0.0:
            raise ParameterError("taubar is undefined at r = 0 (no transmissions possible)")
        return p.lam * (r * p.T + (1.0 - r) * p.sigma) / r

    # --- Rbar, Qbar and the generating functions --------------------------

    def Rbar_eval(self, x):
        """Rbar(x); exactly 0 at x = 1, pole at x = 0."""
        x = np.asarray(x)
        if np.any(x == 0):
            raise ZeroDivisionError("Rbar(x) has an explicit 1/x pole at x = 0")
        p, r = self.params, self.r
        head = r * np.exp(-p.lam * p.T * (1.0 - x)) / x + (1.0 - r) * np.exp(
            -p.lam * p.sigma * (1.0 - x)
        )
        return self._zero_at_one(x, head - self.gf.u_tail(x))

    def Qbar_eval(self, x):
        """Qbar(x); exactly 0 at x = 1, pole at x = 0."""
        x = np.asarray(x)
        if np.any(x == 0):
            raise ZeroDivisionError("Qbar(x) has an explicit 1/x pole at x = 0")
        p, r = self.params, self.r
        head = 1.0 + r * (1.0 / x - 1.0) * np.exp(-p.lam * p.T * (1.0 - x))
        return self._zero_at_one(x, head - self.gf.u_tail(x))

    @staticmethod
    def _zero_at_one(x, val):
        val = np.asarray(val)
        if val.ndim == 0:
            return val[()] if x != 1.0 else type(val[()])(0)
        out = val.copy()
        out[x == 1.0] = 0.0
        return out

    def D_eval(self, x):
        """Boundary constant D(x) of the fair generating-function system."""
        x = np.asarray(x)
        p, r = self.params, self.r
        eT = np.exp(-p.lam * p.T * (1.0 - x))
        es = np.exp(-p.lam * p.sigma * (1.0 - x))
        return (-self.G0_eval(x) / (p.W + 1)) * (r * eT / x + (1.0 - r) * es) + (
            self.q00() / (p.W + 1)
        ) * (1.0 + r * (1.0 / x - 1.0) * eT)

    def _fit_near_one(self):
        if self._qr_fit is None:
            Rbar1, Qbar1 = self.derivatives_at_1()
            t_off = np.array([-2.0, -1.0, 1.0, 2.0])
            dx = t_off * _FIT_STEP
            xs = 1.0 + dx
            qv = self.Qbar_eval(xs) / dx
            rv = self.Rbar_eval(xs) / dx
            t_all = np.array([-2.0, -1.0, 0.0, 1.0, 2.0])
            q_all = np.concatenate([qv[:2], [Qbar1], qv[2:]])
            r_all = np.concatenate([rv[:2], [Rbar1], rv[2:]])
            self._qr_fit = (np.polyfit(t_all, q_all, 4), np.polyfit(t_all, r_all, 4))
        return self._qr_fit

    def _qr_ratio(self, x):
        x = np.asarray(x)
        near = np.abs(x - 1.0) < _NEAR_ONE
        if not np.any(near):
            return self.Qbar_eval(x) / self.Rbar_eval(x)
        qfit, rfit = self._fit_near_one()
        t = (x - 1.0) / _FIT_STEP
        near_val = np.polyval(qfit, t) / np.polyval(rfit, t)
        if x.ndim == 0:
            return near_val[()]
        out = np.asarray(near_val).astype(near_val.dtype, copy=True)
        far = ~near
        if np.any(far):
            out[far] = self.Qbar_eval(x[far]) / self.Rbar_eval(x[far])
        return out

    def G0_eval(self, x):
        """G_0(x) = q(0,0) Qbar(x) / Rbar(x)."""
        self._require_ergodic()
        return self.q00() * self._qr_ratio(x)

    def Gk_eval(self, k: int, x):
        """G_k(x), 1 <= k <= W (same geometric-sum kernel as the greedy F_k)."""
        if not 1 <= k <= self.params.W:
            raise ParameterError(f"k must lie in [1, W], got {k}")
        self._require_ergodic()
        x = np.asarray(x)
        u = self.gf.eval_u(x)
        ratio = u ** (k - 1) * power_sum(u, self.params.W - k + 1) / power_sum(
            u, self.params.W + 1
        )
        g0t = self.G0_eval(x) - self.q00()
        return g0t / self.gf.eval_a(x) * ratio

    def stationary_table(
        self, n_max: int, radius: float = 0.9, n_points: int | None = None
    ) -> StationaryTable:
        """q(k, n) for k = 0..W, n = 0..n_max by coefficient extraction."""
        self._require_ergodic()
        W = self.params.W
        probs = np.empty((W + 1, n_max + 1))
        err = 0.0
        for k in range(W + 1):
            g = self.G0_eval if k == 0 else (lambda x, k=k: self.Gk_eval(k, x))
            coeffs = extract_coefficients(g, n_max, radius=radius, n_points=n_points)
            probs[k] = coeffs.values
            err = max(err, coeffs.est_error)
        return StationaryTable(
            mode=ChannelMode.FAIR, params=self.params, r=self.r, probs=probs, leak=err
        )

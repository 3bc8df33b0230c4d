"""Shared generating-function building blocks.

Both station models are driven by the same pair of slot transforms

    a(x) = (1 - r) * exp(-lam * sigma * (1 - x))      (mini-slot)
    b(x) = 1 - r * exp(-lam * T * (1 - x))            (full slot)

and their ratio ``u(x) = b(x) / a(x)``.  Every closed form downstream
contains the factor ``(1 - u^(W+1)) / (1 - u)``, which is 0/0 exactly at
``x = 1`` where normalisation constants are needed; all such factors are
therefore evaluated as explicit geometric sums ``sum_{i=0}^{W} u(x)^i``.

The module also provides Cauchy-integral coefficient extraction, used to
recover the queue-length probabilities ``p(k, n)`` from the generating
functions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .params import ParameterError, SystemParams


def power_sum(base, n_terms: int):
    """``sum_{i=0}^{n_terms-1} base**i`` by direct summation (scalar or array).

    Never uses the closed-form ratio, so ``base == 1`` is handled exactly.
    """
    if n_terms < 0:
        raise ValueError("n_terms must be >= 0")
    acc = np.zeros_like(np.asarray(base, dtype=np.result_type(base, float)))
    term = np.ones_like(acc)
    for _ in range(n_terms):
        acc = acc + term
        term = term * base
    if np.ndim(base) == 0:
        return acc[()]
    return acc


class SlotGF:
    """Evaluators for a(x), b(x), u(x) at fixed parameters and busy probability.

    Accepts real or complex ``x`` with ``|x| <= 1`` (scalars or arrays);
    evaluators are pure functions of the immutable construction state.
    """

    def __init__(self, params: SystemParams, r: float):
        if not 0.0 <= r <= 1.0:
            raise ParameterError(f"busy probability must lie in [0, 1], got {r}")
        self.params = params
        self.r = float(r)

    def eval_a(self, x):
        p = self.params
        return (1.0 - self.r) * np.exp(-p.lam * p.sigma * (1.0 - x))

    def eval_b(self, x):
        p = self.params
        return 1.0 - self.r * np.exp(-p.lam * p.T * (1.0 - x))

    def eval_u(self, x):
        if self.r == 1.0:
            raise ZeroDivisionError("u(x) = b(x)/a(x) is undefined at r = 1 (a(x) = 0)")
        return self.eval_b(x) / self.eval_a(x)

    def u_geom_sum(self, x):
        """``sum_{i=0}^{W} u(x)^i``; equals ``W + 1`` exactly at ``x = 1``."""
        return power_sum(self.eval_u(x), self.params.W + 1)

    def u_tail(self, x):
        """``(W+1) u^W (1-u) / (1 - u^(W+1))``, the shared tail term.

        Computed as ``(W+1) u^W / sum_{i<=W} u^i`` so that ``x = 1`` is a
        regular point (value ``1`` there).
        """
        u = self.eval_u(x)
        return (self.params.W + 1) * u**self.params.W / power_sum(u, self.params.W + 1)

    def u_tail_deriv_at_1(self) -> float:
        """Derivative of :meth:`u_tail` at ``x = 1``:  ``W u'(1) / 2``."""
        p = self.params
        u1 = -p.lam * (self.r * p.T + (1.0 - self.r) * p.sigma) / (1.0 - self.r)
        return 0.5 * p.W * u1


@dataclass(frozen=True)
class SeriesCoefficients:
    """Power-series coefficients recovered by contour integration."""

    values: np.ndarray
    radius: float
    est_error: float


class ExtractionError(RuntimeError):
    """Coefficient extraction did not behave like a real power series."""


def extract_coefficients(
    g,
    n_max: int,
    radius: float = 0.9,
    n_points: int | None = None,
    imag_tol: float = 1e-10,
) -> SeriesCoefficients:
    """Recover ``c_0 .. c_n_max`` of a function analytic on ``|x| <= radius``.

    Approximates the Cauchy coefficient integral by an ``N``-point uniform
    discretisation of the circle ``|x| = radius`` (one FFT).  ``g`` must
    accept a complex ndarray.  ``est_error`` combines the geometric aliasing
    bound with the largest imaginary residual; imaginary residuals above
    ``imag_tol`` raise :class:`ExtractionError` (the usual symptom of
    evaluating a non-ergodic parameter set, where ``g`` has a pole inside
    the circle).
    """
    if not 0.0 < radius < 1.0:
        raise ValueError("extraction radius must lie in (0, 1)")
    N = n_points if n_points is not None else max(256, 4 * n_max)
    if N <= n_max:
        raise ValueError("need more sample points than coefficients")
    theta = 2.0 * np.pi * np.arange(N) / N
    samples = np.asarray(g(radius * np.exp(1j * theta)), dtype=complex)
    if not np.all(np.isfinite(samples)):
        raise ExtractionError("generating function evaluated non-finite on the circle")
    coeffs = np.fft.fft(samples)[: n_max + 1] / N
    coeffs /= radius ** np.arange(n_max + 1)
    imag_residual = float(np.max(np.abs(coeffs.imag)))
    if imag_residual > imag_tol:
        raise ExtractionError(
            f"imaginary residual {imag_residual:.3e} exceeds {imag_tol:.1e}; "
            "the function is not a real power series on this circle"
        )
    # Aliasing: |error(c_n)| <= max|g| * radius^(N-n) / (1 - radius^N).
    max_g = float(np.max(np.abs(samples)))
    alias = max_g * radius ** (N - n_max) / (1.0 - radius**N)
    return SeriesCoefficients(
        values=coeffs.real.copy(),
        radius=radius,
        est_error=alias + imag_residual,
    )

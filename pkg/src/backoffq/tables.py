"""Truncated stationary tables p(k, n) shared by analytics, oracle and tests."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .params import ChannelMode, SystemParams


@dataclass(frozen=True)
class StationaryTable:
    """Matrix of stationary probabilities, rows k = 0..W, columns n = 0..n_max.

    ``leak`` is the probability mass sitting in the truncation column
    (oracle solves) or the extraction error estimate (analytic tables).
    """

    mode: ChannelMode
    params: SystemParams
    r: float
    probs: np.ndarray
    leak: float

    @property
    def W(self) -> int:
        return self.probs.shape[0] - 1

    @property
    def n_max(self) -> int:
        return self.probs.shape[1] - 1

    def p(self, k: int, n: int) -> float:
        return float(self.probs[k, n])

    def idle_prob(self) -> float:
        return float(self.probs[0, 0])

    def transmit_prob(self) -> float:
        """``sum_{n>=1} p(0, n)``, the stationary transmit probability."""
        return float(self.probs[0, 1:].sum())

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(f"# mode = {self.mode.value}\n")
            fh.write(
                f"# lambda = {self.params.lam!r}, T = {self.params.T!r}, "
                f"sigma = {self.params.sigma!r}, W = {self.params.W}, r = {self.r!r}\n"
            )
            fh.write(f"# leak = {self.leak:.6e}\n")
            fh.write("k,n,probability\n")
            for k in range(self.probs.shape[0]):
                for n in range(self.probs.shape[1]):
                    fh.write(f"{k},{n},{self.probs[k, n]!r}\n")

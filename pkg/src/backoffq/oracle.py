"""Brute-force ground truth: stationary solve of the truncated (k, n) chain.

The embedded chain over states (k, n), k in [0, W], n in [0, n_max], is
built directly from the per-slot transition semantics (back-off decrement
in mini-slots, transmission at k = 0, uniform back-off redraw, Poisson
arrival increments).  Arrival mass that would overflow the truncation is
lumped into n = n_max, so every row sums to one and the solve yields a
genuine stationary distribution of a proper chain; the lumped column mass
is reported as the truncation leak.

This oracle is independent of the generating-function route: it never
evaluates a(x), b(x) or any closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse
import scipy.sparse.linalg

from .params import ChannelMode, ParameterError, SystemParams, validate
from .tables import StationaryTable


def poisson_pmf_lumped(mean: float, length: int) -> np.ndarray:
    """Poisson pmf over {0, .., length-1} with the tail folded into the last
    entry, so the vector sums to 1 exactly."""
    pmf = np.empty(length)
    pmf[0] = math.exp(-mean)
    for j in range(1, length):
        pmf[j] = pmf[j - 1] * mean / j
    pmf[-1] = max(1.0 - pmf[:-1].sum(), 0.0)
    return pmf


@dataclass(frozen=True)
class TruncatedChain:
    """Stochastic kernel of the truncated embedded chain."""

    mode: ChannelMode
    params: SystemParams
    r: float
    n_max: int
    kernel: scipy.sparse.csr_matrix

    def state_index(self, k: int, n: int) -> int:
        return k * (self.n_max + 1) + n


def build_kernel(
    mode: ChannelMode, params: SystemParams, r: float, n_max: int
) -> TruncatedChain:
    """Sparse transition matrix over (k, n) states for either channel mode."""
    p = validate(params)
    if not 0.0 <= r <= 1.0:
        raise ParameterError(f"busy probability must lie in [0, 1], got {r}")
    if n_max < 10:
        raise ParameterError(f"n_max must be >= 10, got {n_max}")
    W = p.W
    width = n_max + 1
    n_states = (W + 1) * width
    pT = poisson_pmf_lumped(p.lam * p.T, width)
    ps = poisson_pmf_lumped(p.lam * p.sigma, width)
    # index past which the (unlumped) pmf underflows to exact zero
    suppT = int(np.max(np.nonzero(pT[:-1])[0])) + 1 if np.any(pT[:-1]) else 0
    supps = int(np.max(np.nonzero(ps[:-1])[0])) + 1 if np.any(ps[:-1]) else 0

    rows, cols, vals = [], [], []

    def idx(k, n):
        return k * width + n

    def add(src, k, n, prob):
        if prob != 0.0:
            rows.append(src)
            cols.append(idx(k, min(n, n_max)))
            vals.append(prob)

    def add_arrivals(src, k, n0, pmf, supp, prob):
        # target (k, n0 + j) with j ~ pmf, overflow lumped at n_max
        room = n_max - n0
        for j in range(min(room, supp)):
            add(src, k, n0 + j, prob * pmf[j])
        add(src, k, n_max, prob * (1.0 - pmf[:room].sum()) if room > 0 else prob)

    redraw = 1.0 / (W + 1)
    for k in range(W + 1):
        for n in range(width):
            src = idx(k, n)
            if k >= 1:
                # full slot: counter frozen; mini-slot: decrement
                add_arrivals(src, k, n, pT, suppT, r)
                add_arrivals(src, k - 1, n, ps, supps, 1.0 - r)
            elif n == 0:
                # idle station: stays idle unless arrivals occur, in which
                # case a back-off is drawn uniformly for the new head packet
                add(src, 0, 0, r * pT[0] + (1.0 - r) * ps[0])
                for kk in range(W + 1):
                    for j in range(1, min(n_max, max(suppT, supps))):
                        add(src, kk, j, redraw * (r * pT[j] + (1.0 - r) * ps[j]))
                    tail = r * (1.0 - pT[:n_max].sum()) + (1.0 - r) * (1.0 - ps[:n_max].sum())
                    add(src, kk, n_max, redraw * tail)
            else:
                # head-of-line packet with counter at zero
                if mode is ChannelMode.GREEDY:
                    _add_transmission(add, src, n, pT, suppT, 1.0, W, redraw, n_max)
                else:
                    _add_transmission(add, src, n, pT, suppT, r, W, redraw, n_max)
                    # mini-slot: return to back-off with a fresh uniform draw
                    room = n_max - n
                    for kk in range(W + 1):
                        for j in range(min(room, supps)):
                            add(src, kk, n + j, (1.0 - r) * redraw * ps[j])
                        tail = (1.0 - ps[:room].sum()) if room > 0 else 1.0
                        add(src, kk, n_max, (1.0 - r) * redraw * tail)

    kernel = scipy.sparse.csr_matrix(
        (vals, (rows, cols)), shape=(n_states, n_states)
    )
    kernel.sum_duplicates()
    return TruncatedChain(mode=mode, params=p, r=float(r), n_max=n_max, kernel=kernel)


def _add_transmission(add, src, n, pT, suppT, prob, W, redraw, n_max):
    # Transmit the head packet during a full slot: queue drops by one, new
    # arrivals join, and a fresh back-off is drawn iff the queue is nonempty.
    if prob == 0.0:
        return
    base = n - 1
    room = n_max - base
    for j in range(min(room, suppT)):
        n_new = base + j
        if n_new == 0:
            add(src, 0, 0, prob * pT[j])
        else:
            for kk in range(W + 1):
                add(src, kk, n_new, prob * redraw * pT[j])
    tail = 1.0 - pT[:room].sum() if room > 0 else 1.0
    for kk in range(W + 1):
        add(src, kk, n_max, prob * redraw * tail)


def stationary(chain: TruncatedChain, tol: float = 1e-12) -> StationaryTable:
    """Stationary vector of the truncated kernel by a direct sparse solve.

    Solves pi (P - I) = 0 with one equation replaced by normalisation,
    verifies the residual against ``tol`` and reports the truncation leak
    (mass in the n = n_max column).
    """
    P = chain.kernel
    n_states = P.shape[0]
    A = (P.T - scipy.sparse.identity(n_states, format="csr")).tolil()
    A[-1, :] = 1.0
    b = np.zeros(n_states)
    b[-1] = 1.0
    pi = scipy.sparse.linalg.spsolve(A.tocsr(), b)
    pi = np.where(np.abs(pi) < 1e-300, 0.0, pi)
    if pi.min() < -1e-12:
        raise RuntimeError(f"stationary solve produced negative mass {pi.min():.3e}")
    pi = np.clip(pi, 0.0, None)
    pi /= pi.sum()
    residual = float(np.max(np.abs(pi @ P - pi)))
    if residual > tol:
        raise RuntimeError(
            f"stationary residual {residual:.3e} exceeds tol {tol:.1e} "
            "(near-critical parameters?)"
        )
    probs = pi.reshape(chain.params.W + 1, chain.n_max + 1)
    leak = float(probs[:, -1].sum())
    return StationaryTable(
        mode=chain.mode,
        params=chain.params,
        r=chain.r,
        probs=probs,
        leak=leak,
    )


def solve_stationary(
    mode: ChannelMode,
    params: SystemParams,
    r: float,
    n_max: int = 60,
    tol: float = 1e-12,
    stability_tol: float = 1e-10,
    n_max_cap: int = 2048,
) -> StationaryTable:
    """Truncation-stable stationary table: double n_max until the idle
    probability moves by less than ``stability_tol``."""
    table = stationary(build_kernel(mode, params, r, n_max), tol=tol)
    while n_max * 2 <= n_max_cap:
        bigger = stationary(build_kernel(mode, params, r, n_max * 2), tol=tol)
        if abs(bigger.idle_prob() - table.idle_prob()) <= stability_tol:
            return bigger
        table, n_max = bigger, n_max * 2
    raise RuntimeError(
        f"idle probability did not stabilise below n_max = {n_max_cap} "
        "(parameters too close to the stability boundary)"
    )

"""Seedable Monte-Carlo of the embedded back-off chain.

Two layers:

* :func:`run_station` -- one station against an exogenous Bernoulli(r)
  channel, in either mode.  Slot-type, arrival and back-off randomness are
  three independent substreams spawned from the seed, so runs with the
  same seed are bit-identical and arrival processes can be shared across
  modes for variance-reduction comparisons.
* :func:`run_network` -- M coupled stations where the channel state is
  endogenous: a slot is full iff at least one station transmits (plus an
  optional exogenous residual-busy draw).  The mean-field fixed point is
  *measured* against this system, not assumed.

Waits are tracked two ways: the FIFO wait of every real packet
(timestamped at the epoch it joins the queue), and the virtual wait of a
probe packet spawned at sampled epochs, which is the quantity described
by the waiting-time transform.  The hot loops are numba-compiled.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .params import ChannelMode, ParameterError, SystemParams, validate

MIN_BATCHES = 30


@dataclass(frozen=True)
class Estimate:
    """A point estimate with its batch-means standard error."""

    value: float
    se: float

    def within(self, target: float, n_se: float = 3.0) -> bool:
        return abs(self.value - target) <= n_se * max(self.se, 1e-300)


@dataclass(frozen=True)
class SimStats:
    """Aggregated output of one simulation run."""

    mode: ChannelMode
    seed: int
    epochs: int
    warmup: int
    r: float | None
    idle_fraction: Estimate
    transmit_fraction: Estimate
    mean_queue: Estimate
    mean_cycle: Estimate
    mean_wait: Estimate
    full_slots: int
    mini_slots: int
    drift_warning: bool
    hist: np.ndarray = field(repr=False)
    n_waits: int = 0
    success_slots: int = 0
    collision_slots: int = 0
    n_stations: int = 1

    def __eq__(self, other):
        if not isinstance(other, SimStats):
            return NotImplemented
        for name in (
            "mode seed epochs warmup r idle_fraction transmit_fraction mean_queue "
            "mean_cycle mean_wait full_slots mini_slots drift_warning n_waits "
            "success_slots collision_slots n_stations"
        ).split():
            if getattr(self, name) != getattr(other, name):
                return False
        return bool(np.array_equal(self.hist, other.hist))


# --- single-station kernel ---------------------------------------------------


@njit(cache=True)
def _station_kernel(
    is_fair,
    W,
    T,
    sigma,
    r,
    slot_u,
    arr_full,
    arr_mini,
    backoff,
    warmup,
    n_batches,
    hist_ncap,
    sample_stride,
):
    epochs = slot_u.shape[0]
    measured = epochs - warmup
    batch_size = measured // n_batches
    b_idle = np.zeros(n_batches)
    b_tx = np.zeros(n_batches)
    b_queue = np.zeros(n_batches)
    b_slot = np.zeros(n_batches)
    hist = np.zeros((W + 1, hist_ncap + 1), dtype=np.int64)
    n_samples = measured // sample_stride
    sample_k = np.empty(n_samples, dtype=np.int64)
    sample_n = np.empty(n_samples, dtype=np.int64)

    wait_cap = arr_full.sum() + arr_mini.sum() + 16
    waits = np.empty(wait_cap)
    n_waits = 0

    ts_cap = 1 << 20
    ts_buf = np.empty(ts_cap)
    ts_head = 0
    ts_len = 0
    ts_overflow = False

    K = 0
    N = 0
    t = 0.0
    bo_idx = 0
    full_slots = 0
    mini_slots = 0
    n_sampled = 0

    # epochs past the last whole batch are simulated but not measured,
    # so every batch mean divides by exactly batch_size
    measure_end = warmup + batch_size * n_batches
    for i in range(epochs):
        if K >= 1 and N < 1:
            raise AssertionError("invariant violated: K >= 1 with empty queue")
        in_measure = warmup <= i < measure_end
        b = (i - warmup) // batch_size if in_measure else 0
        if in_measure:
            if K == 0 and N == 0:
                b_idle[b] += 1.0
            if K == 0 and N > 0:
                b_tx[b] += 1.0
            b_queue[b] += N
            hist[K, min(N, hist_ncap)] += 1
            if (i - warmup) % sample_stride == 0 and n_sampled < n_samples:
                sample_k[n_sampled] = K
                sample_n[n_sampled] = N
                n_sampled += 1

        # slot type and (for the transmit states) the action
        transmit = False
        redraw_only = False
        if K == 0 and N > 0:
            if is_fair:
                if slot_u[i] < r:
                    transmit = True
                else:
                    redraw_only = True
            else:
                transmit = True  # greedy: forced full transmission slot
        if transmit:
            slot_is_full = True
        elif redraw_only:
            slot_is_full = False
        else:
            slot_is_full = slot_u[i] < r
        slot = T if slot_is_full else sigma
        arrivals = arr_full[i] if slot_is_full else arr_mini[i]

        if in_measure:
            if slot_is_full:
                full_slots += 1
            else:
                mini_slots += 1
            b_slot[b] += slot

        if transmit:
            # departing head packet: wait = transmission start - join epoch
            if ts_len > 0:
                if in_measure and n_waits < wait_cap:
                    waits[n_waits] = t - ts_buf[ts_head]
                    n_waits += 1
                ts_head = (ts_head + 1) % ts_cap
                ts_len -= 1
            N -= 1
        # arrivals join at the end of the slot
        if arrivals > 0:
            join_t = t + slot
            for _ in range(arrivals):
                if ts_len < ts_cap:
                    ts_buf[(ts_head + ts_len) % ts_cap] = join_t
                    ts_len += 1
                else:
                    ts_overflow = True

        if transmit:
            N += arrivals
            if N >= 1:
                K = backoff[bo_idx]
                bo_idx += 1
            else:
                K = 0
        elif redraw_only:
            N += arrivals
            K = backoff[bo_idx]
            bo_idx += 1
        elif K >= 1:
            if not slot_is_full:
                K -= 1
            N += arrivals
        else:  # idle station
            if arrivals >= 1:
                N = arrivals
                K = backoff[bo_idx]
                bo_idx += 1
        t += slot

    return (
        b_idle,
        b_tx,
        b_queue,
        b_slot,
        hist,
        full_slots,
        mini_slots,
        waits[:n_waits],
        sample_k[:n_sampled],
        sample_n[:n_sampled],
        batch_size,
        ts_overflow,
    )


@njit(cache=True)
def _conditional_wait(k, n, W, T, sigma, r):
    # Virtual probe wait from state (k, n): k back-off stages to clear and n
    # head-of-line services; ends when the probe itself reaches (0, 0).
    wait = 0.0
    while not (k == 0 and n == 0):
        if k == 0:
            wait += T
            n -= 1
            k = np.random.randint(0, W + 1)
        else:
            if np.random.random() < r:
                wait += T
            else:
                wait += sigma
                k -= 1
    return wait


@njit(cache=True)
def _virtual_waits(sample_k, sample_n, W, T, sigma, r, seed):
    np.random.seed(seed)
    out = np.empty(sample_k.shape[0])
    for i in range(sample_k.shape[0]):
        out[i] = _conditional_wait(sample_k[i], sample_n[i], W, T, sigma, r)
    return out


def _batch_estimate(batch_sums: np.ndarray, batch_size: float) -> Estimate:
    means = batch_sums / batch_size
    se = float(np.std(means, ddof=1) / np.sqrt(len(means)))
    return Estimate(value=float(np.mean(means)), se=se)


def _sequence_estimate(values: np.ndarray, n_batches: int = MIN_BATCHES) -> Estimate:
    """Batch-means estimate over an (auto-correlated) sequence of values."""
    if len(values) < n_batches:
        if len(values) == 0:
            return Estimate(value=0.0, se=0.0)
        return Estimate(value=float(np.mean(values)), se=float("inf"))
    usable = (len(values) // n_batches) * n_batches
    means = values[:usable].reshape(n_batches, -1).mean(axis=1)
    return Estimate(
        value=float(np.mean(means)),
        se=float(np.std(means, ddof=1) / np.sqrt(n_batches)),
    )


def run_station(
    mode: ChannelMode,
    params: SystemParams,
    r: float,
    epochs: int,
    seed: int,
    warmup: int = 100_000,
    n_batches: int = MIN_BATCHES,
    hist_ncap: int = 200,
    sample_stride: int = 0,
) -> SimStats:
    """Simulate one station against an exogenous Bernoulli(r) channel.

    ``sample_stride > 0`` additionally spawns a virtual probe packet every
    ``sample_stride`` measured epochs; the probe waits are exposed through
    :func:`station_virtual_waits`, while ``mean_wait`` here reports the
    FIFO wait of real packets (timestamped at their join epoch).
    """
    p = validate(params)
    if not 0.0 <= r <= 1.0:
        raise ParameterError(f"busy probability must lie in [0, 1], got {r}")
    if epochs - warmup < 10 * n_batches:
        raise ParameterError(
            f"epochs ({epochs}) leave too few measured epochs after warmup ({warmup})"
        )
    if n_batches < MIN_BATCHES:
        raise ParameterError(f"need at least {MIN_BATCHES} batches for standard errors")
    slot_rng, arr_rng, bo_rng = _substreams(seed)
    slot_u = slot_rng.random(epochs)
    arr_full = arr_rng.poisson(p.lam * p.T, epochs).astype(np.int64)
    arr_mini = arr_rng.poisson(p.lam * p.sigma, epochs).astype(np.int64)
    backoff = bo_rng.integers(0, p.W + 1, epochs).astype(np.int64)

    stride = sample_stride if sample_stride > 0 else epochs  # effectively off
    (
        b_idle,
        b_tx,
        b_queue,
        b_slot,
        hist,
        full_slots,
        mini_slots,
        waits,
        sample_k,
        sample_n,
        batch_size,
        ts_overflow,
    ) = _station_kernel(
        mode is ChannelMode.FAIR,
        p.W,
        p.T,
        p.sigma,
        float(r),
        slot_u,
        arr_full,
        arr_mini,
        backoff,
        warmup,
        n_batches,
        hist_ncap,
        stride,
    )
    if ts_overflow:
        raise RuntimeError("timestamp buffer overflow: queue grew past 2^20 packets")

    queue_est = _batch_estimate(b_queue, batch_size)
    third = n_batches // 3
    early, late = b_queue[:third] / batch_size, b_queue[-third:] / batch_size
    pooled_se = np.sqrt(
        (np.var(early, ddof=1) + np.var(late, ddof=1)) / third
    )
    drift = bool(late.mean() - early.mean() > 5.0 * max(pooled_se, 1e-12))

    stats = SimStats(
        mode=mode,
        seed=seed,
        epochs=epochs,
        warmup=warmup,
        r=float(r),
        idle_fraction=_batch_estimate(b_idle, batch_size),
        transmit_fraction=_batch_estimate(b_tx, batch_size),
        mean_queue=queue_est,
        mean_cycle=_batch_estimate(b_slot, batch_size),
        mean_wait=_sequence_estimate(waits),
        full_slots=int(full_slots),
        mini_slots=int(mini_slots),
        drift_warning=drift,
        hist=hist,
        n_waits=int(len(waits)),
    )
    object.__setattr__(stats, "_sample_states", (sample_k, sample_n))
    return stats


def station_virtual_waits(
    mode: ChannelMode,
    params: SystemParams,
    r: float,
    epochs: int,
    seed: int,
    sample_stride: int = 50,
    warmup: int = 100_000,
) -> np.ndarray:
    """Virtual probe waits sampled at embedded epochs of a station run.

    The probe's own slot/back-off randomness is an independent stream
    (numba's RNG seeded from the run seed), so the estimate is a genuine
    Monte-Carlo counterpart of the waiting-time transform.
    """
    if mode is not ChannelMode.GREEDY:
        raise ParameterError("virtual waits are defined for the greedy model only")
    stats = run_station(
        mode, params, r, epochs, seed, warmup=warmup, sample_stride=sample_stride
    )
    sample_k, sample_n = stats._sample_states
    p = validate(params)
    probe_seed = (seed + 0x9E3779B9) % (2**31)
    return _virtual_waits(sample_k, sample_n, p.W, p.T, p.sigma, float(r), probe_seed)


def _substreams(seed: int):
    ss = np.random.SeedSequence(seed)
    return [np.random.Generator(np.random.PCG64(child)) for child in ss.spawn(3)]


# --- coupled network ---------------------------------------------------------


@njit(cache=True)
def _network_kernel(
    is_fair,
    W,
    T,
    sigma,
    lam,
    m_total,
    epochs,
    warmup,
    n_batches,
    residual_busy,
    seed,
):
    np.random.seed(seed)
    K = np.zeros(m_total, dtype=np.int64)
    N = np.zeros(m_total, dtype=np.int64)
    measured = epochs - warmup
    batch_size = measured // n_batches
    b_idle = np.zeros(n_batches)
    b_tx = np.zeros(n_batches)
    b_queue = np.zeros(n_batches)
    b_slot = np.zeros(n_batches)
    full_slots = 0
    mini_slots = 0
    success = 0
    collision = 0

    # same trailing-epoch cutoff as the station kernel
    measure_end = warmup + batch_size * n_batches
    for i in range(epochs):
        in_measure = warmup <= i < measure_end
        b = (i - warmup) // batch_size if in_measure else 0
        n_contenders = 0
        for s in range(m_total):
            if K[s] >= 1 and N[s] < 1:
                raise AssertionError("invariant violated: K >= 1 with empty queue")
            if K[s] == 0 and N[s] > 0:
                n_contenders += 1
        exogenous = residual_busy > 0.0 and np.random.random() < residual_busy
        slot_is_full = n_contenders > 0 or exogenous
        slot = T if slot_is_full else sigma

        if in_measure:
            for s in range(m_total):
                if K[s] == 0 and N[s] == 0:
                    b_idle[b] += 1.0
                if K[s] == 0 and N[s] > 0:
                    b_tx[b] += 1.0
                b_queue[b] += N[s]
            b_slot[b] += slot
            if slot_is_full:
                full_slots += 1
                if n_contenders == 1:
                    success += 1
                elif n_contenders >= 2:
                    collision += 1
            else:
                mini_slots += 1

        for s in range(m_total):
            arrivals = np.random.poisson(lam * slot)
            if K[s] == 0 and N[s] > 0:
                if slot_is_full:
                    # broadcast: every transmission dequeues its packet
                    N[s] += arrivals - 1
                    K[s] = np.random.randint(0, W + 1) if N[s] >= 1 else 0
                else:
                    # fair station returning to back-off (unreachable with a
                    # purely endogenous channel, kept for residual_busy runs)
                    N[s] += arrivals
                    K[s] = np.random.randint(0, W + 1)
            elif K[s] >= 1:
                if not slot_is_full:
                    K[s] -= 1
                N[s] += arrivals
            else:
                if arrivals >= 1:
                    N[s] = arrivals
                    K[s] = np.random.randint(0, W + 1)

    return (
        b_idle,
        b_tx,
        b_queue,
        b_slot,
        full_slots,
        mini_slots,
        success,
        collision,
        batch_size,
    )


def run_network(
    mode: ChannelMode,
    params: SystemParams,
    m_total: int,
    epochs: int,
    seed: int,
    warmup: int = 100_000,
    n_batches: int = MIN_BATCHES,
    residual_busy: float = 0.0,
) -> SimStats:
    """Simulate ``m_total`` coupled stations with an endogenous channel.

    A slot is full iff >= 1 station transmits (or the exogenous
    residual-busy draw fires); per-station fractions are averaged over
    stations.  In fair mode a contender in a full slot transmits and in a
    mini-slot redraws its back-off; with ``residual_busy = 0`` the sample
    paths coincide with greedy, which is the closest executable reading of
    the per-station rule (the underlying model only defines the mean-field
    coupling).
    """
    p = validate(params)
    if m_total < 1:
        raise ParameterError(f"need at least one station, got {m_total}")
    if epochs - warmup < 10 * n_batches:
        raise ParameterError(
            f"epochs ({epochs}) leave too few measured epochs after warmup ({warmup})"
        )
    (
        b_idle,
        b_tx,
        b_queue,
        b_slot,
        full_slots,
        mini_slots,
        success,
        collision,
        batch_size,
    ) = _network_kernel(
        mode is ChannelMode.FAIR,
        p.W,
        p.T,
        p.sigma,
        p.lam,
        m_total,
        epochs,
        warmup,
        n_batches,
        residual_busy,
        seed % (2**31),
    )
    per_station = batch_size * m_total
    return SimStats(
        mode=mode,
        seed=seed,
        epochs=epochs,
        warmup=warmup,
        r=None,
        idle_fraction=_batch_estimate(b_idle, per_station),
        transmit_fraction=_batch_estimate(b_tx, per_station),
        mean_queue=_batch_estimate(b_queue, per_station),
        mean_cycle=_batch_estimate(b_slot, batch_size),
        mean_wait=Estimate(value=float("nan"), se=float("nan")),
        full_slots=int(full_slots),
        mini_slots=int(mini_slots),
        drift_warning=False,
        hist=np.zeros((p.W + 1, 1), dtype=np.int64),
        success_slots=int(success),
        collision_slots=int(collision),
        n_stations=m_total,
    )

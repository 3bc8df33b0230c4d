"""Network operating points: a tagged station coupled to M identical peers.

The coupling closes the single-station model through

    tau = sum_{n>=1} p(0, n),        r = 1 - (1 - tau)^M.

For the greedy model this reduces to a polynomial root problem in
z = (1 - r)^(1/M):

    P(z) = lam (T - sigma) z^(M+1) - z + (1 - lam T) = 0,

with exactly one root in [0, 1] whenever lam T < 1.  Network ergodicity
and the maximum per-station throughputs are governed by the auxiliary root
u of  2 u^(M+1) = W (1 - u), shared by both models.

All root finding is plain bisection on analytically verified brackets
(uniqueness is established in the model, and double-checked here by sign
scans), so no derivative safeguards are needed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .params import ChannelMode, ParameterError, SystemParams, validate

_BISECT_TOL = 1e-14


class RootBracketError(RuntimeError):
    """A root bracket or uniqueness check failed (solver fault, not user error)."""


def bisect_root(fn, lo: float, hi: float, tol: float = _BISECT_TOL) -> float:
    """Bisection for a sign change of ``fn`` on [lo, hi] to absolute ``tol``."""
    flo, fhi = fn(lo), fn(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if np.sign(flo) == np.sign(fhi):
        raise RootBracketError(f"no sign change on [{lo}, {hi}]: f={flo!r}, {fhi!r}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fmid = fn(mid)
        if fmid == 0.0:
            return mid
        if np.sign(fmid) == np.sign(flo):
            lo, flo = mid, fmid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _newton_polish(fn, deriv, x: float, steps: int = 3) -> float:
    """A few Newton steps on a bisection result.

    Bisection stops at an interval of width tol; identities derived from
    the root relation (throughput form agreement, drift factorisation) need
    the residual itself at rounding level, which the polish delivers.
    """
    for _ in range(steps):
        slope = deriv(x)
        if slope == 0.0:
            break
        step = fn(x) / slope
        x_new = x - step
        if not 0.0 <= x_new <= 1.0:
            break
        x = x_new
    return x


def count_sign_changes(fn, lo: float, hi: float, n_points: int = 10_000) -> int:
    """Number of sign changes of ``fn`` on a uniform grid over [lo, hi]."""
    grid = np.linspace(lo, hi, n_points)
    vals = np.asarray(fn(grid))
    signs = np.sign(vals)
    nz = signs[signs != 0]
    return int(np.count_nonzero(nz[1:] != nz[:-1]))


@dataclass(frozen=True)
class NetworkOperatingPoint:
    """Solved coupling of one tagged station with M peers."""

    mode: ChannelMode
    M: int
    z: float | None
    u: float
    r: float
    tau: float
    ergodic: bool
    lambda_max: float


# --- greedy network ----------------------------------------------------------


def solve_z(params: SystemParams, M: int, check_unique: bool = True) -> float:
    """Unique root of P(z) in [0, 1]; requires lam T < 1."""
    p = validate(params)
    if not p.lam * p.T < 1.0:
        raise ParameterError(f"fixed point requires lam*T < 1, got {p.lam * p.T}")
    if M < 0:
        raise ParameterError(f"peer count must be >= 0, got {M}")
    coeff = p.lam * (p.T - p.sigma)

    def P(z):
        return coeff * z ** (M + 1) - z + (1.0 - p.lam * p.T)

    # P(0) = 1 - lam T > 0 and P(1) = -lam sigma < 0.
    z = bisect_root(P, 0.0, 1.0)
    z = _newton_polish(P, lambda x: coeff * (M + 1) * x**M - 1.0, z)
    if check_unique and count_sign_changes(P, 0.0, 1.0) != 1:
        raise RootBracketError("P(z) shows more than one sign change on [0, 1]")
    return z


def consistency_tau_r(params: SystemParams, z: float, M: int) -> tuple[float, float]:
    """(tau, r) at the solved z; verifies the defining coupling r = 1-(1-tau)^M."""
    p = validate(params)
    r = 1.0 - z**M
    e_busy = r * p.T + (1.0 - r) * p.sigma
    tau = p.lam * e_busy / (1.0 - p.lam * p.T + p.lam * e_busy)
    residual = abs(1.0 - (1.0 - tau) ** M - r)
    if residual > 1e-10:
        raise RootBracketError(
            f"fixed-point coupling violated: |1-(1-tau)^M - r| = {residual:.3e}"
        )
    return tau, r


def solve_u(W: int, M: int) -> float:
    """Unique root in [0, 1] of 2 u^(M+1) = W (1 - u)."""
    if W < 1:
        raise ParameterError(f"W must be >= 1, got {W}")
    if M < 0:
        raise ParameterError(f"M must be >= 0, got {M}")

    def h(u):
        return 2.0 * u ** (M + 1) - W * (1.0 - u)

    # h(0) = -W < 0 and h(1) = 2 > 0.
    u = bisect_root(h, 0.0, 1.0)
    return _newton_polish(h, lambda x: 2.0 * (M + 1) * x**M + W, u)


def network_ergodic_greedy(params: SystemParams, M: int) -> bool:
    """Theorem-style condition 2 z^(M+1) > W (1 - z), cross-checked against
    the single-station drift 1 - lam B evaluated at r = 1 - z^M."""
    p = validate(params)
    z = solve_z(p, M)
    verdict = 2.0 * z ** (M + 1) > p.W * (1.0 - z)
    factor = (1.0 - p.lam * p.T) * (1.0 - p.W * (1.0 - z) / (2.0 * z ** (M + 1)))
    # carry 1 - r = z^M directly: the round trip r = 1 - z^M, 1 - r wipes
    # out the low digits of z^M once it drops below ~1e-8
    one_minus_r = z**M
    one_minus_lamB = 1.0 - p.lam * (
        p.T
        + p.W
        * ((1.0 - one_minus_r) * p.T + one_minus_r * p.sigma)
        / (2.0 * one_minus_r)
    )
    if abs(factor - one_minus_lamB) > 1e-10 * max(1.0, abs(one_minus_lamB)):
        raise RootBracketError(
            f"drift factorisation violated: {factor!r} vs {one_minus_lamB!r}"
        )
    return verdict


def lambda_max_greedy(params: SystemParams, M: int) -> float:
    """Maximum stable per-station arrival rate of the greedy network.

    Both printed forms are evaluated and must agree to 1e-12 relative.
    """
    p = validate(params)
    u = solve_u(p.W, M)
    form1 = (1.0 - u) / (p.T * (1.0 - u ** (M + 1)) + p.sigma * u ** (M + 1))
    form2 = (1.0 - u) / (p.T + p.W * (p.sigma - p.T) * (1.0 - u) / 2.0)
    if abs(form1 - form2) > 1e-12 * abs(form1):
        raise RootBracketError(f"lambda_max forms disagree: {form1!r} vs {form2!r}")
    return form1


def lambda_max_fair(params: SystemParams, M: int) -> float:
    """Maximum stable per-station arrival rate of the fair network (M >= 1).

    Evaluated both through the printed closed form and through the
    pre-simplified route with 1 - r = u^M; the two must agree to 1e-12.
    """
    p = validate(params)
    if M < 1:
        raise ParameterError("fair network throughput requires M >= 1 (r > 0)")
    u = solve_u(p.W, M)
    denom = u * (2.0 + p.W) - p.W
    if denom <= 0.0:
        raise RootBracketError(f"u (2+W) - W = {denom!r} <= 0 at the root of 2u^(M+1)=W(1-u)")
    form1 = (1.0 - u) / (p.T + p.W * p.sigma * (1.0 - u) / denom)
    r = 1.0 - u**M
    form2 = (1.0 - u) / (p.T + (1.0 - r) * p.sigma / r)
    if abs(form1 - form2) > 1e-12 * abs(form1):
        raise RootBracketError(f"fair lambda_max routes disagree: {form1!r} vs {form2!r}")
    return form1


def greedy_operating_point(params: SystemParams, M: int) -> NetworkOperatingPoint:
    """Solve the greedy network coupling and package the verdicts."""
    p = validate(params)
    z = solve_z(p, M)
    tau, r = consistency_tau_r(p, z, M)
    return NetworkOperatingPoint(
        mode=ChannelMode.GREEDY,
        M=M,
        z=z,
        u=solve_u(p.W, M),
        r=r,
        tau=tau,
        ergodic=network_ergodic_greedy(p, M),
        lambda_max=lambda_max_greedy(p, M),
    )


# --- fair network ------------------------------------------------------------


def fair_fixed_point(
    params: SystemParams, M: int, n_scan: int = 10_000
) -> tuple[NetworkOperatingPoint, int]:
    """General fair operating point: solve r = 1 - (1 - taubar(r))^M.

    taubar(r) = lam (r T + (1-r) sigma) / r is a proper probability only
    for r >= lam sigma / (1 - lam T + lam sigma); the residual is scanned
    on that interval, every sign-change bracket is bisected, the smallest
    root is returned together with the detected multiplicity.  Raises
    :class:`ParameterError` when no sign change exists.
    """
    p = validate(params)
    if M < 1:
        raise ParameterError("fair fixed point requires M >= 1")
    if not p.lam * p.T < 1.0:
        raise ParameterError(f"fair fixed point requires lam*T < 1, got {p.lam * p.T}")

    def taubar(r):
        return p.lam * (r * p.T + (1.0 - r) * p.sigma) / r

    def residual(r):
        return 1.0 - (1.0 - taubar(r)) ** M - r

    r_lo = p.lam * p.sigma / (1.0 - p.lam * p.T + p.lam * p.sigma)
    eps = 1e-12
    grid = np.linspace(r_lo * (1.0 + 1e-9) + eps, 1.0 - eps, n_scan)
    vals = residual(grid)
    signs = np.sign(vals)
    change = np.nonzero(signs[1:] * signs[:-1] < 0)[0]
    if len(change) == 0:
        raise ParameterError(
            "fair fixed-point residual has constant sign: no operating point "
            f"(lam={p.lam} likely exceeds the fair capacity)"
        )
    roots = [bisect_root(residual, grid[i], grid[i + 1]) for i in change]
    r_star = roots[0]
    tb = taubar(r_star)
    from .fair import FairSolution  # local import avoids a cycle at module load

    ergodic = FairSolution(p, r_star).is_ergodic()
    point = NetworkOperatingPoint(
        mode=ChannelMode.FAIR,
        M=M,
        z=None,
        u=solve_u(p.W, M),
        r=r_star,
        tau=tb,
        ergodic=ergodic,
        lambda_max=lambda_max_fair(p, M),
    )
    return point, len(roots)


# --- success-throughput convention ------------------------------------------


def success_throughput(n_stations: int, tau: float, T: float, sigma: float) -> float:
    """Collision-free network throughput under the declared convention.

    S = n tau (1 - tau)^(n-1) T / E[slot] with E[slot] = r T + (1 - r) sigma
    and r = 1 - (1 - tau)^n: the fraction of channel time carried by slots
    with exactly one transmitter.
    """
    if n_stations < 1:
        raise ParameterError("need at least one station")
    r_tot = 1.0 - (1.0 - tau) ** n_stations
    e_slot = r_tot * T + (1.0 - r_tot) * sigma
    return n_stations * tau * (1.0 - tau) ** (n_stations - 1) * T / e_slot


def saturation_throughput(W: int, M: int, T: float, sigma: float, n_stations: int) -> float:
    """Success throughput at the saturation point of window W.

    At saturation the greedy fixed point z coincides with the root u of
    2 u^(M+1) = W (1 - u), so the per-station transmit probability is
    tau = 1 - u.
    """
    u = solve_u(W, M)
    return success_throughput(n_stations, 1.0 - u, T, sigma)


def optimal_window(
    M: int,
    T: float,
    sigma: float,
    n_stations: int,
    w_range: tuple[int, int] = (1, 4096),
) -> tuple[int, float, bool]:
    """Integer window maximising the saturation success throughput.

    Ternary search on the integer lattice (ties broken toward the smaller
    window), with the endpoints and W = 31 always included as candidates.  Returns ``(W_opt, S_opt, unimodal)`` where ``unimodal``
    is a coarse-scan diagnostic of S(W).
    """
    w_lo, w_hi = w_range
    cache: dict[int, float] = {}

    def S(W: int) -> float:
        if W not in cache:
            cache[W] = saturation_throughput(W, M, T, sigma, n_stations)
        return cache[W]

    lo, hi = w_lo, w_hi
    while hi - lo > 3:
        m1 = lo + (hi - lo) // 3
        m2 = hi - (hi - lo) // 3
        if S(m1) < S(m2):
            lo = m1 + 1
        else:
            hi = m2 - 1
    candidates = list(range(lo, hi + 1)) + [w_lo, w_hi]
    if w_lo <= 31 <= w_hi:
        candidates.append(31)
    best_w = min(sorted(set(candidates)), key=lambda w: (-S(w), w))
    best_s = S(best_w)
    # Coarse unimodality diagnostic on a log-spaced grid.
    grid = np.unique(np.round(np.geomspace(w_lo, w_hi, 64)).astype(int))
    vals = np.array([S(int(w)) for w in grid])
    diffs = np.sign(np.diff(vals))
    nz = diffs[diffs != 0]
    unimodal = bool(np.count_nonzero(nz[1:] != nz[:-1]) <= 1)
    return int(best_w), float(best_s), unimodal

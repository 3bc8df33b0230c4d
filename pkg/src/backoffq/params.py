"""Validated system parameters shared by every model component.

A station is described by the Poisson arrival rate ``lam``, the full-slot
duration ``T``, the mini-slot duration ``sigma``, the back-off window ``W``
(the counter is drawn uniformly on ``{0, ..., W}``, i.e. ``W + 1`` values)
and, for network settings, the peer-station count ``M``.

The busy probability ``r`` is deliberately *not* a field of
:class:`SystemParams`: for an isolated station it is an exogenous channel
parameter, while at a network operating point it is derived from the
transmit probability of the peers.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace


class ParameterError(ValueError):
    """Invalid model parameters."""


class NonErgodicError(RuntimeError):
    """A steady-state quantity was requested outside the stability region."""


class ChannelMode(enum.Enum):
    """How a head-of-line packet interacts with the slotted channel.

    GREEDY: a station whose back-off counter reaches zero with a pending
    packet forces a full transmission slot.
    FAIR: slot types form an exogenous Bernoulli(r) renewal sequence; the
    head-of-line packet transmits only in a full slot and redraws its
    back-off in a mini-slot.
    """

    GREEDY = "greedy"
    FAIR = "fair"


@dataclass(frozen=True)
class SystemParams:
    """Immutable parameter set of one (homogeneous) station.

    Attributes
    ----------
    lam : float
        Poisson packet arrival rate (packets per time unit).
    T : float
        Duration of a full (transmission) slot.
    sigma : float
        Duration of a mini-slot (channel sensing interval).
    W : int
        Back-off window; the counter is uniform on ``{0, ..., W}``.
    M : int or None
        Number of peer stations, when a network is considered.
    academic : bool
        Set by :func:`validate` when ``T < sigma`` (accepted, but outside
        the physical regime).
    """

    lam: float
    T: float
    sigma: float
    W: int
    M: int | None = None
    academic: bool = False


def validate(params: SystemParams) -> SystemParams:
    """Check invariants and annotate the academic-regime flag.

    Returns the (possibly re-annotated) parameter set.  Raises
    :class:`ParameterError` for nonpositive rates/durations, ``W < 1`` or a
    negative peer count.  ``T < sigma`` is accepted but flagged.
    """
    if not params.lam > 0:
        raise ParameterError(f"arrival rate must be positive, got {params.lam}")
    if not params.T > 0:
        raise ParameterError(f"full-slot length must be positive, got {params.T}")
    if not params.sigma > 0:
        raise ParameterError(f"mini-slot length must be positive, got {params.sigma}")
    if int(params.W) != params.W or params.W < 1:
        raise ParameterError(f"back-off window must be an integer >= 1, got {params.W}")
    if params.M is not None and (int(params.M) != params.M or params.M < 0):
        raise ParameterError(f"peer count must be a nonnegative integer, got {params.M}")
    academic = params.T < params.sigma
    if academic != params.academic:
        return replace(params, academic=academic)
    return params


def check_busy_prob(r: float) -> float:
    """Validate a busy probability ``r`` (full-slot probability)."""
    if not 0.0 <= r <= 1.0:
        raise ParameterError(f"busy probability must lie in [0, 1], got {r}")
    return float(r)


# --- plain-text key/value config files --------------------------------------

_CONFIG_KEYS = ("lambda", "T", "sigma", "W", "M", "r", "mode", "seed", "slots", "n_max")

_FLOAT_KEYS = {"lambda", "T", "sigma", "r"}
_INT_KEYS = {"W", "M", "seed", "slots", "n_max"}


def parse_config(text: str) -> dict:
    """Parse the documented ``key = value`` config format.

    Lines starting with ``#`` and blank lines are ignored.  Recognised keys:
    ``lambda, T, sigma, W, M, r, mode, seed, slots, n_max``.  Unknown keys
    raise :class:`ParameterError`.
    """
    out: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ParameterError(f"config line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in _CONFIG_KEYS:
            raise ParameterError(f"config line {lineno}: unknown key {key!r}")
        if key in _FLOAT_KEYS:
            out[key] = float(value)
        elif key in _INT_KEYS:
            out[key] = int(value)
        else:  # mode
            try:
                out[key] = ChannelMode(value.lower())
            except ValueError:
                raise ParameterError(f"config line {lineno}: unknown mode {value!r}") from None
    return out


def format_config(values: dict) -> str:
    """Serialise a config dict back to the key/value format.

    Floats are written with :func:`repr`, which round-trips every double
    exactly (and therefore any decimal with <= 15 significant digits).
    """
    lines = []
    for key in _CONFIG_KEYS:
        if key not in values or values[key] is None:
            continue
        value = values[key]
        if isinstance(value, ChannelMode):
            value = value.value
        lines.append(f"{key} = {value!r}" if isinstance(value, float) else f"{key} = {value}")
    return "\n".join(lines) + "\n"


def load_config(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def params_from_config(cfg: dict) -> SystemParams:
    """Build a validated :class:`SystemParams` from a parsed config dict."""
    missing = [k for k in ("lambda", "T", "sigma", "W") if k not in cfg]
    if missing:
        raise ParameterError(f"config is missing required keys: {', '.join(missing)}")
    return validate(
        SystemParams(
            lam=cfg["lambda"],
            T=cfg["T"],
            sigma=cfg["sigma"],
            W=cfg["W"],
            M=cfg.get("M"),
        )
    )

"""Parameter validation and the plain-text config format."""

import pytest
from hypothesis import given, strategies as st

from backoffq.params import (
    ChannelMode,
    ParameterError,
    SystemParams,
    check_busy_prob,
    format_config,
    params_from_config,
    parse_config,
    validate,
)


def test_validate_accepts_reference_set():
    p = validate(SystemParams(lam=0.05, T=1.0, sigma=0.05, W=4))
    assert p.academic is False


def test_validate_idempotent():
    p = validate(SystemParams(lam=0.05, T=1.0, sigma=0.05, W=4, M=3))
    assert validate(p) == p


@given(
    lam=st.floats(1e-6, 10.0),
    T=st.floats(1e-3, 10.0),
    sigma=st.floats(1e-3, 10.0),
    W=st.integers(1, 1024),
)
def test_validate_idempotent_random(lam, T, sigma, W):
    p = validate(SystemParams(lam=lam, T=T, sigma=sigma, W=W))
    assert validate(p) == p
    assert p.academic == (T < sigma)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(lam=0.0, T=1.0, sigma=0.05, W=4),
        dict(lam=-0.1, T=1.0, sigma=0.05, W=4),
        dict(lam=0.05, T=0.0, sigma=0.05, W=4),
        dict(lam=0.05, T=1.0, sigma=-1.0, W=4),
        dict(lam=0.05, T=1.0, sigma=0.05, W=0),
        dict(lam=0.05, T=1.0, sigma=0.05, W=2.5),
        dict(lam=0.05, T=1.0, sigma=0.05, W=4, M=-1),
    ],
)
def test_validate_rejects(kwargs):
    with pytest.raises(ParameterError):
        validate(SystemParams(**kwargs))


def test_academic_regime_flagged_not_rejected():
    p = validate(SystemParams(lam=0.05, T=0.01, sigma=0.05, W=4))
    assert p.academic is True


def test_busy_prob_bounds():
    assert check_busy_prob(0.0) == 0.0
    assert check_busy_prob(1.0) == 1.0
    for bad in (-0.01, 1.01):
        with pytest.raises(ParameterError):
            check_busy_prob(bad)


# --- config files -------------------------------------------------------------


def test_config_round_trip():
    cfg = {
        "lambda": 0.05,
        "T": 1.0,
        "sigma": 0.05,
        "W": 31,
        "M": 10,
        "r": 0.3,
        "mode": ChannelMode.GREEDY,
        "seed": 7,
        "slots": 1000000,
        "n_max": 60,
    }
    assert parse_config(format_config(cfg)) == cfg


@given(
    lam=st.floats(1e-9, 1e6),
    T=st.floats(1e-9, 1e6),
    sigma=st.floats(1e-9, 1e6),
    r=st.floats(0.0, 1.0),
    W=st.integers(1, 10**6),
    mode=st.sampled_from(list(ChannelMode)),
)
def test_config_round_trip_random(lam, T, sigma, r, W, mode):
    cfg = {"lambda": lam, "T": T, "sigma": sigma, "r": r, "W": W, "mode": mode}
    assert parse_config(format_config(cfg)) == cfg


def test_config_comments_and_blanks_ignored():
    text = "# a comment\n\nlambda = 0.05\nT = 1.0\n  # indented comment\nsigma = 0.05\nW = 4\n"
    cfg = parse_config(text)
    assert cfg == {"lambda": 0.05, "T": 1.0, "sigma": 0.05, "W": 4}


def test_config_rejects_unknown_key_and_mode():
    with pytest.raises(ParameterError):
        parse_config("bogus = 1\n")
    with pytest.raises(ParameterError):
        parse_config("mode = neither\n")
    with pytest.raises(ParameterError):
        parse_config("just a line\n")


def test_params_from_config_requires_core_keys():
    with pytest.raises(ParameterError):
        params_from_config({"lambda": 0.05, "T": 1.0})
    p = params_from_config({"lambda": 0.05, "T": 1.0, "sigma": 0.05, "W": 4, "M": 2})
    assert (p.lam, p.M) == (0.05, 2)

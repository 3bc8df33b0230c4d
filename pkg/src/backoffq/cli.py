"""Command-line front end: sweeps, waiting-time tables, simulation runs
and the invariant suite.

Subcommands: tau-vs-m, lambda-max, optimal-w, fair-vs-greedy, wait,
simulate, validate.  Every CSV starts with a '#'-prefixed header block
(full parameter set, seed, convention, artifact version) and is written
with repr-exact floats, so a re-run with the same arguments is
byte-identical.

Exit codes: 0 success, 2 validation failure, 3 non-ergodic request,
4 bad input.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor

from . import __version__
from .fair import FairSolution
from .greedy import GreedySolution
from .network import (
    greedy_operating_point,
    lambda_max_fair,
    lambda_max_greedy,
    optimal_window,
    solve_u,
)
from .params import (
    ChannelMode,
    NonErgodicError,
    ParameterError,
    SystemParams,
    load_config,
    validate,
)
from .sim import run_network, run_station
from .waiting import WaitTransform

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NON_ERGODIC = 3
EXIT_BAD_INPUT = 4

# Figure-analogue sweep defaults; the lighter rate is used for the
# fair-vs-greedy comparison.
SWEEP_DEFAULTS = {"lam": 0.05, "T": 1.0, "sigma": 0.05, "W": 31}
FAIR_VS_GREEDY_LAM = 0.01


class _Parser(argparse.ArgumentParser):
    """argparse with the documented bad-input exit code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_BAD_INPUT, f"{self.prog}: error: {message}\n")


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, bool):
        return str(value).lower()
    return str(value)


class _CsvWriter:
    """CSV with a reproducibility header block ('#'-prefixed lines)."""

    def __init__(self, stream, command: str, settings: dict):
        self.stream = stream
        self.stream.write(f"# backoffq {__version__}\n")
        self.stream.write(f"# command: {command}\n")
        for key, value in settings.items():
            if value is not None:
                self.stream.write(f"# {key} = {_fmt(value)}\n")

    def columns(self, names):
        self.stream.write(",".join(names) + "\n")

    def row(self, values):
        self.stream.write(",".join(_fmt(v) for v in values) + "\n")


def _stations(M: int, convention: str) -> int:
    # 'peers': the swept M counts the peers of a tagged station.
    return M + 1 if convention == "peers" else M


def _parallel_rows(fn, inputs):
    # Rows are independent; map() preserves input order, so output stays
    # deterministic regardless of completion order.
    with ThreadPoolExecutor(max_workers=4) as pool:
        return list(pool.map(fn, inputs))


def _merged(args, key, fallback):
    """Flag value if given, else config-file value, else the default."""
    flag = getattr(args, key.replace("lambda", "lam"), None)
    if flag is not None:
        return flag
    if args.config_values and key in args.config_values:
        return args.config_values[key]
    return fallback


def _sweep_params(args) -> SystemParams:
    return validate(
        SystemParams(
            lam=_merged(args, "lambda", SWEEP_DEFAULTS["lam"]),
            T=_merged(args, "T", SWEEP_DEFAULTS["T"]),
            sigma=_merged(args, "sigma", SWEEP_DEFAULTS["sigma"]),
            W=_merged(args, "W", SWEEP_DEFAULTS["W"]),
        )
    )


def _header_settings(args, params=None, **extra):
    settings = {}
    if params is not None:
        settings.update(
            {"lambda": params.lam, "T": params.T, "sigma": params.sigma, "W": params.W}
        )
    settings["convention"] = args.convention
    if getattr(args, "seed", None) is not None:
        settings["seed"] = args.seed
    settings.update(extra)
    return settings


# --- sweep subcommands --------------------------------------------------------


def cmd_tau_vs_m(args, out) -> int:
    params = _sweep_params(args)
    if not params.lam * params.T < 1.0:
        raise NonErgodicError(f"sweep requires lambda*T < 1, got {params.lam * params.T}")
    writer = _CsvWriter(
        out, "tau-vs-m", _header_settings(args, params, m_min=args.m_min, m_max=args.m_max)
    )
    writer.columns(["M", "z", "r", "tau", "ergodic", "status"])

    def one(M):
        try:
            point = greedy_operating_point(params, M)
            return (M, point.z, point.r, point.tau, point.ergodic, "ok")
        except (ParameterError, RuntimeError) as exc:
            return (M, float("nan"), float("nan"), float("nan"), False, type(exc).__name__)

    for row in _parallel_rows(one, range(args.m_min, args.m_max + 1)):
        writer.row(row)
    return EXIT_OK


def cmd_lambda_max(args, out) -> int:
    params = _sweep_params(args)
    mode = args.mode or ChannelMode.GREEDY
    writer = _CsvWriter(
        out,
        "lambda-max",
        _header_settings(
            args, params, mode=mode.value, m_min=args.m_min, m_max=args.m_max
        ),
    )
    writer.columns(["M", "u", "lambda_max", "network_offered_load"])

    def one(M):
        u = solve_u(params.W, M)
        if mode is ChannelMode.GREEDY:
            lam_max = lambda_max_greedy(params, M)
        else:
            lam_max = lambda_max_fair(params, M)
        return (M, u, lam_max, _stations(M, args.convention) * lam_max)

    for row in _parallel_rows(one, range(args.m_min, args.m_max + 1)):
        writer.row(row)
    return EXIT_OK


def cmd_optimal_w(args, out) -> int:
    params = _sweep_params(args)
    writer = _CsvWriter(
        out,
        "optimal-w",
        _header_settings(
            args,
            params,
            m_min=args.m_min,
            m_max=args.m_max,
            w_search=f"integer ternary search on [{args.w_lo};{args.w_hi}] "
            "plus endpoint and W=31 candidates",
        ),
    )
    writer.columns(["M", "W_opt", "S_opt", "unimodal"])

    def one(M):
        w_opt, s_opt, unimodal = optimal_window(
            M, params.T, params.sigma, _stations(M, args.convention), (args.w_lo, args.w_hi)
        )
        return (M, w_opt, s_opt, unimodal)

    for row in _parallel_rows(one, range(args.m_min, args.m_max + 1)):
        writer.row(row)
    return EXIT_OK


def cmd_fair_vs_greedy(args, out) -> int:
    if args.lam is None and not (args.config_values and "lambda" in args.config_values):
        args.lam = FAIR_VS_GREEDY_LAM
    params = _sweep_params(args)
    writer = _CsvWriter(
        out,
        "fair-vs-greedy",
        _header_settings(args, params, m_min=max(args.m_min, 1), m_max=args.m_max),
    )
    writer.columns(["M", "lambda_max_greedy", "lambda_max_fair", "ratio"])

    def one(M):
        # both columns use the same window root u for a given M
        greedy = lambda_max_greedy(params, M)
        fair = lambda_max_fair(params, M)
        return (M, greedy, fair, fair / greedy)

    for row in _parallel_rows(one, range(max(args.m_min, 1), args.m_max + 1)):
        writer.row(row)
    return EXIT_OK


# --- single-point subcommands -------------------------------------------------


def _point_params(args) -> tuple[SystemParams, float]:
    cfg = args.config_values or {}
    lam = args.lam if args.lam is not None else cfg.get("lambda")
    T = args.T if args.T is not None else cfg.get("T", 1.0)
    sigma = args.sigma if args.sigma is not None else cfg.get("sigma")
    W = args.W if args.W is not None else cfg.get("W")
    r = args.r if args.r is not None else cfg.get("r")
    if lam is None or sigma is None or W is None or r is None:
        raise ParameterError(
            "lambda, sigma, W and r are required (flags or config file)"
        )
    return validate(SystemParams(lam=lam, T=T, sigma=sigma, W=W)), float(r)


def cmd_wait(args, out) -> int:
    params, r = _point_params(args)
    solution = GreedySolution(params, r)
    wt = WaitTransform(solution)  # raises NonErgodicError outside stability
    writer = _CsvWriter(
        out,
        "wait",
        _header_settings(
            args,
            params,
            r=r,
            mean_wait=wt.mean_wait(),
            mean_cycle=wt.mean_cycle_length(),
            s_max=args.s_max,
            n_points=args.n_points,
        ),
    )
    writer.columns(["s", "psi_star"])
    for i in range(args.n_points):
        s = args.s_max * (i + 1) / args.n_points
        writer.row((s, wt.psi_star(s)))
    return EXIT_OK


def cmd_simulate(args, out) -> int:
    cfg = args.config_values or {}
    mode = args.mode or cfg.get("mode", ChannelMode.GREEDY)
    seed = args.seed if args.seed is not None else cfg.get("seed", 0)
    epochs = args.slots if args.slots is not None else cfg.get("slots", 2_000_000)
    if args.stations is not None:
        lam = args.lam if args.lam is not None else cfg.get("lambda")
        T = args.T if args.T is not None else cfg.get("T", 1.0)
        sigma = args.sigma if args.sigma is not None else cfg.get("sigma")
        W = args.W if args.W is not None else cfg.get("W")
        if lam is None or sigma is None or W is None:
            raise ParameterError("lambda, sigma and W are required (flags or config)")
        params = validate(SystemParams(lam=lam, T=T, sigma=sigma, W=W))
        stats = run_network(mode, params, args.stations, epochs, seed)
        r = None
    else:
        params, r = _point_params(args)
        stats = run_station(mode, params, r, epochs, seed)
    writer = _CsvWriter(
        out,
        "simulate",
        _header_settings(
            args,
            params,
            mode=mode.value,
            r=r,
            stations=args.stations,
            slots=epochs,
            seed=seed,
        ),
    )
    writer.columns(["quantity", "estimate", "standard_error"])
    for name in ("idle_fraction", "transmit_fraction", "mean_queue", "mean_cycle", "mean_wait"):
        est = getattr(stats, name)
        writer.row((name, est.value, est.se))
    for name in ("full_slots", "mini_slots", "n_waits", "success_slots", "collision_slots"):
        writer.row((name, getattr(stats, name), 0.0))
    writer.row(("drift_warning", int(stats.drift_warning), 0.0))
    return EXIT_OK


def cmd_validate(args, out) -> int:
    from . import validation  # deferred: validation drives this cli for one check

    results = validation.run_suite(args.level)
    out.write(validation.format_report(results) + "\n")
    return EXIT_OK if all(r.passed for r in results) else EXIT_VALIDATION


# --- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="backoffq",
        description="Buffered back-off station models: sweeps, waits, simulation.",
    )
    parser.add_argument("--version", action="version", version=f"backoffq {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, with_mode=True):
        p.add_argument("--config", help="key = value parameter file; flags override")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", default="-", help="output path, '-' for stdout")
        if with_mode:
            p.add_argument(
                "--mode", type=ChannelMode, choices=list(ChannelMode), default=None
            )
        p.add_argument(
            "--convention",
            choices=("peers", "total"),
            default="peers",
            help="whether the swept M counts peer stations (default) or all stations",
        )

    def sweep_flags(p):
        p.add_argument("--lambda", dest="lam", type=float, default=None)
        p.add_argument("--T", type=float, default=None)
        p.add_argument("--sigma", type=float, default=None)
        p.add_argument("--W", type=int, default=None)

    p = sub.add_parser("tau-vs-m", help="transmit probability at the network fixed point")
    common(p, with_mode=False)
    sweep_flags(p)
    p.add_argument("--m-min", type=int, default=0)
    p.add_argument("--m-max", type=int, default=100)
    p.set_defaults(handler=cmd_tau_vs_m)

    p = sub.add_parser("lambda-max", help="maximum stable arrival rate vs M")
    common(p)
    sweep_flags(p)
    p.add_argument("--m-min", type=int, default=1)
    p.add_argument("--m-max", type=int, default=100)
    p.set_defaults(handler=cmd_lambda_max)

    p = sub.add_parser("optimal-w", help="window maximising saturation throughput")
    common(p, with_mode=False)
    sweep_flags(p)
    p.add_argument("--m-min", type=int, default=1)
    p.add_argument("--m-max", type=int, default=100)
    p.add_argument("--w-lo", type=int, default=1)
    p.add_argument("--w-hi", type=int, default=4096)
    p.set_defaults(handler=cmd_optimal_w)

    p = sub.add_parser("fair-vs-greedy", help="maximum rates of the two channel models")
    common(p, with_mode=False)
    sweep_flags(p)
    p.add_argument("--m-min", type=int, default=1)
    p.add_argument("--m-max", type=int, default=100)
    p.set_defaults(handler=cmd_fair_vs_greedy)

    p = sub.add_parser("wait", help="waiting-time transform table and mean wait")
    common(p, with_mode=False)
    sweep_flags(p)
    p.add_argument("--r", type=float, default=None, help="busy probability of the channel")
    p.add_argument("--s-max", type=float, default=5.0)
    p.add_argument("--n-points", type=int, default=50)
    p.set_defaults(handler=cmd_wait)

    p = sub.add_parser("simulate", help="Monte-Carlo station or network run")
    common(p)
    sweep_flags(p)
    p.add_argument("--r", type=float, default=None, help="busy probability (station run)")
    p.add_argument("--stations", type=int, default=None, help="coupled-network size")
    p.add_argument("--slots", type=int, default=None, help="number of embedded epochs")
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("validate", help="run the cross-module invariant suite")
    common(p, with_mode=False)
    p.add_argument("--level", choices=("fast", "full"), default="fast")
    p.set_defaults(handler=cmd_validate)

    return parser


def main(argv=None, stdout=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args.config_values = load_config(args.config) if args.config else {}
        if args.out == "-" or stdout is not None:
            out = stdout if stdout is not None else sys.stdout
            return args.handler(args, out)
        with open(args.out, "w", encoding="utf-8", newline="\n") as out:
            return args.handler(args, out)
    except NonErgodicError as exc:
        print(f"backoffq: non-ergodic request: {exc}", file=sys.stderr)
        return EXIT_NON_ERGODIC
    except (ParameterError, OSError) as exc:
        print(f"backoffq: bad input: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())

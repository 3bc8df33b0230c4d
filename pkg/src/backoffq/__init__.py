"""Buffered slotted-channel back-off station models.

Analytic steady states (greedy and fair channel models), stability
thresholds, network fixed points and maximum throughputs, waiting-time
transforms, a brute-force truncated-chain oracle and a Monte-Carlo
simulator that cross-validate each other.
"""

from .fair import FairSolution
from .gf import SeriesCoefficients, SlotGF, extract_coefficients, power_sum
from .greedy import GreedySolution
from .network import (
    NetworkOperatingPoint,
    fair_fixed_point,
    greedy_operating_point,
    lambda_max_fair,
    lambda_max_greedy,
    network_ergodic_greedy,
    optimal_window,
    saturation_throughput,
    solve_u,
    solve_z,
    success_throughput,
)
from .oracle import TruncatedChain, build_kernel, solve_stationary, stationary
from .params import (
    ChannelMode,
    NonErgodicError,
    ParameterError,
    SystemParams,
    validate,
)
from .sim import SimStats, run_network, run_station, station_virtual_waits
from .tables import StationaryTable
from .waiting import WaitTransform

__version__ = "0.1.0"

__all__ = [
    "ChannelMode",
    "FairSolution",
    "GreedySolution",
    "NetworkOperatingPoint",
    "NonErgodicError",
    "ParameterError",
    "SeriesCoefficients",
    "SimStats",
    "SlotGF",
    "StationaryTable",
    "SystemParams",
    "TruncatedChain",
    "WaitTransform",
    "build_kernel",
    "extract_coefficients",
    "fair_fixed_point",
    "greedy_operating_point",
    "lambda_max_fair",
    "lambda_max_greedy",
    "network_ergodic_greedy",
    "optimal_window",
    "power_sum",
    "run_network",
    "run_station",
    "saturation_throughput",
    "solve_stationary",
    "solve_u",
    "solve_z",
    "station_virtual_waits",
    "stationary",
    "success_throughput",
    "validate",
]

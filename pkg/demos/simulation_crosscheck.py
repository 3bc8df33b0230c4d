"""Monte-Carlo cross-check of the analytic steady states.

Runs the event simulator for both channel models and for a small coupled
network, and prints simulated estimates (with batch-means standard
errors) next to the closed-form targets.
"""

from backoffq import (
    ChannelMode,
    FairSolution,
    GreedySolution,
    SystemParams,
    greedy_operating_point,
    run_network,
    run_station,
)
from backoffq.waiting import WaitTransform

EPOCHS = 4_000_000


def show(name, est, target):
    sigmas = abs(est.value - target) / max(est.se, 1e-300)
    print("  %-18s %.6f +- %.6f   target %.6f   (%.1f se)" % (
        name, est.value, est.se, target, sigmas))


params = SystemParams(lam=0.05, T=1.0, sigma=0.05, W=4)
r = 0.3
sol = GreedySolution(params, r)
stats = run_station(ChannelMode.GREEDY, params, r, EPOCHS, seed=2024)
print("greedy station, %d epochs, seed 2024" % EPOCHS)
show("idle fraction", stats.idle_fraction, sol.p00())
show("transmit fraction", stats.transmit_fraction, sol.tau())
show("mean cycle", stats.mean_cycle, WaitTransform(sol).mean_cycle_length())

fparams = SystemParams(lam=0.04, T=1.0, sigma=0.05, W=4)
fsol = FairSolution(fparams, 0.4)
fstats = run_station(ChannelMode.FAIR, fparams, 0.4, EPOCHS, seed=2024)
print("\nfair station")
show("idle fraction", fstats.idle_fraction, fsol.q00())
show("transmit fraction", fstats.transmit_fraction, fsol.taubar())
show("mean cycle", fstats.mean_cycle, 0.4 * fparams.T + 0.6 * fparams.sigma)

# Coupled network: every station sees the channel made busy by the others.
net_params = SystemParams(lam=0.01, T=1.0, sigma=0.05, W=31)
m_total = 6
point = greedy_operating_point(net_params, m_total - 1)
nstats = run_network(ChannelMode.GREEDY, net_params, m_total, EPOCHS, seed=99)
print("\ncoupled network of %d stations (mean-field prediction as target)" % m_total)
show("transmit fraction", nstats.transmit_fraction, point.tau)
print("  full slots: %d  successes: %d  collisions: %d" % (
    nstats.full_slots, nstats.success_slots, nstats.collision_slots))

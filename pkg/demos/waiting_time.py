"""Virtual waiting time of a greedy station.

Evaluates the waiting-time Laplace-Stieltjes transform, its mean, a few
CDF points by numerical inversion, and cross-checks the transform against
virtual probe packets injected into a long simulation run.
"""

import numpy as np

from backoffq import ChannelMode, GreedySolution, SystemParams, station_virtual_waits
from backoffq.waiting import WaitTransform

params = SystemParams(lam=0.05, T=1.0, sigma=0.05, W=4)
r = 0.3

wt = WaitTransform(GreedySolution(params, r))
print("waiting-time transform (lam=0.05, T=1, sigma=0.05, W=4, r=0.3)")
print("  mean virtual wait      = %.6f" % wt.mean_wait())
print("  mean inter-epoch cycle = %.6f" % wt.mean_cycle_length())

waits = station_virtual_waits(ChannelMode.GREEDY, params, r, 2_000_000, seed=1)
print("  simulated probe waits: mean %.6f over %d samples" % (waits.mean(), len(waits)))

print("\n  s     psi*(s)    sim E[exp(-s Wait)]")
for s in (0.1, 0.5, 1.0, 2.0):
    sim = float(np.mean(np.exp(-s * waits)))
    print("  %.1f   %.6f   %.6f" % (s, wt.psi_star(s), sim))

print("\n  CDF of the wait (numerical transform inversion)")
print("  t      P(Wait <= t)")
for t in (0.5, 1.5, 3.0, 6.0, 12.0):
    print("  %5.1f   %.5f" % (t, wt.wait_cdf(t)))
print("  (the mass at t < 1 is the idle atom p(0,0) = %.5f)" % GreedySolution(params, r).p00())

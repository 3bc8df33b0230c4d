"""One station against a busy channel: closed forms vs brute force.

Solves the greedy and fair steady states at a reference parameter point,
prints the head of the stationary (k, n) table from both the analytic
route (coefficient extraction from the generating functions) and the
truncated-chain solve, and shows the stability thresholds.
"""

import numpy as np

from backoffq import (
    ChannelMode,
    FairSolution,
    GreedySolution,
    SystemParams,
    solve_stationary,
)

params = SystemParams(lam=0.05, T=1.0, sigma=0.05, W=4)
r = 0.3

greedy = GreedySolution(params, r)
print("greedy station  (lam=%g, T=%g, sigma=%g, W=%d, r=%g)" % (
    params.lam, params.T, params.sigma, params.W, r))
print("  idle probability p(0,0) = %.10f" % greedy.p00())
print("  transmit probability tau = %.10f" % greedy.tau())
print("  stability threshold on lam = %.6f" % greedy.lambda_threshold())

analytic = greedy.stationary_table(60)
oracle = solve_stationary(ChannelMode.GREEDY, params, r, n_max=60)
dev = np.max(np.abs(analytic.probs - oracle.probs[:, :61]))
print("  analytic vs chain-solve table deviation: %.3e" % dev)

print("\n  p(k, n) for n <= 4 (analytic):")
for k in range(params.W + 1):
    row = "  ".join("%.6f" % analytic.p(k, n) for n in range(5))
    print("    k=%d : %s" % (k, row))

# Fair load model: the channel is an exogenous coin, the head packet only
# transmits when the coin shows a full slot.
fair = FairSolution(SystemParams(lam=0.04, T=1.0, sigma=0.05, W=4), 0.4)
print("\nfair station  (lam=0.04, r=0.4)")
print("  idle probability q(0,0) = %.10f" % fair.q00())
print("  transmit probability taubar = %.10f" % fair.taubar())
print("  stability threshold on lam = %.6f" % fair.lambda_threshold())

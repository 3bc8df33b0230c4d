"""Network fixed points over the number of peer stations.

Reproduces the figure-style sweeps: transmit probability at the coupled
operating point, maximum stable arrival rate of both channel models, and
the back-off window maximising the collision-free saturation throughput.
"""

from backoffq import (
    SystemParams,
    greedy_operating_point,
    lambda_max_fair,
    lambda_max_greedy,
    optimal_window,
)

params = SystemParams(lam=0.05, T=1.0, sigma=0.05, W=31)

print("operating point of a tagged station among M peers (lam=0.05, W=31)")
print("   M        z          r         tau     ergodic")
for M in (0, 1, 2, 5, 10, 20, 50, 100):
    pt = greedy_operating_point(params, M)
    print("  %3d  %.6f  %.6f  %.6f   %s" % (M, pt.z, pt.r, pt.tau, pt.ergodic))

print("\nmaximum per-station arrival rate (both models share the window root u)")
print("   M    lam_max(greedy)  lam_max(fair)   offered load (M+1 stations)")
for M in (1, 2, 5, 10, 20, 50, 100):
    g = lambda_max_greedy(params, M)
    f = lambda_max_fair(params, M)
    print("  %3d      %.6f       %.6f        %.4f" % (M, g, f, (M + 1) * g))

# The offered network load (M+1) lam_max can exceed one full packet per
# slot: stations share the channel without collisions in this model.

print("\nwindow maximising the saturation success throughput")
print("   M    W_opt    S_opt    S at W=31   unimodal")
for M in (1, 5, 10, 25, 50):
    w_opt, s_opt, unimodal = optimal_window(M, params.T, params.sigma, M + 1)
    from backoffq import saturation_throughput

    s31 = saturation_throughput(31, M, params.T, params.sigma, M + 1)
    print("  %3d    %5d   %.4f    %.4f      %s" % (M, w_opt, s_opt, s31, unimodal))

"""How far the relaxed trajectory strays from the lifted limit trajectory.

Along the diagonal alpha = eps the squared distance sup_t D should scale like
alpha + eps, i.e. the norm like (alpha + eps)^(1/2).
"""

import numpy as np

from nlch import Domain, Params, PotentialSpec, build_kernel, run_difference
from nlch.harness.campaigns import fit_rate
from nlch.harness.config import make_field

dom = Domain.make(64)
K = build_kernel(dom, {"family": "gaussian", "amplitude": 1.0, "width": 0.5, "target_cJ": 1.0})
P = PotentialSpec()
phi0 = make_field(dom, {"kind": "seeded-random", "seed": 1, "amplitude": 0.5, "cutoff": 4, "mean": 0.1})

eps = np.geomspace(1e-1, 1e-5, 5)
series = run_difference(phi0, None, K, P, Params(dt=1e-3, T=0.5), [(e, e) for e in eps] + [(0.0, 0.0)])

for (a, e), ser in series.items():
    print(f"alpha = eps = {a:.0e}:  sup D = {ser.sup_D:.3e}   D(0) = {ser.D[0]:.1e}")

fit = fit_rate([(a + e, ser.sup_D) for (a, e), ser in series.items()])
print(f"\nlog-log slope {fit.slope:.3f} (r2 {fit.r2:.4f}); norm rate {fit.slope / 2:.3f}")

"""Build the default kernel and potential and look at the structural constants.

The kernel is rescaled so its L^1 mass over the centred box is 1; with the
stabilised double well (kappa = 2.5) every hypothesis check passes.  Setting
kappa = 0 and widening the sample range shows how the growth condition on
F' breaks down for large |s|.
"""

import numpy as np

from nlch import Domain, PotentialSpec, build_kernel, verify_hypotheses
from nlch.kernel import check_h6

dom = Domain.make(64)
K = build_kernel(dom, {"family": "gaussian", "amplitude": 1.0, "width": 0.5, "target_cJ": 1.0})
print(f"c_J = {K.c_J:.4f}   d_J = {K.d_J:.4f}   a in [{K.a_min:.4f}, {K.a_star:.4f}]")

# a(x) = (J*1)(x) dips near the walls, which is why it is not constant
x = dom.axes[0]
for xi, ai in zip(x[::8], K.a_field[::8]):
    print(f"  x = {xi:.3f}  a = {ai:.4f}")

for label, P in [("default", PotentialSpec()), ("kappa=0, s_max=10, p=2", PotentialSpec(kappa=0.0, s_max=10.0, p=2.0))]:
    rep = verify_hypotheses(P, K)
    rep["H6"] = check_h6(K, P)
    status = {k: v["pass"] for k, v in rep.items()}
    print(f"\n{label}: {status}")
    if not rep["H4"]["pass"]:
        print(f"  H4 witness s = {rep['H4']['witness']}, bound holds on |s| <= {rep['H4']['admissible_s_range']:.3f}")

# F'' + a_min is the convexity margin the energy estimates lean on
P = PotentialSpec()
s = np.linspace(-2, 2, 5)
print("\nF''(s) + a_min:", np.round(P.ddF(s) + K.a_min, 3))

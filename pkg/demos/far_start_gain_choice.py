"""Starting 3 m away: a well-conditioned gain is not always a good one.

From x0 = (3, 1, 0, -0.001, 0, ...) the nonlinear terms matter.  The robust
placement gain, which minimizes eigenvector sensitivity, lets the hook angle
run away, while the printed reference gain brings the load home.  Which pole
ends up driving which mode decides the outcome.
"""

import numpy as np

from dptcrane import REFERENCE_POLES, CraneParams, IntegratorOptions, analytic_linearization
from dptcrane import integrate, reference_gain, place_poles, settling_time
from dptcrane.config import FIG8_X0

p = CraneParams()
m = analytic_linearization(p, "fully_actuated")
opts = IntegratorOptions(t_end=20)

for label, K in [("placed", place_poles(m, REFERENCE_POLES).K), ("printed", reference_gain(m.variant).K)]:
    tr = integrate(p, K, m.variant, FIG8_X0, opts)
    if tr.success:
        print(f"{label:>8}: settles at {settling_time(tr):.2f}, |x(20)| = {np.linalg.norm(tr.final_state):.1e}")
    else:
        print(f"{label:>8}: {tr.message}")
    # Closed-loop eigenvectors: which states dominate the slowest mode?
    w, V = np.linalg.eig(m.A - m.B @ K)
    slow = np.argmax(w.real)
    share = np.abs(V[:4, slow]) / np.abs(V[:4, slow]).sum()
    print(f"          slowest pole {w[slow].real:.2f} acts on (z, l1, th1, th2) with weights {np.round(share, 2)}")

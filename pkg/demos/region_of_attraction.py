"""Certify a ball of initial states that the underactuated loop pulls back.

The certificate solves A_cl^T P + P A_cl = -Q, estimates how large the
nonlinear remainder can be on a ball of radius gamma by sampling, and keeps
the largest gamma for which the Lyapunov derivative is provably negative
under that estimate.  The result is sample-based, not a formal proof.
"""

import numpy as np

from dptcrane import REFERENCE_POLES, CraneParams, analytic_linearization, estimate_sigma
from dptcrane import reference_gain, place_poles, region_of_attraction, vdot
from dptcrane.certify import unit_ball_samples

p = CraneParams()
m = analytic_linearization(p, "underactuated")

for label, K in [("placed", place_poles(m, REFERENCE_POLES).K), ("printed", reference_gain(m.variant).K)]:
    cert = region_of_attraction(p, m, K, n_samples=20_000)
    X = cert.gamma_hat * unit_ball_samples(5_000, seed=1)
    worst = np.max(vdot(cert.P, p, K, m.variant, X))
    print(f"{label:>8}: gamma_hat={cert.gamma_hat:.3e}  margin={cert.margin:.3e}  "
          f"lambda_max(P)={cert.lambda_max_P:.3e}  max vdot on ball={worst:.2e}")

# The radius is small because the hook equation contains a gravity term
# proportional to l1 * theta1 that no gain can cancel.  The remainder bound
# grows linearly with the radius.
K = place_poles(m, REFERENCE_POLES).K
for gamma in (1e-6, 1e-5, 1e-4):
    s = estimate_sigma(p, K, m.variant, gamma, n_samples=5_000)
    print(f"gamma={gamma:.0e}: sigma_hat={s:.3e}  sigma_hat/gamma={s / gamma:.1f}")
print("g (m_h + m_p) / I_h =", p.g * p.hanging_mass / p.I_h)

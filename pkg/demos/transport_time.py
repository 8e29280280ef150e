"""How much faster does the load settle when the payload angle is actuated?

Settling time here is the last time the state norm exceeds 2% of its initial
value.  The answer depends on the gain, so the comparison is repeated with
the robustly placed gains and with the printed reference gains.
"""

import numpy as np

from dptcrane import REFERENCE_POLES, CraneParams, IntegratorOptions, analytic_linearization
from dptcrane import integrate, reference_gain, place_poles, settling_time
from dptcrane.config import FIG3_X0

p = CraneParams()
opts = IntegratorOptions(t_end=40)


def settle(K, variant):
    return settling_time(integrate(p, K, variant, FIG3_X0, opts), 0.02)


for label, gain in [
    ("placed", lambda v: place_poles(analytic_linearization(p, v), REFERENCE_POLES).K),
    ("printed", lambda v: reference_gain(v).K),
]:
    ts_u = settle(gain("underactuated"), "underactuated")
    ts_f = settle(gain("fully_actuated"), "fully_actuated")
    print(f"{label:>8} gains: underactuated {ts_u:6.2f}  fully actuated {ts_f:6.2f}  "
          f"reduction {100 * (1 - ts_f / ts_u):5.1f}%")

print("state norm bound used for settling:", 0.02 * np.linalg.norm(FIG3_X0))

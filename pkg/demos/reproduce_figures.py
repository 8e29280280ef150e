"""Run every reference figure preset and write its trajectory and summary.

Usage: python demos/reproduce_figures.py [out_dir]

Figures 3/4 and 6/7 share a run (states and forces of the same simulation),
so only 3, 5, 6 and 8 are integrated.  Plot any CSV with
``crane plot-script --csv <file> | gnuplot -p``.
"""

import sys

from dptcrane.sim import trajectory_divergence

from dptcrane import figure_preset, run_scenario
from dptcrane.pipeline import write_outputs

out = sys.argv[1] if len(sys.argv) > 1 else "demo_output"

results = {}
for number in (3, 5, 6, 8):
    cfg = figure_preset(number)
    res = results[number] = run_scenario(cfg, certify=False)
    s = write_outputs(res, out)["simulation"]
    F = s["terminal_forces"]
    print(f"figure {number}: {cfg.variant.value:<15} gains={cfg.gains:<5} "
          f"settling={s['settling_time']!s:<6} |x_end|={s['final_state_norm']:.1e} "
          f"F_l1={F['Fl1']:.3f} -> {out}/{cfg.csv}")

# Figure 5 differs from figure 3 only by a 1 mm trolley offset; the two runs
# stay within about that distance of each other throughout.
gap = trajectory_divergence(results[3].trajectory, results[5].trajectory)
print(f"max state gap between figures 3 and 5: {gap:.2e}")

"""How large can the coupling get before the picture breaks?

For each mu we run the core checks on an increasing list of delta values
and report the longest passing prefix.  This is an empirical probe, not a
bound: the checks are sampled and the delta grid is coarse.
"""

import math

from henon_basins.cli import SWEEP_CHECKS, sweep_rows

deltas = [0.02, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5]
print("checks:", ", ".join(SWEEP_CHECKS))
print(f"{'mu':>5} {'largest delta':>14} {'passing':>8}")
for mu, star, prefix, n in sweep_rows([1.2, 1.5, 2.0, 2.5, 2.8], deltas, samples=200, seed=7):
    shown = "none" if math.isnan(star) else f"{star:g}"
    print(f"{mu:5.2f} {shown:>14} {prefix:>5}/{n}")

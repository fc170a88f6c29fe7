import numpy as np
from scprop.scan import ScanConfig, run_scan

cfg = ScanConfig(n_qx=21, n_t=21, methods=("k2", "uniform"))
grid = run_scan(cfg)
far = (grid.absB > 2.0) & ~grid.gap
print("caustic:", grid.caustic)
print("far points:", far.sum(), " elected:", grid.elected_j, grid.elected_sign,
      [f"{s:.5f}" for s in grid.election_scores])
rel = np.abs(grid.kun_elected[far] - grid.k2[far]) / np.abs(grid.k2[far])
print(f"criterion-8 complex rel diff: median {np.median(rel):.3e}, max {np.max(rel):.3e}")
relm = np.abs(np.abs(grid.kun_elected[far]) - np.abs(grid.k2[far])) / np.abs(grid.k2[far])
print(f"modulus rel diff: median {np.median(relm):.3e}")
# band medians
for lo, hi in ((2, 4), (4, 8), (8, np.inf)):
    m = (grid.absB > lo) & (grid.absB <= hi) & ~grid.gap
    if m.sum():
        r = np.abs(grid.kun_elected[m] - grid.k2[m]) / np.abs(grid.k2[m])
        print(f"band ({lo},{hi}): n={m.sum()} median {np.median(r):.3e}")
    else:
        print(f"band ({lo},{hi}): empty")
print("F0_a range:", np.nanmin(grid.F0_a), np.nanmax(grid.F0_a))
print("F0_b range:", np.nanmin(grid.F0_b), np.nanmax(grid.F0_b), " neg frac:", np.mean(grid.F0_b < 0))
print("|K2| range:", np.nanmin(np.abs(grid.k2)), np.nanmax(np.abs(grid.k2)))
print("max |Kun| on grid:", np.nanmax(np.abs(grid.kun_elected)))

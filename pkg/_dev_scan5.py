import time
import numpy as np
from scprop.scan import ScanConfig, run_scan

t0 = time.time()
cfg = ScanConfig(n_qx=21, n_t=21, methods=("k2", "uniform", "exact"))
grid = run_scan(cfg)
print(f"with exact: {time.time()-t0:.0f}s")
ke = np.abs(grid.k_exact)
ka, kb = np.abs(grid.k2_a), np.abs(grid.k2_b)
ks = np.abs(grid.k2_a + grid.k2_b)
far = (grid.absB > 2.0) & ~grid.gap
near = (grid.absB <= 2.0) & ~grid.gap
for name, ref in (("|f_a|", ka), ("|f_b|", kb), ("|sum|", ks),
                  ("|comb|", np.abs(grid.k2)), ("|Kun elected|", np.abs(grid.kun_elected)),
                  ("|Kun j1|", np.abs(grid.kun[0])), ("|Kun j2|", np.abs(grid.kun[1])),
                  ("|Kun j3|", np.abs(grid.kun[2]))):
    r_far = np.abs(ref[far] - ke[far]) / ke[far]
    r_near = np.abs(ref[near] - ke[near]) / ke[near]
    r_all = np.abs(ref[~grid.gap] - ke[~grid.gap]) / ke[~grid.gap]
    print(f"{name:14s} vs exact: far median {np.median(r_far):.3f}  "
          f"near median {np.median(r_near):.3f}  all: med {np.median(r_all):.3f} "
          f" frac<5% {np.mean(r_all < 0.05):.2f}")
print("exact |K| range:", ke[~grid.gap].min(), ke[~grid.gap].max())
np.save("/tmp/ke21.npy", grid.k_exact)

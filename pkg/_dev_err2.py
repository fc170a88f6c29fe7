import numpy as np
from scprop.scan import ScanConfig, run_scan

cfg = ScanConfig(n_qx=21, n_t=21, methods=("k2", "uniform"))
grid = run_scan(cfg)
ke = np.abs(np.load("/tmp/ke21.npy"))
ok = ~grid.gap
far = (grid.absB > 2.0) & ok
print("elected:", grid.elected_j, grid.elected_sign, [f"{s:.5f}" for s in grid.election_scores])
for name, ref in (("comb", np.abs(grid.k2)),
                  ("Kun j1", np.abs(grid.kun[0])), ("Kun j2", np.abs(grid.kun[1])),
                  ("Kun j3", np.abs(grid.kun[2])), ("Kun elected", np.abs(grid.kun_elected))):
    r = np.abs(ref[ok] - ke[ok]) / ke[ok]
    print(f"{name:12s} vs exact: med {np.median(r):.4f}  frac<5% {np.mean(r < 0.05):.3f} "
          f" frac<10% {np.mean(r < 0.10):.3f}  max {np.max(r):.2f}")
# criterion 8 statistic
rel = np.abs(grid.kun_elected[far] - grid.k2[far]) / np.abs(grid.k2[far])
relm = np.abs(np.abs(grid.kun_elected[far]) - np.abs(grid.k2[far])) / np.abs(grid.k2[far])
print(f"crit8 far-field: complex med {np.median(rel):.4e}  modulus med {np.median(relm):.4e}")
# surface continuity after fix
for s in range(3):
    dj = np.abs(np.diff(grid.kun[s], axis=0)) / (np.abs(grid.kun[s][:-1]) + 1e-12)
    print(f"surface {s+1} max T-jump: {np.nanmax(dj):.3f}")

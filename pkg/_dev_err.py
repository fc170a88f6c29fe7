import numpy as np
from scprop.scan import ScanConfig, run_scan

cfg = ScanConfig(n_qx=21, n_t=21, methods=("k2", "uniform"))
grid = run_scan(cfg)
ke = np.abs(np.load("/tmp/ke21.npy"))
ka = np.abs(grid.k2_a)
r = ke / ka
ok = ~grid.gap
print("ratio |K_exact|/|K2_a|: median", np.median(r[ok]), "mean", np.mean(r[ok]),
      "std", np.std(r[ok]))
print("ratio field (rows T=7..8, cols qx=0.2..1.0):")
for i in range(0, 21, 2):
    print("  " + " ".join(f"{r[i,j]:.3f}" for j in range(0, 21, 2)))
kun2 = np.abs(grid.kun[1])
r2 = ke / kun2
print("ratio |K_exact|/|Kun j2|: median", np.median(r2[ok]), "std", np.std(r2[ok]))
for i in range(0, 21, 4):
    print("  " + " ".join(f"{r2[i,j]:.3f}" for j in range(0, 21, 4)))

import numpy as np
from scprop.scan import ScanConfig, run_scan

cfg = ScanConfig(n_qx=21, n_t=21, methods=("k2", "uniform"))
grid = run_scan(cfg)
ke = np.abs(np.load("/tmp/ke21.npy"))
err = np.abs(np.abs(grid.kun_elected) - ke) / ke
print("elected-Kun error map (%, rows T=7..8, cols qx=0.2..1.0):")
print("      " + " ".join(f"{q:4.2f}" for q in grid.qxs[::2]))
for i in range(21):
    print(f"T={grid.Ts[i]:.2f} " + " ".join(f"{100*err[i,j]:4.0f}" for j in range(0, 21, 2)))
print("exact |K| vs err>5% correlation:")
m = err > 0.05
print("  |K_exact| at err>5%: median", np.median(ke[m]), " at err<5%:", np.median(ke[~m & ~grid.gap]))

import numpy as np
from scprop.scan import ScanConfig, run_scan

cfg = ScanConfig(n_qx=21, n_t=21, methods=("k2", "uniform"))
grid = run_scan(cfg)
ke = np.abs(np.load("/tmp/ke21.npy"))
ka, kb = grid.k2_a, grid.k2_b
err = np.abs(np.abs(grid.k2) - ke) / ke
sel = np.full(grid.k2.shape, "?", dtype=object)
for i, j in np.argwhere(~grid.gap):
    cands = {"a": ka[i, j], "s": ka[i, j] + kb[i, j]}
    sel[i, j] = min(cands, key=lambda k: abs(cands[k] - grid.k2[i, j]))
print("selection map (a = f_a alone, s = sum), rows T=7..8 top->bottom:")
for i in range(21):
    print("  T=%.2f " % grid.Ts[i] + "".join(str(sel[i, j]) for j in range(21))
          + "   err: " + " ".join(f"{err[i,j]:4.2f}" if np.isfinite(err[i,j]) else " nan" for j in range(0, 21, 2)))
print("caustic:", (grid.caustic.T, grid.caustic.qx))
# which is better pointwise: a or s?
best_a = np.abs(np.abs(ka) - ke) / ke
best_s = np.abs(np.abs(ka + kb) - ke) / ke
print("err if always a: med", np.nanmedian(best_a[~grid.gap]), "frac<5%", np.nanmean(best_a[~grid.gap] < .05))
print("err if always s: med", np.nanmedian(best_s[~grid.gap]), "frac<5%", np.nanmean(best_s[~grid.gap] < .05))
print("err pointwise-best: med", np.nanmedian(np.minimum(best_a, best_s)[~grid.gap]),
      "frac<5%", np.nanmean(np.minimum(best_a, best_s)[~grid.gap] < .05))

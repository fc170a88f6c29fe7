import numpy as np
from scprop.scan import ScanConfig, run_scan

cfg = ScanConfig(n_qx=21, n_t=21, methods=("k2", "uniform"))
grid = run_scan(cfg)
far = (grid.absB > 2.0) & ~grid.gap
print("far points:", far.sum(), " elected:", grid.elected_j, grid.elected_sign,
      [f"{s:.4f}" for s in grid.election_scores])

# pointwise best-j match vs k2 combined and vs k2_a alone
best = np.full(grid.k2.shape, np.nan)
bestj = np.zeros(grid.k2.shape, dtype=int)
for i, j in np.argwhere(far):
    diffs = [abs(abs(grid.kun[s, i, j]) - abs(grid.k2[i, j])) / abs(grid.k2[i, j]) for s in range(3)]
    best[i, j] = min(diffs)
    bestj[i, j] = int(np.argmin(diffs)) + 1
print("pointwise best-j rel diff: median", np.nanmedian(best[far]),
      " max", np.nanmax(best[far]))
print("bestj distribution:", {k: int((bestj[far] == k).sum()) for k in (1, 2, 3)})

# compare vs f_a alone
for s in range(3):
    rel = np.abs(np.abs(grid.kun[s][far]) - np.abs(grid.k2_a[far])) / np.abs(grid.k2_a[far])
    print(f"j={s+1} vs |k2_a|: median {np.median(rel):.3e} max {np.max(rel):.3e}")

# check K2 combined vs f_a alone in the far field
rel = np.abs(np.abs(grid.k2[far]) - np.abs(grid.k2_a[far])) / np.abs(grid.k2_a[far])
print("combined vs f_a: median", np.median(rel), "max", np.max(rel))

# surface continuity: max jump of each kun along T direction
for s in range(3):
    dj = np.abs(np.diff(grid.kun[s], axis=0)) / (np.abs(grid.kun[s][:-1]) + 1e-12)
    print(f"surface {s+1} max T-jump: {np.nanmax(dj):.3f}")
# w-field continuity: reconstruct absB jumps
djB = np.abs(np.diff(grid.absB, axis=0))
print("absB max T-jump:", np.nanmax(djB))

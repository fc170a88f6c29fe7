import time
import numpy as np
from scprop.scan import ScanConfig, run_scan, export, locate_caustic

t0 = time.time()
cfg = ScanConfig(n_qx=11, n_t=11, methods=("k2", "uniform"))
grid = run_scan(cfg)
print(f"scan 11x11 (no exact): {time.time()-t0:.1f}s, gaps={int(grid.gap.sum())}, "
      f"anchor roots={grid.anchor_roots_found}")
print("caustic:", grid.caustic)
print("elected j:", grid.elected_j, "sign:", grid.elected_sign,
      "scores:", [f"{s:.4f}" for s in grid.election_scores])
print("F0_a range:", np.nanmin(grid.F0_a), np.nanmax(grid.F0_a))
print("F0_b range:", np.nanmin(grid.F0_b), np.nanmax(grid.F0_b))
print("absB range:", np.nanmin(grid.absB), np.nanmax(grid.absB))
print("|K2| range:", np.nanmin(np.abs(grid.k2)), np.nanmax(np.abs(grid.k2)))
print("|Kun| range:", np.nanmin(np.abs(grid.kun_elected)), np.nanmax(np.abs(grid.kun_elected)))
# merger stat on |B|>2
far = grid.absB > 2.0
rel = np.abs(grid.kun_elected[far] - grid.k2[far]) / np.abs(grid.k2[far])
print(f"far-field complex rel diff: median {np.median(rel):.2e}, max {np.max(rel):.2e}, n={far.sum()}")
paths = export(grid, "/tmp/scantest", cut_qx=0.58)
print("exported:", {k: str(v) for k, v in paths.items()})
import json
print(json.dumps(json.load(open(paths["metadata"]))["error_quantiles"], indent=0))

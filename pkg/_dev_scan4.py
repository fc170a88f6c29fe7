import numpy as np
from scprop.scan import ScanConfig, run_scan

cfg = ScanConfig(n_qx=21, n_t=21, methods=("k2", "uniform"))
grid = run_scan(cfg)
far = (grid.absB > 2.0) & ~grid.gap

ka, kb, ks = grid.k2_a, grid.k2_b, grid.k2_a + grid.k2_b
sel = np.full(grid.k2.shape, "?", dtype=object)
for i, j in np.argwhere(~grid.gap):
    cands = {"a": ka[i, j], "b": kb[i, j], "s": ks[i, j]}
    sel[i, j] = min(cands, key=lambda k: abs(cands[k] - grid.k2[i, j]))
import collections
print("combined selection counts (far):", collections.Counter(sel[far].ravel()))
print("combined selection counts (all):", collections.Counter(sel[~grid.gap].ravel()))
print("|k2_b/k2_a| over far: median", np.median(np.abs(kb[far]/ka[far])),
      "max", np.max(np.abs(kb[far]/ka[far])))

for s in range(3):
    for name, ref in (("k2_a", ka), ("k2_b", kb), ("sum", ks), ("comb", grid.k2)):
        r = np.abs(grid.kun[s][far] - ref[far]) / np.abs(ref[far])
        rm = np.abs(np.abs(grid.kun[s][far]) - np.abs(ref[far])) / np.abs(ref[far])
        print(f"j={s+1} vs {name}: complex median {np.median(r):.3e}  modulus median {np.median(rm):.3e}")
    print()

import sys, time
import numpy as np
from scprop.exact_qm import GridSpec, coherent_wavefunction, propagate
from scprop.scan import ScanConfig, resolve_point, bare_potential

cfg = ScanConfig()
V = bare_potential(cfg)
cp = cfg.coherent_params

for (T, qx) in ((7.5, 0.6), (8.0, 0.3)):
    z = resolve_point(cfg, qx)
    vals = {}
    for tag, (box, n, dt) in {
        "base": (4.0, 256, 1e-3),
        "box5": (5.0, 256, 1e-3),
        "n512": (4.0, 512, 1e-3),
        "dt5e-4": (4.0, 256, 5e-4),
    }.items():
        t0 = time.time()
        gs = GridSpec((-box, box), (-box, box), n, n, dt)
        ket = coherent_wavefunction(z, cp, gs)
        out = propagate(ket, V, T, gs, cp.hbar)
        m = np.abs(out.psi)**2 * gs.dA
        shell = m.sum() - m[4:-4, 4:-4].sum()
        vals[tag] = abs(ket.overlap(out))
        print(f"(T={T}, qx={qx}) {tag:8s} |K| = {vals[tag]:.8f}  shell {shell:.1e}  ({time.time()-t0:.0f}s)", flush=True)
    print(f"   max dev from base: {max(abs(v-vals['base']) for v in vals.values()):.2e}", flush=True)

import numpy as np
from scprop.hamiltonians import NelsonParams, NelsonSmoothed, nelson_smoothed
from scprop.phase_core import CoherentParams
from scprop.scan import ScanConfig, resolve_point, bare_potential
from scprop.trajectory import ShootingProblem, multistart_roots, newton_shoot, track_root
from scprop.semiclassical import k2_single
from scprop.exact_qm import GridSpec, coherent_wavefunction, propagate


class NelsonBare(NelsonSmoothed):
    def __init__(self, params, cp):
        super().__init__(params, cp)
        object.__setattr__(self, 'sx', 0.0) if False else None
        self.sx = 0.0
        self.C0 = 0.0
        self.kernel_params = np.array([cp.hbar, cp.b_x, cp.b_y, cp.c_x, cp.c_y, self.mu, 0.0, 0.0])


cfg = ScanConfig()
cp = cfg.coherent_params
V = bare_potential(cfg)
gs = GridSpec((-4., 4.), (-4., 4.), 256, 256, 1e-3)

models = {"smoothed": nelson_smoothed(NelsonParams(0.1), cp),
          "bare": NelsonBare(NelsonParams(0.1), cp)}

pts = [(7.2, 0.3), (7.8, 0.45), (7.1, 0.8), (7.9, 0.7), (7.5, 0.35), (7.6, 0.9)]
for tag, model in models.items():
    errs = []
    for (T, qx) in pts:
        z = resolve_point(cfg, qx)
        # continue the dominant root from the anchor to (T, qx)
        anchor_prob = ShootingProblem.for_labels(model, resolve_point(cfg, 0.6), resolve_point(cfg, 0.6), 7.5)
        roots = multistart_roots(anchor_prob)
        # pick pair by smallest dS among 4 smallest |F0| (like the scan)
        nsq = resolve_point(cfg, 0.6).norm_sq * 2
        ranked = sorted(roots, key=lambda r: abs(r.S.imag + 0.5*cfg.hbar*nsq))[:4]
        best = min(((abs(ranked[i].S - ranked[j].S), i, j) for i in range(len(ranked)) for j in range(i+1, len(ranked))))
        pair = (ranked[best[1]], ranked[best[2]])
        vals = []
        for r in pair:
            path = [(7.5 + s*(T-7.5), 0.6 + s*(qx-0.6)) for s in np.linspace(0, 1, 30)]
            res, fails = track_root(lambda k: ShootingProblem.for_labels(model, resolve_point(cfg, path[int(round(k))][1]), resolve_point(cfg, path[int(round(k))][1]), path[int(round(k))][0]), range(30), r.v0)
            c = k2_single(res[-1], z, z)
            vals.append(c.value)
        ket = coherent_wavefunction(z, cp, gs)
        ke = abs(ket.overlap(propagate(ket, V, T, gs, cp.hbar)))
        best_err = min(abs(abs(v) - ke)/ke for v in vals + [vals[0]+vals[1]])
        errs.append(best_err)
        print(f"  {tag} (T={T}, qx={qx}): best family err {best_err:.4f}")
    print(f"{tag}: median {np.median(errs):.4f}\n")

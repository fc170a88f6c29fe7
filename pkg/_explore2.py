"""Dev exploration #2: which pair of roots coalesces, and where."""
import numpy as np

from scprop.hamiltonians import NelsonParams, nelson_smoothed
from scprop.phase_core import CoherentLabel, CoherentParams
from scprop.trajectory import ShootingProblem, multistart_roots, track_root

CP = CoherentParams(0.2, 0.2, 0.05)
MODEL = nelson_smoothed(NelsonParams(0.1), CP)


def label(qx):
    qy = 2.0 * qx / 3.0
    pot = (qy - 0.5 * qx**2) ** 2 + 0.05 * qx**2
    pmag = np.sqrt(2.0 * (0.5 - pot))
    th = np.deg2rad(140.0)
    return CoherentLabel.from_centroid((qx, qy), (pmag * np.cos(th), pmag * np.sin(th)), CP)


def prob(T, qx):
    z = label(qx)
    return ShootingProblem.for_labels(MODEL, z, z, T)


# serpentine path over a coarse window grid
nT, nq = 21, 21
Ts = np.linspace(7.0, 8.0, nT)
qxs = np.linspace(0.2, 1.0, nq)
path = []
for j, qx in enumerate(qxs):
    rng = range(nT) if j % 2 == 0 else range(nT - 1, -1, -1)
    for i in rng:
        path.append((i, j))

z0 = label(qxs[0])
roots0 = multistart_roots(prob(Ts[0], qxs[0]))
print(f"{len(roots0)} roots at corner (T={Ts[0]}, qx={qxs[0]})")
for r in roots0[:6]:
    F0 = r.S.imag + 0.05 * z0.norm_sq
    print("  v0:", np.round(r.v0, 4), " |detMvv|:", round(abs(r.det_mvv), 3),
          " F0:", round(F0, 4), " S:", np.round(r.S, 4))

nfam = min(4, len(roots0))
S = np.full((nfam, nT, nq), np.nan + 0j, dtype=complex)
D = np.full((nfam, nT, nq), np.nan + 0j, dtype=complex)
F = np.full((nfam, nT, nq), np.nan)
V0 = np.full((nfam, nT, nq, 2), np.nan + 0j, dtype=complex)

for f in range(nfam):
    def fac(s):
        k0 = int(np.floor(s))
        frac = s - k0
        if k0 >= len(path) - 1:
            i, j = path[-1]
            return prob(Ts[i], qxs[j])
        i0, j0 = path[k0]
        i1, j1 = path[k0 + 1]
        T = Ts[i0] * (1 - frac) + Ts[i1] * frac
        qx = qxs[j0] * (1 - frac) + qxs[j1] * frac
        return prob(T, qx)

    res, fails = track_root(fac, np.arange(len(path), dtype=float), roots0[f].v0)
    ngap = sum(1 for r in res if r is None)
    for k, r in enumerate(res):
        if r is None:
            continue
        i, j = path[k]
        S[f, i, j] = r.S
        D[f, i, j] = r.det_mvv
        F[f, i, j] = r.S.imag + 0.05 * label(qxs[j]).norm_sq
        V0[f, i, j] = r.v0
    print(f"family {f}: gaps={ngap}  min|detMvv|={np.nanmin(np.abs(D[f])):.4f} "
          f" F0 range [{np.nanmin(F[f]):.4f},{np.nanmax(F[f]):.4f}]")

print()
for a in range(nfam):
    for b in range(a + 1, nfam):
        dS = np.abs(S[a] - S[b])
        i, j = np.unravel_index(np.nanargmin(dS), dS.shape)
        dv = np.max(np.abs(V0[a, i, j] - V0[b, i, j]))
        print(f"pair ({a},{b}): min|dS|={np.nanmin(dS):.5f} at (T={Ts[i]:.3f}, qx={qxs[j]:.3f}); "
              f"v0 dist there={dv:.4f}; |detMvv|: {abs(D[a,i,j]):.3f}, {abs(D[b,i,j]):.3f}")

# |K2| single contributions: N * |P| * exp(-Im(S+G)/hbar); here just the
# textbook magnitude via F0 and prefactor to gauge the plotted field scale
for f in range(nfam):
    mag = np.abs(D[f]) ** -0.25 * 0 + np.exp(-F[f] / CP.hbar) / np.sqrt(np.abs(D[f]))
    print(f"family {f}: |K2| contribution range [{np.nanmin(mag):.4f}, {np.nanmax(mag):.4f}]")

"""Dev exploration #6: geometry of the F0_b < 0 region; pair dS range."""
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


def param_path(waypoints, n_per_seg=12):
    pts = []
    for (t0, q0), (t1, q1) in zip(waypoints[:-1], waypoints[1:]):
        for s in np.linspace(0, 1, n_per_seg, endpoint=False):
            pts.append((t0 + s * (t1 - t0), q0 + s * (q1 - q0)))
    pts.append(waypoints[-1])
    return pts


def track_path(pts, v0):
    res, fails = track_root(lambda k: prob(*pts[int(round(k))]), range(len(pts)), v0)
    assert not fails
    return res


pair = multistart_roots(prob(7.5, 0.6))[:2]
corner_path = param_path([(7.5, 0.6), (7.0, 0.6), (7.0, 0.2)], 25)

nT, nq = 21, 21
Ts = np.linspace(7.0, 8.0, nT)
qxs = np.linspace(0.2, 1.0, nq)
path = []
for j in range(nq):
    rng = range(nT) if j % 2 == 0 else range(nT - 1, -1, -1)
    for i in rng:
        path.append((i, j))
pts = [(Ts[i], qxs[j]) for i, j in path]

F = np.full((2, nT, nq), np.nan)
S = np.full((2, nT, nq), np.nan + 0j, dtype=complex)
for k, r in enumerate(pair):
    res0 = track_path(corner_path, r.v0)
    res = track_path(pts, res0[-1].v0)
    for m, rr in enumerate(res):
        i, j = path[m]
        F[k, i, j] = rr.S.imag + 0.05 * label(qxs[j]).norm_sq
        S[k, i, j] = rr.S

neg = F[1] < 0
print("F0_b < 0 region (rows T, cols qx); caustic at (7.3934, 0.5727):")
for i in range(nT):
    line = "".join("#" if neg[i, j] else "." for j in range(nq))
    print(f"  T={Ts[i]:.2f} {line}")
print("qx gridline:", " ".join(f"{q:.2f}" for q in qxs))
dS = np.abs(S[0] - S[1])
absB = (np.abs(dS) * 15.0) ** (2 / 3)
print(f"|dS| range on grid: [{np.nanmin(dS):.4f}, {np.nanmax(dS):.4f}]")
print(f"|B| range on grid: [{np.nanmin(absB):.4f}, {np.nanmax(absB):.4f}]")
print(f"|B|>2 frac: {np.mean(absB > 2):.3f}, |B|>4: {np.mean(absB > 4):.3f}, |B|>8: {np.mean(absB > 8):.3f}")
# F0 margins
print(f"fam0 min F0: {np.nanmin(F[0]):.5f}   fam1 min F0: {np.nanmin(F[1]):.5f}")

"""Dev exploration #5: pair identity at the corner, F0_b map, Moebius loop."""
import numpy as np

from scprop.hamiltonians import NelsonParams, nelson_smoothed
from scprop.phase_core import CoherentLabel, CoherentParams
from scprop.trajectory import ShootingProblem, multistart_roots, track_root

CP = CoherentParams(0.2, 0.2, 0.05)
MODEL = nelson_smoothed(NelsonParams(0.1), CP)
TSTAR, QSTAR = 7.393414, 0.572677


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
    """Piecewise-linear path through (T, qx) waypoints -> list of (T, qx)."""
    pts = []
    for (t0, q0), (t1, q1) in zip(waypoints[:-1], waypoints[1:]):
        for s in np.linspace(0, 1, n_per_seg, endpoint=False):
            pts.append((t0 + s * (t1 - t0), q0 + s * (q1 - q0)))
    pts.append(waypoints[-1])
    return pts


def track_path(pts, v0):
    res, fails = track_root(lambda k: prob(*pts[int(round(k))]), range(len(pts)), v0)
    assert not fails, f"{len(fails)} gaps"
    return res


pair = multistart_roots(prob(7.5, 0.6))[:2]
print("pair at (7.5,0.6): dS =", pair[0].S - pair[1].S)

# --- 1) continue both to the corner (7.0, 0.2)
corner_path = param_path([(7.5, 0.6), (7.0, 0.6), (7.0, 0.2)], 25)
for k, r in enumerate(pair):
    res = track_path(corner_path, r.v0)
    rc = res[-1]
    z = label(0.2)
    print(f"fam{k} at corner: v0 = {np.round(rc.v0, 4)}  F0 = "
          f"{rc.S.imag + 0.05 * z.norm_sq:.4f}  |detMvv| = {abs(rc.det_mvv):.3f}")

corner_roots = multistart_roots(prob(7.0, 0.2))
print(f"corner multistart: {len(corner_roots)} roots")
for r in corner_roots:
    print("   v0:", np.round(r.v0, 4), " F0:", round(r.S.imag + 0.05 * label(0.2).norm_sq, 4))

# --- 2) serpentine map of both families from the corner sheets
nT, nq = 21, 21
Ts = np.linspace(7.0, 8.0, nT)
qxs = np.linspace(0.2, 1.0, nq)
path = []
for j, qx in enumerate(qxs):
    rng = range(nT) if j % 2 == 0 else range(nT - 1, -1, -1)
    for i in rng:
        path.append((i, j))
pts = [(Ts[i], qxs[j]) for i, j in path]

F = np.full((2, nT, nq), np.nan)
D = np.full((2, nT, nq), np.nan)
S = np.full((2, nT, nq), np.nan + 0j, dtype=complex)
corner_v0 = []
for k, r in enumerate(pair):
    res0 = track_path(corner_path, r.v0)
    corner_v0.append(res0[-1].v0)
    res = track_path(pts, res0[-1].v0)
    for m, rr in enumerate(res):
        i, j = path[m]
        F[k, i, j] = rr.S.imag + 0.05 * label(qxs[j]).norm_sq
        D[k, i, j] = abs(rr.det_mvv)
        S[k, i, j] = rr.S
    print(f"fam{k}: F0 range [{np.nanmin(F[k]):.4f}, {np.nanmax(F[k]):.4f}], "
          f"min|det| {np.nanmin(D[k]):.3f}, neg F0 frac {np.mean(F[k] < 0):.3f}")

dS = np.abs(S[0] - S[1])
i, j = np.unravel_index(np.nanargmin(dS), dS.shape)
print(f"pair minimum |dS| on grid: {dS[i, j]:.4f} at (T={Ts[i]}, qx={qxs[j]})")

# --- 3) Moebius loop around the caustic
box = [(TSTAR - 0.15, QSTAR - 0.1), (TSTAR + 0.15, QSTAR - 0.1),
       (TSTAR + 0.15, QSTAR + 0.1), (TSTAR - 0.15, QSTAR + 0.1),
       (TSTAR - 0.15, QSTAR - 0.1)]
loop = param_path(box, 20)
start0 = track_path(param_path([(7.5, 0.6), box[0]], 30), pair[0].v0)[-1]
start1 = track_path(param_path([(7.5, 0.6), box[0]], 30), pair[1].v0)[-1]
end0 = track_path(loop, start0.v0)[-1]
print("loop around caustic:")
print("  |end0 - start0| =", np.max(np.abs(end0.v0 - start0.v0)))
print("  |end0 - start1| =", np.max(np.abs(end0.v0 - start1.v0)))

# loop not enclosing the caustic
box2 = [(7.7, 0.8), (7.9, 0.8), (7.9, 0.9), (7.7, 0.9), (7.7, 0.8)]
loop2 = param_path(box2, 20)
s0 = track_path(param_path([(7.5, 0.6), box2[0]], 30), pair[0].v0)[-1]
e0 = track_path(loop2, s0.v0)[-1]
print("loop away from caustic: |end - start| =", np.max(np.abs(e0.v0 - s0.v0)))

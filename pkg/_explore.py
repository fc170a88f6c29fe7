"""Dev exploration: root structure, caustic location, F0 signs, orbit bounds."""
import numpy as np

from scprop.hamiltonians import NelsonParams, nelson_smoothed
from scprop.phase_core import CoherentLabel, CoherentParams
from scprop.trajectory import ShootingProblem, multistart_roots, newton_shoot, track_root

CP = CoherentParams(0.2, 0.2, 0.05)
MODEL = nelson_smoothed(NelsonParams(0.1), CP)


def label(qx):
    qy = 2.0 * qx / 3.0
    pot = (qy - 0.5 * qx**2) ** 2 + 0.05 * qx**2
    pmag = np.sqrt(2.0 * (0.5 - pot))
    th = np.deg2rad(140.0)
    return CoherentLabel.from_centroid((qx, qy), (pmag * np.cos(th), pmag * np.sin(th)), CP)


def F0(res, z):
    return res.S.imag + 0.05 * z.norm_sq


# 1) roots at a reference point
z = label(0.6)
prob = ShootingProblem.for_labels(MODEL, z, z, 7.5)
roots = multistart_roots(prob)
print(f"roots at (7.5, 0.6): {len(roots)}")
for r in roots:
    print("  v0:", np.round(r.v0, 5), " detMvv:", np.round(r.det_mvv, 5),
          " F0:", round(F0(r, z), 5), " S:", np.round(r.S, 5))

# 2) continue both roots along qx = 0.58 over T in [7, 8]; find min |det Mvv|
qx = 0.58
z58 = label(qx)
Ts = np.linspace(7.0, 8.0, 81)


def fac(T):
    return ShootingProblem.for_labels(MODEL, z58, z58, T)

# seed from the (7.5, 0.6) roots continued to qx=0.58 at T=7.0
def fac_qx(q):
    zz = label(q)
    return ShootingProblem.for_labels(MODEL, zz, zz, 7.0)

for k, r0 in enumerate(roots[:2]):
    # first bring the root from T=7.5 to T=7.0 at qx=0.6, then qx -> 0.58
    resT, _ = track_root(lambda T: ShootingProblem.for_labels(MODEL, z, z, T),
                         np.linspace(7.5, 7.0, 11), r0.v0)
    resQ, _ = track_root(fac_qx, np.linspace(0.6, 0.58, 5), resT[-1].v0)
    res58, fails = track_root(fac, Ts, resQ[-1].v0)
    dets = np.array([abs(r.det_mvv) if r else np.nan for r in res58])
    f0s = np.array([F0(r, z58) if r else np.nan for r in res58])
    i = np.nanargmin(dets)
    print(f"family {k}: min |detMvv| = {dets[i]:.4f} at T = {Ts[i]:.4f}, "
          f"|detMvv|^0.5 = {np.sqrt(dets[i]):.4f}, gaps = {len(fails)}")
    print(f"   F0 range along line: [{np.nanmin(f0s):.4f}, {np.nanmax(f0s):.4f}]")

# 3) scan qx in window at the minimizing T to see where |detMvv| dips lowest
print("\ncoarse caustic hunt:")
best = (np.inf, None, None)
for qxs in np.linspace(0.5, 0.7, 11):
    zz = label(qxs)
    # continue from the known roots
    resQ, _ = track_root(lambda q: ShootingProblem.for_labels(MODEL, label(q), label(q), 7.0),
                         np.linspace(0.6, qxs, 7), resT[-1].v0 if qxs < 0.6 else roots[0].v0)
    res, _ = track_root(lambda T: ShootingProblem.for_labels(MODEL, zz, zz, T),
                        np.linspace(7.0, 8.0, 41), resQ[-1].v0)
    dets = np.array([abs(r.det_mvv) if r else np.nan for r in res])
    i = int(np.nanargmin(dets))
    print(f"  qx={qxs:.3f}: min|detMvv|={dets[i]:.5f} at T={7.0 + i * 0.025:.3f}")
    if dets[i] < best[0]:
        best = (dets[i], qxs, 7.0 + i * 0.025)
print("best:", best)

# 4) real classical orbit excursion for grid sizing
from scprop.trajectory import integrate_extended
from scprop.phase_core import uv_from_qp
import scipy.integrate as si

for qx0 in (0.2, 0.6, 1.0):
    zz = label(qx0)
    qbar, pbar = zz.centroid(CP)

    def rhs(t, y):
        qx_, qy_, px_, py_ = y
        dvx = -2.0 * qx_ * qy_ + qx_**3 + 0.1 * qx_
        dvy = 2.0 * (qy_ - 0.5 * qx_**2)
        return [px_, py_, -dvx, -dvy]

    sol = si.solve_ivp(rhs, (0, 8.0), [*qbar, *pbar], rtol=1e-10, atol=1e-12, dense_output=True)
    ts = np.linspace(0, 8, 2000)
    qs = sol.sol(ts)[:2]
    print(f"qx0={qx0}: max|qx|={np.max(np.abs(qs[0])):.3f}  max|qy|={np.max(np.abs(qs[1])):.3f} "
          f" qy range [{qs[1].min():.3f},{qs[1].max():.3f}] qx range [{qs[0].min():.3f},{qs[0].max():.3f}]")

"""Dev exploration #3: locate the coalescence of the near-degenerate pair."""
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


def prob(T, qx, tol=1e-12):
    z = label(qx)
    return ShootingProblem.for_labels(MODEL, z, z, T, tol_ode=tol)


roots = multistart_roots(prob(7.5, 0.6))
r_a, r_b = roots[0], roots[1]
print("start pair dS:", r_a.S - r_b.S)


def solve_pair(T, qx, va, vb, tol=1e-12):
    ra = newton_shoot(prob(T, qx, tol), va)
    rb = newton_shoot(prob(T, qx, tol), vb)
    return ra, rb


def dS(T, qx, va, vb, tol=1e-12):
    ra, rb = solve_pair(T, qx, va, vb, tol)
    return ra.S - rb.S, ra, rb


# 2D Newton on (Re dS, Im dS) over (T, qx) with FD Jacobian
T, qx = 7.5, 0.6
va, vb = r_a.v0, r_b.v0
h = 1e-4
for it in range(30):
    f0, ra, rb = dS(T, qx, va, vb)
    va, vb = ra.v0, rb.v0
    print(f"it {it}: (T,qx)=({T:.6f},{qx:.6f}) dS={f0:.3e} "
          f"|detA|={abs(ra.det_mvv):.4f} |detB|={abs(rb.det_mvv):.4f} "
          f"v0dist={np.max(np.abs(va - vb)):.4f}")
    if abs(f0) < 2e-12:
        break
    fT, _, _ = dS(T + h, qx, va, vb)
    fQ, _, _ = dS(T, qx + h, va, vb)
    J = np.array([[(fT.real - f0.real) / h, (fQ.real - f0.real) / h],
                  [(fT.imag - f0.imag) / h, (fQ.imag - f0.imag) / h]])
    dx = np.linalg.solve(J, -np.array([f0.real, f0.imag]))
    step = np.linalg.norm(dx)
    if step > 0.1:
        dx *= 0.1 / step
    T += dx[0]
    qx += dx[1]

absB = (15.0 * abs(f0)) ** (2.0 / 3.0)
print(f"\ncaustic near (T*, qx*) = ({T:.6f}, {qx:.6f}), |dS|={abs(f0):.3e}, |B|={absB:.3e}")
print(f"dets there: {abs(ra.det_mvv):.5f}, {abs(rb.det_mvv):.5f}; v0 dist {np.max(np.abs(va-vb)):.5f}")
print(f"F0 a,b: {ra.S.imag + 0.05*label(qx).norm_sq:.5f}, {rb.S.imag + 0.05*label(qx).norm_sq:.5f}")

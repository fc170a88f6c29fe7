"""Dev exploration #4: caustic location without the smoothing width correction."""
import numpy as np

from scprop.hamiltonians import NelsonParams, NelsonSmoothed, nelson_smoothed
from scprop.phase_core import CoherentLabel, CoherentParams
from scprop.trajectory import ShootingProblem, multistart_roots, newton_shoot


class NelsonBare(NelsonSmoothed):
    """Bare classical Nelson in (u,v): no width correction, no constant."""

    def __init__(self, params, cp):
        super().__init__(params, cp)
        self.sx = 0.0
        self.C0 = 0.0
        self.kernel_params = np.array(
            [cp.hbar, cp.b_x, cp.b_y, cp.c_x, cp.c_y, self.mu, 0.0, 0.0]
        )


CP = CoherentParams(0.2, 0.2, 0.05)


def run(model, tag):
    def label(qx):
        qy = 2.0 * qx / 3.0
        pot = (qy - 0.5 * qx**2) ** 2 + 0.05 * qx**2
        pmag = np.sqrt(2.0 * (0.5 - pot))
        th = np.deg2rad(140.0)
        return CoherentLabel.from_centroid((qx, qy), (pmag * np.cos(th), pmag * np.sin(th)), CP)

    def prob(T, qx):
        z = label(qx)
        return ShootingProblem.for_labels(model, z, z, T)

    roots = multistart_roots(prob(7.5, 0.6))
    va, vb = roots[0].v0, roots[1].v0
    T, qx = 7.5, 0.6
    h = 1e-5
    f0 = None
    for it in range(40):
        ra = newton_shoot(prob(T, qx), va)
        rb = newton_shoot(prob(T, qx), vb)
        va, vb = ra.v0, rb.v0
        f0 = ra.S - rb.S
        if abs(f0) < 1e-11:
            break
        fT = newton_shoot(prob(T + h, qx), va).S - newton_shoot(prob(T + h, qx), vb).S
        fQ = newton_shoot(prob(T, qx + h), va).S - newton_shoot(prob(T, qx + h), vb).S
        J = np.array([[(fT.real - f0.real) / h, (fQ.real - f0.real) / h],
                      [(fT.imag - f0.imag) / h, (fQ.imag - f0.imag) / h]])
        dx = np.linalg.solve(J, -np.array([f0.real, f0.imag]))
        n = np.linalg.norm(dx)
        if n > 0.05:
            dx *= 0.05 / n
        T += dx[0]; qx += dx[1]
    print(f"{tag}: caustic at (T*, qx*) = ({T:.6f}, {qx:.6f}), |dS| = {abs(f0):.2e}")


run(nelson_smoothed(NelsonParams(0.1), CP), "smoothed (with width corr)")
run(NelsonBare(NelsonParams(0.1), CP), "bare classical")

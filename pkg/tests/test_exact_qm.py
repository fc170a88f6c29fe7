import numpy as np
import pytest

from scprop.exact_qm import (
    GridSpec,
    GridTooSmall,
    WaveField,
    coherent_wavefunction,
    k_exact,
    propagate,
    propagate_snapshots,
)
from scprop.phase_core import CoherentLabel, CoherentParams, overlap

CP = CoherentParams(b_x=0.2, b_y=0.2, hbar=0.05)
GS = GridSpec(extent_x=(-3.0, 3.0), extent_y=(-3.0, 3.0), n_x=128, n_y=128, dt=1e-3)


def nelson_potential(qx, qy, mu=0.1):
    return (qy - 0.5 * qx**2) ** 2 + 0.5 * mu * qx**2


def test_vacuum_state_properties():
    wf = coherent_wavefunction(CoherentLabel(0.0, 0.0), CP, GS)
    assert abs(wf.norm - 1.0) < 1e-8
    # centroid on the grid
    X = GS.x[:, None]
    qx_mean = float(np.sum(X * np.abs(wf.psi) ** 2) * GS.dA)
    assert abs(qx_mean) < 1e-8


def test_grid_centroid_matches_label():
    z = CoherentLabel.from_centroid((0.4, -0.3), (0.8, 0.5), CP)
    wf = coherent_wavefunction(z, CP, GS)
    X, Y = GS.x[:, None], GS.y[None, :]
    rho = np.abs(wf.psi) ** 2
    qx_mean = float(np.sum(X * rho) * GS.dA)
    qy_mean = float(np.sum(Y * rho) * GS.dA)
    assert abs(qx_mean - 0.4) < 1e-8
    assert abs(qy_mean + 0.3) < 1e-8


def test_sampled_overlap_matches_analytic():
    rng = np.random.default_rng(3)
    for _ in range(5):
        q1, p1 = rng.uniform(-0.6, 0.6, 2), rng.uniform(-0.8, 0.8, 2)
        q2, p2 = rng.uniform(-0.6, 0.6, 2), rng.uniform(-0.8, 0.8, 2)
        z1 = CoherentLabel.from_centroid(q1, p1, CP)
        z2 = CoherentLabel.from_centroid(q2, p2, CP)
        w1 = coherent_wavefunction(z1, CP, GS)
        w2 = coherent_wavefunction(z2, CP, GS)
        assert abs(w2.overlap(w1) - overlap(z1, z2)) < 1e-8


def test_tail_outside_box_rejected():
    z = CoherentLabel.from_centroid((2.5, 0.0), (0.0, 0.0), CP)
    with pytest.raises(GridTooSmall):
        coherent_wavefunction(z, CP, GS)


def test_spacing_validation():
    coarse = GridSpec(extent_x=(-4, 4), extent_y=(-4, 4), n_x=64, n_y=64)
    with pytest.raises(ValueError):
        coherent_wavefunction(CoherentLabel(0.0, 0.0), CP, coarse)


def free_gaussian_1d(q, t, q0, p0, b, hbar):
    """Free evolution of the sampled Gaussian via the exact kernel integral.

    psi0(q') = (pi b^2)^{-1/4} exp[-a(q'-q0)^2 + i b_lin (q'-q0) + i c0]
    with a = 1/(2 b^2), b_lin = p0/hbar, c0 = p0 q0/(2 hbar); the Gaussian
    integral against the free kernel gives, with xi = q - q0,
    alpha = a - i/(2 hbar t) and beta = i (b_lin - xi/(hbar t)),

        psi = (pi b^2)^{-1/4} (1 + i hbar t / b^2)^{-1/2}
              exp[i c0 + i xi^2/(2 hbar t) + beta^2/(4 alpha)].
    """
    a = 1.0 / (2 * b * b)
    xi = q - q0
    alpha = a - 1j / (2 * hbar * t)
    beta = 1j * (p0 / hbar - xi / (hbar * t))
    pref = (np.pi * b * b) ** -0.25 / np.sqrt(1 + 1j * hbar * t / (b * b))
    c0 = p0 * q0 / (2 * hbar)
    return pref * np.exp(1j * c0 + 1j * xi**2 / (2 * hbar * t) + beta**2 / (4 * alpha))


def test_free_particle_spreading_matches_closed_form():
    z = CoherentLabel.from_centroid((0.2, -0.1), (0.6, -0.4), CP)
    wf = coherent_wavefunction(z, CP, GS)
    T = 0.8
    out = propagate(wf, lambda qx, qy: 0.0 * qx * qy, T, GS, CP.hbar)
    qbar, pbar = z.centroid(CP)
    ref = np.outer(
        free_gaussian_1d(GS.x, T, qbar[0], pbar[0], CP.b_x, CP.hbar),
        free_gaussian_1d(GS.y, T, qbar[1], pbar[1], CP.b_y, CP.hbar),
    )
    assert np.max(np.abs(out.psi - ref)) < 1e-6


def test_harmonic_coherent_state_stays_coherent():
    # matched widths: omega = hbar / b^2 = 1.25
    w = CP.hbar / CP.b_x**2
    z = CoherentLabel.from_centroid((0.35, 0.0), (0.0, -0.5), CP)
    wf = coherent_wavefunction(z, CP, GS)
    T = 1.7
    out = propagate(wf, lambda qx, qy: 0.5 * w * w * (qx**2 + qy**2), T, GS, CP.hbar)
    zt = CoherentLabel(z.z_x * np.exp(-1j * w * T), z.z_y * np.exp(-1j * w * T))
    bra = coherent_wavefunction(zt, CP, GS)
    assert abs(abs(bra.overlap(out)) - 1.0) < 1e-6


def test_norm_conserved_under_nelson():
    z = CoherentLabel.from_centroid((0.6, 0.4), (-0.7, 0.6), CP)
    wf = coherent_wavefunction(z, CP, GS)
    out = propagate(wf, nelson_potential, 2.0, GS, CP.hbar)
    assert abs(out.norm - 1.0) < 1e-8


def test_zero_time_returns_overlap():
    z1 = CoherentLabel.from_centroid((0.3, 0.2), (0.5, -0.1), CP)
    z2 = CoherentLabel.from_centroid((0.1, -0.2), (0.2, 0.4), CP)
    val = k_exact(z1, z2, 0.0, CP, GS, nelson_potential)
    assert abs(val - overlap(z1, z2)) < 1e-8


def test_second_order_time_step_convergence():
    # halving dt must shrink the Strang error by ~4x
    z = CoherentLabel.from_centroid((0.5, 0.3), (-0.6, 0.5), CP)
    wf = coherent_wavefunction(z, CP, GS)
    T = 0.5

    def run(dt):
        gs = GridSpec(GS.extent_x, GS.extent_y, GS.n_x, GS.n_y, dt)
        return propagate(WaveField(wf.psi.copy(), gs), nelson_potential, T, gs, CP.hbar)

    fine = run(0.25e-3).psi
    e1 = np.max(np.abs(run(4e-3).psi - fine))
    e2 = np.max(np.abs(run(2e-3).psi - fine))
    assert e1 / e2 > 3.0


def test_snapshot_harvest_matches_direct_propagation():
    z = CoherentLabel.from_centroid((0.4, 0.25), (-0.5, 0.45), CP)
    wf = coherent_wavefunction(z, CP, GS)
    bra = coherent_wavefunction(z, CP, GS)
    times = np.array([0.5, 1.0, 1.5])
    ov, norms = propagate_snapshots(wf, nelson_potential, times, GS, CP.hbar, bra)
    for t, o in zip(times, ov):
        direct = bra.overlap(propagate(wf, nelson_potential, float(t), GS, CP.hbar))
        assert abs(o - direct) < 1e-7
    assert np.all(np.abs(norms - 1.0) < 1e-8)

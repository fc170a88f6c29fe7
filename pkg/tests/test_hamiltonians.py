import numpy as np
import pytest
from scipy.special import roots_hermite

from scprop.hamiltonians import (
    HarmonicSmoothed,
    NelsonParams,
    NelsonSmoothed,
    harmonic_smoothed,
    nelson_smoothed,
)
from scprop.phase_core import CoherentParams, PhasePointUV, uv_from_qp

CP = CoherentParams(b_x=0.2, b_y=0.2, hbar=0.05)
NELSON = nelson_smoothed(NelsonParams(mu=0.1), CP)


def gauss_expectation_oracle(model: NelsonSmoothed, qbar, pbar, n=24):
    """Numerical <z|H|z> for the Nelson operator at a real centroid.

    Potential terms are integrated against the position-space Gaussian
    |psi(q)|^2 (widths b_r/sqrt(2)) with tensor Gauss-Hermite quadrature,
    which is exact for polynomials; the kinetic term uses the momentum-space
    Gaussian the same way.  Independent of the model's own C0 derivation.
    """
    cp = model.cp
    x, w = roots_hermite(n)
    wx = w / np.sqrt(np.pi)
    qx = qbar[0] + cp.b_x * x
    qy = qbar[1] + cp.b_y * x
    QX, QY = np.meshgrid(qx, qy, indexing="ij")
    V = (QY - 0.5 * QX**2) ** 2 + 0.5 * model.mu * QX**2
    pot = np.einsum("i,j,ij->", wx, wx, V)
    px = pbar[0] + cp.c_x * x
    py = pbar[1] + cp.c_y * x
    kin = 0.5 * (wx @ px**2 + wx @ py**2)
    return kin + pot


def test_zero_point_constant_matches_quadrature():
    # frozen from the Gaussian-moment derivation at b=0.2, c=0.25, mu=0.1:
    # C0 = b^2/2 + 3 b^4/16 + mu b^2/4 + c^2/2 = 0.05255
    val = NELSON.value(uv_from_qp((0.0, 0.0), (0.0, 0.0), CP))
    assert val == pytest.approx(0.05255, abs=1e-15)
    assert val.real == pytest.approx(gauss_expectation_oracle(NELSON, (0, 0), (0, 0)), rel=1e-13)


def test_value_matches_quadrature_at_random_real_centroids():
    rng = np.random.default_rng(2)
    for _ in range(50):
        qbar = rng.uniform(-1.5, 1.5, size=2)
        pbar = rng.uniform(-1.5, 1.5, size=2)
        pt = uv_from_qp(qbar, pbar, CP)
        got = NELSON.value(pt)
        want = gauss_expectation_oracle(NELSON, qbar, pbar)
        assert got.imag == pytest.approx(0.0, abs=1e-12)
        assert got.real == pytest.approx(want, rel=1e-12)


def test_smoothing_correction_decomposition():
    # smoothed value = classical value + s_x (3 q_x^2/2 - q_y) + C0
    rng = np.random.default_rng(8)
    for _ in range(50):
        qbar = rng.uniform(-2, 2, size=2)
        pbar = rng.uniform(-2, 2, size=2)
        classical = 0.5 * pbar @ pbar + NELSON.potential_bare(*qbar)
        corr = NELSON.sx * (1.5 * qbar[0] ** 2 - qbar[1])
        got = NELSON.value(uv_from_qp(qbar, pbar, CP))
        assert got.real == pytest.approx(classical + corr + NELSON.C0, rel=1e-12, abs=1e-14)


def _fd_grad(f, pt, h=1e-6):
    """Central finite differences in each complex coordinate (holomorphic)."""
    base = np.array([pt.u_x, pt.u_y, pt.v_x, pt.v_y], dtype=np.complex128)
    out = np.zeros(4, dtype=np.complex128)
    for k in range(4):
        up = base.copy()
        dn = base.copy()
        up[k] += h
        dn[k] -= h
        out[k] = (f(PhasePointUV(*up)) - f(PhasePointUV(*dn))) / (2 * h)
    return out


@pytest.mark.parametrize("model", [NELSON, harmonic_smoothed(1.25, 1.25, CP)])
def test_gradients_match_finite_differences(model):
    rng = np.random.default_rng(4)
    for _ in range(20):
        pt = PhasePointUV(*(rng.normal(size=4) + 1j * rng.normal(size=4)))
        fd = _fd_grad(model.value, pt)
        gu = model.grad_u(pt)
        gv = model.grad_v(pt)
        scale = max(1.0, np.max(np.abs(fd)))
        assert np.max(np.abs(np.concatenate([gu, gv]) - fd)) / scale < 1e-6


@pytest.mark.parametrize("model", [NELSON, harmonic_smoothed(1.25, 1.25, CP)])
def test_hessian_matches_finite_differences(model):
    rng = np.random.default_rng(9)
    for _ in range(20):
        pt = PhasePointUV(*(rng.normal(size=4) + 1j * rng.normal(size=4)))
        huu, huv, hvu, hvv = model.hess(pt)
        H = np.block([[huu, huv], [hvu, hvv]])

        def grad4(p):
            return np.concatenate([model.grad_u(p), model.grad_v(p)])

        base = np.array([pt.u_x, pt.u_y, pt.v_x, pt.v_y], dtype=np.complex128)
        fd = np.zeros((4, 4), dtype=np.complex128)
        h = 1e-6
        for k in range(4):
            up, dn = base.copy(), base.copy()
            up[k] += h
            dn[k] -= h
            fd[:, k] = (grad4(PhasePointUV(*up)) - grad4(PhasePointUV(*dn))) / (2 * h)
        # fd[:, k] = d grad / d x_k; H rows are d/dx_row of grad components:
        # H[r, s] as built is d^2 H/(d x_r d x_s) with x = (u_x,u_y,v_x,v_y)
        scale = max(1.0, np.max(np.abs(fd)))
        assert np.max(np.abs(H - fd)) / scale < 1e-6


def test_mixed_hessian_symmetry():
    rng = np.random.default_rng(13)
    for _ in range(10):
        pt = PhasePointUV(*(rng.normal(size=4) + 1j * rng.normal(size=4)))
        _, huv, hvu, _ = NELSON.hess(pt)
        assert np.max(np.abs(huv - hvu.T)) < 1e-10


def test_harmonic_zero_point_and_hessian():
    model = harmonic_smoothed(1.25, 1.25, CP)
    v0 = model.value(PhasePointUV(0, 0, 0, 0))
    assert v0 == pytest.approx(CP.hbar * (1.25 + 1.25) / 2, rel=1e-15)
    huu, huv, hvu, hvv = model.hess(PhasePointUV(0.3 + 1j, -0.2, 0.4, 0.9j))
    assert np.allclose(huv, np.diag([CP.hbar * 1.25, CP.hbar * 1.25]))
    assert np.all(huu == 0) and np.all(hvv == 0)


def test_harmonic_rejects_unmatched_widths():
    with pytest.raises(ValueError):
        harmonic_smoothed(1.0, 1.0, CP)  # b=0.2 matches omega=1.25, not 1.0


def test_nelson_params_validation():
    with pytest.raises(ValueError):
        NelsonParams(mu=-0.5)

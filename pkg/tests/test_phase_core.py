import numpy as np
import pytest

from scprop.phase_core import (
    CoherentLabel,
    CoherentParams,
    overlap,
    qp_from_uv,
    uv_from_qp,
)

CP = CoherentParams(b_x=0.2, b_y=0.2, hbar=0.05)


def test_width_product_is_hbar():
    for cp in [CP, CoherentParams(0.31, 0.17, 1.0)]:
        assert cp.b_x * cp.c_x == cp.hbar
        assert cp.b_y * cp.c_y == cp.hbar


def test_invalid_params_rejected():
    with pytest.raises(ValueError):
        CoherentParams(b_x=-0.1, b_y=0.2, hbar=0.05)
    with pytest.raises(ValueError):
        CoherentParams(b_x=0.2, b_y=0.0, hbar=0.05)
    with pytest.raises(ValueError):
        CoherentParams(b_x=0.2, b_y=0.2, hbar=0.0)


def test_uv_zero_case():
    pt = uv_from_qp((0.0, 0.0), (0.0, 0.0), CP)
    assert pt.u_x == 0 and pt.u_y == 0 and pt.v_x == 0 and pt.v_y == 0


def test_uv_direct_evaluation():
    # q_x = b_x*sqrt(2) with zero momentum gives u = v = (1, 0)
    pt = uv_from_qp((CP.b_x * np.sqrt(2.0), 0.0), (0.0, 0.0), CP)
    assert abs(pt.u_x - 1.0) < 1e-15
    assert abs(pt.v_x - 1.0) < 1e-15
    assert pt.u_y == 0 and pt.v_y == 0


def test_qp_direct_evaluation():
    from scprop.phase_core import PhasePointUV

    q, p = qp_from_uv(PhasePointUV(1.0, 0.0, 1.0, 0.0), CP)
    assert abs(q[0] - CP.b_x * np.sqrt(2.0)) < 1e-15
    assert abs(p[0]) < 1e-15
    # u = (i, 0), v = (-i, 0): q = 0 and p_x = c_x*sqrt(2)
    q, p = qp_from_uv(PhasePointUV(1j, 0.0, -1j, 0.0), CP)
    assert abs(q[0]) < 1e-15
    assert abs(p[0] - CP.c_x * np.sqrt(2.0)) < 1e-15
    assert abs(p[1]) < 1e-15


def test_random_complex_roundtrip():
    rng = np.random.default_rng(11)
    for _ in range(100):
        q = rng.normal(size=2) + 1j * rng.normal(size=2)
        p = rng.normal(size=2) + 1j * rng.normal(size=2)
        pt = uv_from_qp(q, p, CP)
        q2, p2 = qp_from_uv(pt, CP)
        assert np.max(np.abs(q2 - q)) < 1e-14 * max(1.0, np.max(np.abs(q)))
        assert np.max(np.abs(p2 - p)) < 1e-14 * max(1.0, np.max(np.abs(p)))


def test_real_points_give_conjugate_pair():
    rng = np.random.default_rng(5)
    for _ in range(25):
        q = rng.normal(size=2)
        p = rng.normal(size=2)
        pt = uv_from_qp(q, p, CP)
        assert np.allclose(pt.v, np.conj(pt.u), rtol=0, atol=1e-15)


def test_label_centroid_roundtrip():
    rng = np.random.default_rng(3)
    for _ in range(100):
        qbar = rng.normal(size=2) * 2.0
        pbar = rng.normal(size=2) * 2.0
        lab = CoherentLabel.from_centroid(qbar, pbar, CP)
        q2, p2 = lab.centroid(CP)
        assert np.max(np.abs(q2 - qbar)) < 1e-14 * max(1.0, np.max(np.abs(qbar)))
        assert np.max(np.abs(p2 - pbar)) < 1e-14 * max(1.0, np.max(np.abs(pbar)))


def test_overlap_self_is_one():
    lab = CoherentLabel(0.7 - 0.2j, 1.1 + 0.4j)
    assert overlap(lab, lab) == pytest.approx(1.0, abs=1e-15)


def test_overlap_vacuum():
    a = 0.8 + 0.3j
    val = overlap(CoherentLabel(0.0, 0.0), CoherentLabel(a, 0.0))
    assert abs(val) == pytest.approx(np.exp(-0.5 * abs(a) ** 2), rel=1e-14)


def test_overlap_bounded_by_one():
    rng = np.random.default_rng(17)
    for _ in range(100):
        z1 = CoherentLabel(*(rng.normal(size=2) + 1j * rng.normal(size=2)))
        z2 = CoherentLabel(*(rng.normal(size=2) + 1j * rng.normal(size=2)))
        assert abs(overlap(z1, z2)) <= 1.0 + 1e-12

import numpy as np
import pytest

from scprop.hamiltonians import (
    NelsonParams,
    harmonic_coherent_propagator,
    harmonic_smoothed,
    nelson_smoothed,
)
from scprop.phase_core import CoherentLabel, CoherentParams, overlap
from scprop.semiclassical import (
    CausticSingular,
    Contribution,
    EmptyContributionSet,
    k2_combine,
    k2_single,
    stokes_filter,
)
from scprop.trajectory import ShootingProblem, newton_shoot

CP = CoherentParams(b_x=0.2, b_y=0.2, hbar=0.05)
WX, WY = 1.25, 1.25
HARM = harmonic_smoothed(WX, WY, CP)
NELSON = nelson_smoothed(NelsonParams(0.1), CP)


def shoot_harmonic(z1, z2, T):
    prob = ShootingProblem.for_labels(HARM, z1, z2, T)
    w = np.array([WX, WY])
    return newton_shoot(prob, np.conj(z2.z) * np.exp(-1j * w * T))


def test_zero_time_limit_reproduces_overlap_modulus():
    # at T -> 0 the value approaches <z|z> = 1; the residual linear-in-T
    # deviation is the evolution phase, so the check is modulus-level
    z = CoherentLabel(0.8 - 0.5j, 0.4 + 1.1j)
    res = newton_shoot(ShootingProblem.for_labels(NELSON, z, z, 1e-6), np.conj(z.z))
    c = k2_single(res, z, z)
    assert abs(abs(c.value) - abs(overlap(z, z))) < 1e-6
    assert abs(c.F0) < 1e-6


def test_harmonic_exactness_against_analytic_propagator():
    rng = np.random.default_rng(12)
    for _ in range(20):
        z1 = CoherentLabel(*(rng.normal(size=2) + 1j * rng.normal(size=2)))
        z2 = CoherentLabel(*(rng.normal(size=2) + 1j * rng.normal(size=2)))
        T = rng.uniform(0.1, 10.0)
        c = k2_single(shoot_harmonic(z1, z2, T), z1, z2)
        want = harmonic_coherent_propagator(z1, z2, T, WX, WY)
        assert abs(c.value - want) < 1e-8


def test_harmonic_modulus_bounded():
    rng = np.random.default_rng(44)
    for _ in range(20):
        z1 = CoherentLabel(*(rng.normal(size=2) + 1j * rng.normal(size=2)))
        z2 = CoherentLabel(*(rng.normal(size=2) + 1j * rng.normal(size=2)))
        T = rng.uniform(0.1, 10.0)
        c = k2_single(shoot_harmonic(z1, z2, T), z1, z2)
        assert abs(c.value) <= 1.0 + 1e-9


def test_prefactor_branch_continuous_in_time():
    # winding of det M_vv(t) = exp(i (wx+wy) t) crosses the principal cut;
    # the time-tracked prefactor must follow exp(-i (wx+wy) T / 2) smoothly
    z = CoherentLabel(0.4 + 0.2j, -0.1 + 0.6j)
    for T in np.linspace(0.2, 9.0, 25):
        c = k2_single(shoot_harmonic(z, z, T), z, z)
        want = np.exp(-0.5j * (WX + WY) * T)
        assert abs(c.prefactor - want) < 1e-8


def test_prefactor_square_inverts_det():
    z = CoherentLabel(0.5, 0.3 - 0.2j)
    c = k2_single(shoot_harmonic(z, z, 4.0), z, z)
    assert abs(c.prefactor**2 * c.det_mvv - 1.0) < 1e-10


def test_neighbor_branch_override():
    z = CoherentLabel(0.5, 0.3 - 0.2j)
    res = shoot_harmonic(z, z, 4.0)
    c = k2_single(res, z, z)
    flipped = Contribution(**{**c.__dict__, "prefactor": -c.prefactor})
    c2 = k2_single(res, z, z, prev=flipped)
    assert abs(c2.prefactor + c.prefactor) < 1e-12


def test_norm_factor_formula():
    z1 = CoherentLabel(1.0 + 2.0j, -0.5j)
    z2 = CoherentLabel(0.0, 0.25)
    c = k2_single(shoot_harmonic(z1, z2, 1.0), z1, z2)
    assert c.norm_N == pytest.approx(np.exp(-0.5 * (z1.norm_sq + z2.norm_sq)), rel=1e-14)


def test_caustic_guard():
    z = CoherentLabel(0.5, 0.3)
    res = shoot_harmonic(z, z, 2.0)
    res.det_mvv = 1e-13
    with pytest.raises(CausticSingular):
        k2_single(res, z, z)


def _contrib(F0, value, included=True):
    return Contribution(S=0j, G=0j, det_mvv=1.0, prefactor=1.0, norm_N=1.0,
                        F0=F0, value=value, included=included)


def test_stokes_filter_rules():
    assert stokes_filter(_contrib(0.2, 1.0)).included
    assert stokes_filter(_contrib(0.0, 1.0)).included  # boundary case kept
    assert not stokes_filter(_contrib(-0.1, 1.0)).included
    assert stokes_filter(_contrib(-1e-13, 1.0)).included  # inside epsilon band


def test_combine_singleton_and_exclusion():
    a = _contrib(0.01, 0.3 + 0.1j)
    b = stokes_filter(_contrib(-0.2, 5.0 + 0j))
    assert k2_combine([a, b]) == a.value
    with pytest.raises(EmptyContributionSet):
        k2_combine([stokes_filter(_contrib(-0.2, 5.0))])


def test_combine_continuity_selection():
    a = _contrib(0.01, 0.30 + 0.0j)
    b = _contrib(0.05, 0.10 + 0.0j)
    # neighbors say ~0.3: dominant alone is closer than the 0.4 sum
    assert k2_combine([a, b], neighbor_abs=[0.31, 0.29]) == a.value
    # neighbors say ~0.4: keep the full sum
    assert k2_combine([a, b], neighbor_abs=[0.41]) == a.value + b.value
    # tie goes to fewer trajectories
    assert k2_combine([a, b], neighbor_abs=[0.35]) == a.value
    # no context, both included: full sum
    assert k2_combine([a, b]) == a.value + b.value


def test_excluding_one_leaves_others_unchanged():
    a = _contrib(0.01, 0.3 + 0.1j)
    b = _contrib(-0.3, 2.0 - 1.0j)
    before = k2_combine([a, stokes_filter(b)])
    assert before == a.value

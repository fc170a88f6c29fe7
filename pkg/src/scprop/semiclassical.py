"""Quadratic semiclassical propagator: contributions, Stokes filter, combination.

Each converged trajectory yields one contribution ``N P exp[(i/hbar)(S+G)]``
where ``N = exp(-|z'|^2/2 - |z''|^2/2)`` and ``P = sqrt(1/det M_vv)``.  The
square-root branch of ``P`` is fixed by continuation in time of
``det M_vv(t)`` from 1 at t = 0 (the integrator tracks the winding), with an
optional cross-check against a neighboring contribution.  Spurious
contributions are flagged by the sign of the leading exponent
``F0 = Im S - hbar ln N``; the final field further excludes contributions
by a continuity rule against already-resolved neighbors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .phase_core import CoherentLabel
from .trajectory import TrajectoryResult


class CausticSingular(RuntimeError):
    """det M_vv is numerically zero; use the uniform formula instead."""


class EmptyContributionSet(RuntimeError):
    """All contributions at a point were excluded."""


@dataclass(frozen=True)
class Contribution:
    """Per-trajectory semiclassical data entering the propagator sum."""

    S: complex
    G: complex
    det_mvv: complex
    prefactor: complex
    norm_N: float
    F0: float
    value: complex
    included: bool = True
    family: str = "?"


def k2_single(
    tr: TrajectoryResult,
    z_prime: CoherentLabel,
    z_dprime: CoherentLabel,
    prev: Contribution | None = None,
    caustic_guard: float = 1e-12,
) -> Contribution:
    """One trajectory's contribution to the quadratic propagator.

    The prefactor branch comes from the time-continued argument of
    ``det M_vv``; when ``prev`` is supplied the root closer to
    ``prev.prefactor`` is chosen instead (grid-neighbor continuity).
    Raises :class:`CausticSingular` when ``|det M_vv| < caustic_guard``.
    """
    det = tr.det_mvv
    if abs(det) < caustic_guard:
        raise CausticSingular(f"|det M_vv| = {abs(det):.3e}")
    hbar = tr.hbar

    prefactor = abs(det) ** -0.5 * np.exp(-0.5j * tr.det_mvv_arg)
    if prev is not None:
        if abs(-prefactor - prev.prefactor) < abs(prefactor - prev.prefactor):
            prefactor = -prefactor

    nsq = z_prime.norm_sq + z_dprime.norm_sq
    norm_N = math.exp(-0.5 * nsq)
    F0 = tr.S.imag + 0.5 * hbar * nsq

    expo = 1j * (tr.S + tr.G) / hbar
    value = norm_N * prefactor * np.exp(complex(min(expo.real, 700.0), expo.imag) * 1.0)
    return Contribution(
        S=tr.S, G=tr.G, det_mvv=det, prefactor=complex(prefactor),
        norm_N=norm_N, F0=float(F0), value=complex(value),
    )


def stokes_filter(c: Contribution, eps_stokes: float = 1e-12) -> Contribution:
    """Flag a contribution as excluded when its leading exponent is negative.

    A negative ``F0`` would give the contribution a weight ``exp(-F0/hbar)``
    exceeding physical bounds in the small-hbar limit, so it marks a
    spurious trajectory.
    """
    return replace(c, included=bool(c.F0 >= -eps_stokes))


def k2_combine(contribs, neighbor_abs=()) -> complex:
    """Combine included contributions at one point, honoring continuity.

    Candidates are the full sum of included contributions and each single
    included contribution alone; with resolved neighbor magnitudes supplied,
    the candidate whose magnitude is closest to their mean wins, ties going
    to fewer trajectories.  Grown outward from a region where one family is
    excluded on physical grounds, this reproduces the hysteresis of the
    continuity rule: the single-family choice propagates even where the
    other family's exponent would readmit it.  Without neighbor context the
    full sum is returned.
    """
    pool = [c for c in contribs if c.included]
    if not pool:
        raise EmptyContributionSet("all contributions excluded at this point")
    full = sum(c.value for c in pool)
    if len(pool) == 1:
        return complex(full)
    neighbor_abs = [x for x in neighbor_abs if np.isfinite(x)]
    if not neighbor_abs:
        return complex(full)
    target = float(np.mean(neighbor_abs))
    candidates = [c.value for c in pool] + [full]
    dists = [abs(abs(v) - target) for v in candidates]
    return complex(candidates[int(np.argmin(dists))])

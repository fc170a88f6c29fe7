"""Complex trajectories: extended integration, Newton shooting, continuation.

The complexified Hamilton equations ``du/dt = -(i/hbar) dH/dv``,
``dv/dt = (i/hbar) dH/du`` are integrated together with the monodromy
matrix, the action integrand and the half-trace of the mixed Hessian in one
extended state, so every accumulated quantity is consistent with the same
adaptive step sequence.  The mixed boundary-value problem ``u(0) = z'``,
``v(T) = conj(z'')`` is solved by damped Newton iteration on ``v(0)`` with
the exact Jacobian ``M_vv`` taken from the variational integration.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .hamiltonians import HamiltonianModel
from .phase_core import CoherentLabel, PhasePointUV
from ._rk import (
    STATUS_ESCAPE,
    STATUS_MAX_STEPS,
    STATUS_OK,
    STATUS_UNDERFLOW,
    _dp45_kernel,
    _dp45_python,
)


class StepFailure(RuntimeError):
    """The adaptive step controller failed (underflow, escape or budget)."""


class NoConvergence(RuntimeError):
    """Newton shooting did not reach the residual tolerance."""


class SingularJacobian(RuntimeError):
    """det M_vv collapsed during iteration; the seed is caustic-adjacent."""


class FamilyLost(RuntimeError):
    """Continuation lost a root even after sub-step refinement."""


@dataclass
class ExtendedState:
    """Final extended state of one integration, plus initial data."""

    u0: np.ndarray
    v0: np.ndarray
    u: np.ndarray
    v: np.ndarray
    M: np.ndarray
    s_integral: complex
    g: complex
    det_mvv_arg: float
    n_steps: int
    T: float
    hbar: float
    energy_drift: float = 0.0

    @property
    def M_uu(self):
        return self.M[0:2, 0:2]

    @property
    def M_uv(self):
        return self.M[0:2, 2:4]

    @property
    def M_vu(self):
        return self.M[2:4, 0:2]

    @property
    def M_vv(self):
        return self.M[2:4, 2:4]

    @property
    def det_mvv(self) -> complex:
        m = self.M_vv
        return complex(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])


@dataclass(eq=False)
class ShootingProblem:
    """Two-point boundary data for one contributing trajectory.

    ``u(0)`` is pinned to ``z_prime``; the Newton unknown is ``v(0)`` and the
    residual is ``v(T) - z_dprime_star``.
    """

    model: HamiltonianModel
    z_prime: CoherentLabel
    z_dprime_star: np.ndarray
    T: float
    tol_shoot: float = 1e-10
    tol_ode: float = 1e-12
    max_newton: int = 50
    max_backtracks: int = 8
    max_steps: int = 1_000_000

    def __post_init__(self):
        if not self.T > 0.0:
            raise ValueError("shooting requires T > 0")
        self.z_dprime_star = np.asarray(self.z_dprime_star, dtype=np.complex128)

    @classmethod
    def for_labels(cls, model, z_prime: CoherentLabel, z_dprime: CoherentLabel, T, **kw):
        return cls(model, z_prime, np.conj(z_dprime.z), T, **kw)


@dataclass(eq=False)
class TrajectoryResult:
    """A converged contributing trajectory and its semiclassical data."""

    problem: ShootingProblem
    v0: np.ndarray
    S: complex
    G: complex
    M: np.ndarray
    det_mvv: complex
    det_mvv_arg: float
    residual_norm: float
    n_newton: int
    state: ExtendedState = field(repr=False, default=None)
    path_samples: list | None = None

    @property
    def hbar(self) -> float:
        return self.problem.model.cp.hbar


def _pack_state(u0, v0):
    y = np.zeros(22, dtype=np.complex128)
    y[0:2] = u0
    y[2:4] = v0
    y[4:20] = np.eye(4, dtype=np.complex128).reshape(-1)
    return y


_STATUS_MSG = {
    STATUS_MAX_STEPS: "step budget exhausted",
    STATUS_UNDERFLOW: "step size underflow",
    STATUS_ESCAPE: "trajectory escaped to numerical infinity",
}


def integrate_extended(
    model: HamiltonianModel,
    u0,
    v0,
    T: float,
    tol: float = 1e-12,
    max_steps: int = 1_000_000,
    record: list | None = None,
) -> ExtendedState:
    """Integrate the extended system from 0 to T at local tolerance ``tol``.

    Uses the compiled kernel when the model provides one (and no path
    recording is requested), the generic numpy twin otherwise.  Raises
    :class:`StepFailure` when the step controller gives up.
    """
    if T < 0.0:
        raise ValueError("T must be non-negative")
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    u0 = np.asarray(u0, dtype=np.complex128)
    v0 = np.asarray(v0, dtype=np.complex128)
    y0 = _pack_state(u0, v0)
    if T == 0.0:
        return ExtendedState(
            u0=u0.copy(), v0=v0.copy(), u=u0.copy(), v=v0.copy(),
            M=np.eye(4, dtype=np.complex128), s_integral=0.0 + 0.0j, g=0.0 + 0.0j,
            det_mvv_arg=0.0, n_steps=0, T=0.0, hbar=model.cp.hbar,
        )

    if model.kernel_code and record is None:
        y, status, nacc, argacc, _ = _dp45_kernel(
            model.kernel_code, model.kernel_params, y0, float(T), tol, tol, max_steps
        )
    else:
        y, status, nacc, argacc, _ = _dp45_python(
            model, y0, float(T), tol, tol, max_steps, record=record
        )
    if status != STATUS_OK:
        raise StepFailure(f"integration failed: {_STATUS_MSG.get(status, status)}")

    e0 = model.value(PhasePointUV(u0[0], u0[1], v0[0], v0[1]))
    e1 = model.value(PhasePointUV(y[0], y[1], y[2], y[3]))
    drift = abs(e1 - e0) / max(1.0, abs(e0))

    return ExtendedState(
        u0=u0.copy(), v0=v0.copy(), u=y[0:2].copy(), v=y[2:4].copy(),
        M=y[4:20].reshape(4, 4).copy(), s_integral=complex(y[20]), g=complex(y[21]),
        det_mvv_arg=argacc, n_steps=nacc, T=float(T), hbar=model.cp.hbar,
        energy_drift=float(drift),
    )


def action_total(st: ExtendedState) -> complex:
    """Full complex action including the boundary term.

    ``S = integral - Lambda`` with
    ``Lambda = (i hbar / 2) [u(0).v(0) + u(T).v(T)]`` (plain dot products,
    no conjugation).
    """
    lam = 0.5j * st.hbar * (st.u0 @ st.v0 + st.u @ st.v)
    return complex(st.s_integral - lam)


def _solve2(m, r):
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    return np.array(
        [(m[1, 1] * r[0] - m[0, 1] * r[1]) / det, (m[0, 0] * r[1] - m[1, 0] * r[0]) / det]
    )


def newton_shoot(prob: ShootingProblem, v0_seed) -> TrajectoryResult:
    """Solve the two-point boundary problem by damped Newton iteration.

    The Jacobian of the residual ``R(v0) = v(T) - z''*`` with respect to the
    initial ``v`` is exactly the monodromy block ``M_vv``, so each iteration
    reuses the variational integration.  ``n_newton`` counts trajectory
    integrations.  Raises :class:`NoConvergence`, :class:`SingularJacobian`
    or propagates :class:`StepFailure` from the first integration.
    """
    v0 = np.asarray(v0_seed, dtype=np.complex128).copy()
    if not np.all(np.isfinite(v0)):
        raise ValueError("seed must be finite")
    u0 = prob.z_prime.z
    target = prob.z_dprime_star
    n_int = 0

    def run(v):
        nonlocal n_int
        n_int += 1
        return integrate_extended(prob.model, u0, v, prob.T, tol=prob.tol_ode,
                                  max_steps=prob.max_steps)

    st = run(v0)
    rn = float(np.max(np.abs(st.v - target)))

    for _ in range(prob.max_newton):
        if rn < prob.tol_shoot:
            return TrajectoryResult(
                problem=prob, v0=v0, S=action_total(st), G=st.g, M=st.M,
                det_mvv=st.det_mvv, det_mvv_arg=st.det_mvv_arg,
                residual_norm=rn, n_newton=n_int, state=st,
            )
        mvv = st.M_vv
        det = mvv[0, 0] * mvv[1, 1] - mvv[0, 1] * mvv[1, 0]
        if abs(det) < 1e-14:
            raise SingularJacobian(
                f"|det M_vv| = {abs(det):.3e} during iteration; reseed away from caustic"
            )
        step = _solve2(mvv, -(st.v - target))
        lam = 1.0
        improved = False
        for _ in range(prob.max_backtracks + 1):
            v_try = v0 + lam * step
            try:
                st_try = run(v_try)
                rn_try = float(np.max(np.abs(st_try.v - target)))
            except StepFailure:
                rn_try = np.inf
            if np.isfinite(rn_try) and rn_try < rn:
                v0, st, rn = v_try, st_try, rn_try
                improved = True
                break
            lam *= 0.5
        if not improved:
            raise NoConvergence(
                f"residual stalled at {rn:.3e} (T={prob.T}, tol={prob.tol_shoot})"
            )
    raise NoConvergence(f"no convergence after {prob.max_newton} iterations (|R|={rn:.3e})")


def multistart_roots(
    prob: ShootingProblem,
    radii=(0.1, 0.3, 1.0),
    n_directions: int = 16,
    seed: int = 7,
    dedupe_tol: float = 1e-6,
) -> list[TrajectoryResult]:
    """Search for distinct contributing trajectories from scattered seeds.

    Seeds are the real-trajectory guess ``v0 = conj(z')`` plus rings of
    ``n_directions`` deterministic perturbations at each radius.  Converged
    roots are deduplicated at ``dedupe_tol`` and returned sorted by distance
    from the real guess (ties broken lexicographically), so the output is
    reproducible for a fixed seed.
    """
    rng = np.random.default_rng(seed)
    base = np.conj(prob.z_prime.z)
    seeds = [base]
    for r in radii:
        for _ in range(n_directions):
            d = rng.normal(size=4)
            d /= np.linalg.norm(d)
            seeds.append(base + r * (d[0:2] + 1j * d[2:4]))

    roots: list[TrajectoryResult] = []
    for s in seeds:
        try:
            res = newton_shoot(prob, s)
        except (NoConvergence, SingularJacobian, StepFailure):
            continue
        if not any(np.max(np.abs(res.v0 - r.v0)) < dedupe_tol for r in roots):
            roots.append(res)
    roots.sort(
        key=lambda r: (
            round(float(np.max(np.abs(r.v0 - base))), 9),
            round(r.v0[0].real, 9), round(r.v0[0].imag, 9),
            round(r.v0[1].real, 9), round(r.v0[1].imag, 9),
        )
    )
    return roots


def track_root(
    factory,
    s_values,
    v0_init,
    refine_levels: int = 3,
):
    """Continue one root of a parameterized family of shooting problems.

    ``factory(s)`` builds the :class:`ShootingProblem` at parameter ``s``;
    the problems must depend continuously on ``s``.  Each point is seeded
    with the previous converged ``v0``; a failed point is retried through
    up to ``refine_levels`` levels of parameter bisection.  Returns
    ``(results, failures)`` where ``results`` holds one
    :class:`TrajectoryResult` (or ``None`` for a gap) per ``s`` and
    ``failures`` collects :class:`FamilyLost` records for the gaps.
    """
    s_values = list(s_values)
    results: list[TrajectoryResult | None] = []
    failures: list[FamilyLost] = []

    first = newton_shoot(factory(s_values[0]), v0_init)
    results.append(first)
    v0 = first.v0
    s_anchor = s_values[0]

    for s in s_values[1:]:
        res = _advance(factory, s_anchor, s, v0, refine_levels)
        if res is None:
            failures.append(FamilyLost(f"continuation lost the root at s={s}"))
            results.append(None)
        else:
            results.append(res)
            v0 = res.v0
            s_anchor = s
    return results, failures


def _advance(factory, s0, s1, v0, level):
    try:
        return newton_shoot(factory(s1), v0)
    except (NoConvergence, SingularJacobian, StepFailure):
        if level <= 0:
            return None
    sm = 0.5 * (s0 + s1)
    mid = _advance(factory, s0, sm, v0, level - 1)
    if mid is None:
        return None
    return _advance(factory, sm, s1, mid.v0, level - 1)


def dump_trajectory(model, u0, v0, T, path, tol: float = 1e-10):
    """Write a time series of (u, v, det M_vv) to CSV for debugging."""
    record: list = []
    integrate_extended(model, u0, v0, T, tol=tol, record=record)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(
            ["t",
             "re_ux", "im_ux", "re_uy", "im_uy",
             "re_vx", "im_vx", "re_vy", "im_vy",
             "re_det_mvv", "im_det_mvv"]
        )
        for t, y in record:
            det = y[14] * y[19] - y[15] * y[18]
            w.writerow(
                [f"{t!r}"]
                + [f"{c!r}" for z in y[0:4] for c in (z.real, z.imag)]
                + [f"{det.real!r}", f"{det.imag!r}"]
            )

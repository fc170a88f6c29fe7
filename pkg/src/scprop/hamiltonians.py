"""Smoothed Hamiltonians H(v, u) with analytic derivatives.

A smoothed Hamiltonian is the coherent-state expectation value of an
operator, analytically continued by treating the label and its conjugate as
independent complex variables ``u`` and ``v``.  Each model exposes the value,
the first derivatives with respect to ``u`` and ``v``, and the four 2x2
Hessian blocks needed by the variational (monodromy) equations and by the
trace-of-mixed-Hessian phase correction.

Two models are provided: the Nelson Hamiltonian (kinetic energy plus the
quartic coupling ``(q_y - q_x^2/2)^2`` and the confinement ``mu q_x^2 / 2``),
and a matched-width 2D harmonic oscillator used as an exactness oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .phase_core import CoherentParams, PhasePointUV, qp_from_uv

_SQRT2 = math.sqrt(2.0)

# numba kernel selectors used by the fast trajectory integrator
KERNEL_NELSON = 1
KERNEL_HARMONIC = 2


@dataclass(frozen=True)
class NelsonParams:
    """Dimensionless coupling ``mu`` of the Nelson confinement term."""

    mu: float

    def __post_init__(self):
        if self.mu < 0.0:
            raise ValueError("mu must be non-negative")


class HamiltonianModel:
    """Interface of a smoothed Hamiltonian.

    Subclasses implement :meth:`value`, :meth:`grad_u`, :meth:`grad_v` and
    :meth:`hess`.  Models are immutable after construction and evaluation is
    pure, so instances are freely shareable across threads.  ``kernel_code``
    and ``kernel_params`` describe the model to the compiled integrator
    core; models without a kernel fall back to the generic integrator.
    """

    name: str = "abstract"
    kernel_code: int = 0
    kernel_params: np.ndarray | None = None
    cp: CoherentParams

    def value(self, pt: PhasePointUV) -> complex:
        raise NotImplementedError

    def grad_u(self, pt: PhasePointUV) -> np.ndarray:
        raise NotImplementedError

    def grad_v(self, pt: PhasePointUV) -> np.ndarray:
        raise NotImplementedError

    def hess(self, pt: PhasePointUV):
        """Return the blocks ``(H_uu, H_uv, H_vu, H_vv)``, each 2x2 complex."""
        raise NotImplementedError


class _QPChainModel(HamiltonianModel):
    """Common chain-rule plumbing for models defined through (q, p).

    The linear map between (u, v) and (q, p) has constant coefficients, so
    derivatives with respect to (u, v) follow from derivatives with respect
    to (q, p) by fixed 2x2 combinations.
    """

    def __init__(self, cp: CoherentParams):
        self.cp = cp
        b, c = cp.b, cp.c
        # d q_r / d u_r = d q_r / d v_r = b_r/sqrt(2)
        # d p_r / d u_r = -i c_r/sqrt(2),  d p_r / d v_r = +i c_r/sqrt(2)
        self._qu = b / _SQRT2
        self._pu = -1j * c / _SQRT2
        self._pv = 1j * c / _SQRT2

    def _qp(self, pt):
        return qp_from_uv(pt, self.cp)

    def _grad_qp(self, q, p):
        raise NotImplementedError

    def _hess_q(self, q):
        raise NotImplementedError

    def grad_u(self, pt):
        q, p = self._qp(pt)
        dq, dp = self._grad_qp(q, p)
        return self._qu * dq + self._pu * dp

    def grad_v(self, pt):
        q, p = self._qp(pt)
        dq, dp = self._grad_qp(q, p)
        return self._qu * dq + self._pv * dp

    def hess(self, pt):
        q, _ = self._qp(pt)
        vqq = self._hess_q(q)
        b, c = self.cp.b, self.cp.c
        bb = np.outer(b, b) / 2.0
        cc = np.diag(c * c) / 2.0
        huu = bb * vqq - cc
        hvv = bb * vqq - cc
        huv = bb * vqq + cc
        return huu, huv, huv.T.copy(), hvv


class NelsonSmoothed(_QPChainModel):
    """Gaussian-smoothed Nelson Hamiltonian, analytically continued.

    Smoothing the quartic coupling over the coherent-state Gaussian of
    position variances ``s_r = b_r^2/2`` produces the classical Hamiltonian
    plus a quadratic width correction and a constant:

        H = (p_x^2 + p_y^2)/2 + (q_y - q_x^2/2)^2 + (mu/2) q_x^2
            + s_x (3 q_x^2 / 2 - q_y) + C0,
        C0 = s_y + 3 s_x^2/4 + mu s_x/2 + (c_x^2 + c_y^2)/4.

    The derivation uses the Gaussian moments <dq^2> = b^2/2, <dq^4> = 3b^4/4
    and <dp^2> = c^2/2; it is cross-checked against Gauss-Hermite quadrature
    of the expectation value in the test suite.
    """

    def __init__(self, params: NelsonParams, cp: CoherentParams):
        super().__init__(cp)
        self.params = params
        self.mu = params.mu
        self.sx = cp.b_x ** 2 / 2.0
        self.sy = cp.b_y ** 2 / 2.0
        self.C0 = self.sy + 0.75 * self.sx ** 2 + 0.5 * self.mu * self.sx \
            + 0.25 * (cp.c_x ** 2 + cp.c_y ** 2)
        self.name = "nelson"
        self.kernel_code = KERNEL_NELSON
        self.kernel_params = np.array(
            [cp.hbar, cp.b_x, cp.b_y, cp.c_x, cp.c_y, self.mu, self.sx, self.C0]
        )

    def potential_bare(self, qx, qy):
        """Bare (unsmoothed) Nelson potential, used by the exact reference."""
        return (qy - 0.5 * qx ** 2) ** 2 + 0.5 * self.mu * qx ** 2

    def value(self, pt):
        q, p = self._qp(pt)
        qx, qy = q
        pot = (qy - 0.5 * qx ** 2) ** 2 + 0.5 * self.mu * qx ** 2 \
            + self.sx * (1.5 * qx ** 2 - qy) + self.C0
        return complex(0.5 * (p[0] ** 2 + p[1] ** 2) + pot)

    def _grad_qp(self, q, p):
        qx, qy = q
        dVx = -2.0 * qx * qy + qx ** 3 + (self.mu + 3.0 * self.sx) * qx
        dVy = 2.0 * (qy - 0.5 * qx ** 2) - self.sx
        return np.array([dVx, dVy]), p.astype(np.complex128)

    def _hess_q(self, q):
        qx, qy = q
        vxx = -2.0 * qy + 3.0 * qx ** 2 + self.mu + 3.0 * self.sx
        vxy = -2.0 * qx
        return np.array([[vxx, vxy], [vxy, 2.0]], dtype=np.complex128)


class HarmonicSmoothed(HamiltonianModel):
    """Matched-width smoothed 2D harmonic oscillator.

    With ``b_r = sqrt(hbar / omega_r)`` (unit mass) the smoothed Hamiltonian
    takes the closed form ``hbar omega_x (v_x u_x + 1/2) + hbar omega_y
    (v_y u_y + 1/2)``, for which the quadratic semiclassical propagator is
    exact.  Construction rejects unmatched widths.
    """

    def __init__(self, omega_x: float, omega_y: float, cp: CoherentParams):
        if omega_x <= 0 or omega_y <= 0:
            raise ValueError("frequencies must be positive")
        for b, w in ((cp.b_x, omega_x), (cp.b_y, omega_y)):
            if abs(b - math.sqrt(cp.hbar / w)) > 1e-12 * b:
                raise ValueError(
                    "harmonic oracle requires matched widths b_r = sqrt(hbar/omega_r)"
                )
        self.cp = cp
        self.omega_x = omega_x
        self.omega_y = omega_y
        self.name = "harmonic"
        self.kernel_code = KERNEL_HARMONIC
        self.kernel_params = np.array(
            [cp.hbar, cp.b_x, cp.b_y, cp.c_x, cp.c_y, omega_x, omega_y]
        )

    @property
    def omega(self) -> np.ndarray:
        return np.array([self.omega_x, self.omega_y])

    def value(self, pt):
        hw = self.cp.hbar * self.omega
        return complex(hw[0] * (pt.v_x * pt.u_x + 0.5) + hw[1] * (pt.v_y * pt.u_y + 0.5))

    def grad_u(self, pt):
        return self.cp.hbar * self.omega * pt.v

    def grad_v(self, pt):
        return self.cp.hbar * self.omega * pt.u

    def hess(self, pt):
        z = np.zeros((2, 2), dtype=np.complex128)
        huv = np.diag(self.cp.hbar * self.omega).astype(np.complex128)
        return z, huv, huv.copy(), z.copy()


def nelson_smoothed(params: NelsonParams, cp: CoherentParams) -> NelsonSmoothed:
    """Smoothed Nelson model for the given coupling and coherent widths."""
    return NelsonSmoothed(params, cp)


def harmonic_smoothed(omega_x: float, omega_y: float, cp: CoherentParams) -> HarmonicSmoothed:
    """Matched-width harmonic oracle model; see :class:`HarmonicSmoothed`."""
    return HarmonicSmoothed(omega_x, omega_y, cp)


def harmonic_coherent_propagator(z_prime, z_dprime, T, omega_x, omega_y) -> complex:
    """Closed-form coherent-state propagator of the 2D harmonic oscillator.

    For matched widths the oscillator evolves a coherent state into a
    coherent state with rotated label, ``z_r(t) = z_r exp(-i omega_r t)``,
    accumulating the zero-point phase ``exp(-i (omega_x+omega_y) T / 2)``;
    projecting on the final state gives

        K = exp(-|z'|^2/2 - |z''|^2/2
                + sum_r conj(z''_r) z'_r e^{-i omega_r T}
                - i (omega_x + omega_y) T / 2).
    """
    w = np.array([omega_x, omega_y])
    zp = z_prime.z
    zdp = z_dprime.z
    cross = np.sum(np.conj(zdp) * zp * np.exp(-1j * w * T))
    return complex(
        np.exp(
            -0.5 * z_prime.norm_sq
            - 0.5 * z_dprime.norm_sq
            + cross
            - 0.5j * (omega_x + omega_y) * T
        )
    )

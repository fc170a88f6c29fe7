"""Coherent-state parameterization and phase-space variable conversions.

The two-dimensional coherent states used throughout the package are product
Gaussians with position widths ``b_x, b_y`` and momentum widths
``c_r = hbar / b_r``.  A state is labeled by two dimensionless complex
numbers ``z_r = (q_r / b_r + i p_r / c_r) / sqrt(2)`` built from its real
phase-space centroid.  The classical dynamics lives in the analytically
continued variables ``(u, v)``, obtained from the same linear map applied
to generally complex ``(q, p)``; for real phase-space points ``v`` is the
complex conjugate of ``u``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class CoherentParams:
    """Widths and action scale of the coherent-state family.

    Parameters
    ----------
    b_x, b_y : float
        Position widths, strictly positive.
    hbar : float
        Action scale, strictly positive.

    Notes
    -----
    The momentum widths are derived quantities, ``c_r = hbar / b_r``, so the
    width product ``b_r * c_r = hbar`` holds exactly by construction.
    """

    b_x: float
    b_y: float
    hbar: float

    def __post_init__(self):
        if not (self.b_x > 0.0 and self.b_y > 0.0):
            raise ValueError("position widths b_x, b_y must be positive")
        if not self.hbar > 0.0:
            raise ValueError("hbar must be positive")

    @property
    def c_x(self) -> float:
        return self.hbar / self.b_x

    @property
    def c_y(self) -> float:
        return self.hbar / self.b_y

    @property
    def b(self) -> np.ndarray:
        return np.array([self.b_x, self.b_y])

    @property
    def c(self) -> np.ndarray:
        return np.array([self.c_x, self.c_y])


@dataclass(frozen=True)
class CoherentLabel:
    """Dimensionless complex label ``(z_x, z_y)`` of a coherent state."""

    z_x: complex
    z_y: complex

    @classmethod
    def from_centroid(cls, qbar, pbar, params: CoherentParams) -> "CoherentLabel":
        """Build the label from real centroids ``qbar = (q_x, q_y)``, ``pbar``."""
        qx, qy = qbar
        px, py = pbar
        zx = (qx / params.b_x + 1j * px / params.c_x) / _SQRT2
        zy = (qy / params.b_y + 1j * py / params.c_y) / _SQRT2
        return cls(complex(zx), complex(zy))

    def centroid(self, params: CoherentParams):
        """Inverse of :meth:`from_centroid`: returns ``(qbar, pbar)`` arrays."""
        qbar = np.array([self.z_x.real * params.b_x, self.z_y.real * params.b_y]) * _SQRT2
        pbar = np.array([self.z_x.imag * params.c_x, self.z_y.imag * params.c_y]) * _SQRT2
        return qbar, pbar

    @property
    def z(self) -> np.ndarray:
        return np.array([self.z_x, self.z_y], dtype=np.complex128)

    @property
    def norm_sq(self) -> float:
        return abs(self.z_x) ** 2 + abs(self.z_y) ** 2


@dataclass(frozen=True)
class PhasePointUV:
    """A point ``(u, v)`` of the complexified phase space."""

    u_x: complex
    u_y: complex
    v_x: complex
    v_y: complex

    @property
    def u(self) -> np.ndarray:
        return np.array([self.u_x, self.u_y], dtype=np.complex128)

    @property
    def v(self) -> np.ndarray:
        return np.array([self.v_x, self.v_y], dtype=np.complex128)


def uv_from_qp(q, p, params: CoherentParams) -> PhasePointUV:
    """Map (generally complex) ``(q, p)`` to the convenient variables ``(u, v)``.

    ``u_r = (q_r/b_r + i p_r/c_r)/sqrt(2)`` and
    ``v_r = (q_r/b_r - i p_r/c_r)/sqrt(2)``; for real input ``v = conj(u)``.
    """
    q = np.asarray(q, dtype=np.complex128)
    p = np.asarray(p, dtype=np.complex128)
    b, c = params.b, params.c
    u = (q / b + 1j * p / c) / _SQRT2
    v = (q / b - 1j * p / c) / _SQRT2
    return PhasePointUV(u[0], u[1], v[0], v[1])


def qp_from_uv(pt: PhasePointUV, params: CoherentParams):
    """Inverse of :func:`uv_from_qp`: ``q_r = b_r (u_r+v_r)/sqrt(2)``,
    ``p_r = -i c_r (u_r-v_r)/sqrt(2)``."""
    u, v = pt.u, pt.v
    q = params.b * (u + v) / _SQRT2
    p = -1j * params.c * (u - v) / _SQRT2
    return q, p


def overlap(z1: CoherentLabel, z2: CoherentLabel) -> complex:
    """Exact coherent-state overlap ``<z2|z1>``.

    Returns ``exp(-|z1|^2/2 - |z2|^2/2 + conj(z2).z1)``; equals 1 for
    ``z1 == z2`` and has modulus <= 1 always.
    """
    cross = np.conj(z2.z) @ z1.z
    return complex(np.exp(-0.5 * z1.norm_sq - 0.5 * z2.norm_sq + cross))

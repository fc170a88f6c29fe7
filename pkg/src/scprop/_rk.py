"""Adaptive Dormand-Prince 5(4) cores for the extended complex system.

The integrated state packs 22 complex numbers:

    y[0:2]   u          y[2:4]   v
    y[4:20]  monodromy M, row-major 4x4, ordered (du, dv) x (du0, dv0)
    y[20]    action integrand accumulator
    y[21]    trace-of-mixed-Hessian accumulator (half-trace integral)

Two implementations share the same tableau and step controller: a numba
kernel specialised to the built-in Hamiltonians (selected by an integer
code plus a parameter vector) and a generic numpy fallback driven by any
:class:`~scprop.hamiltonians.HamiltonianModel`.  The winding of
``det M_vv`` around the origin is accumulated at every accepted step so the
square-root branch of the semiclassical prefactor can be fixed by
continuation in time.

Status codes: 0 success, 1 step budget exhausted, 2 step size underflow,
3 state escaped to numerical infinity.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

_SQRT2 = math.sqrt(2.0)

STATUS_OK = 0
STATUS_MAX_STEPS = 1
STATUS_UNDERFLOW = 2
STATUS_ESCAPE = 3

_ESCAPE = 1.0e8

# Dormand-Prince 5(4) tableau
_C = (0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0)
_A = (
    (),
    (1.0 / 5.0,),
    (3.0 / 40.0, 9.0 / 40.0),
    (44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0),
    (19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0),
    (9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0),
    (35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0),
)
# y5 - y4 weights (error estimate)
_E = (
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
)


@njit(cache=True)
def _rhs_kernel(code, mp, y, out, hess_uv):
    """Model-specific right-hand side; fills ``out`` and ``hess_uv``.

    ``hess_uv`` receives the mixed block H_uv (needed for the trace
    accumulator); the full Jacobian of the variational equations is applied
    to the monodromy columns in place.
    """
    hbar = mp[0]
    bx = mp[1]
    by = mp[2]
    cx = mp[3]
    cy = mp[4]
    ux = y[0]
    uy = y[1]
    vx = y[2]
    vy = y[3]

    qx = bx * (ux + vx) / _SQRT2
    qy = by * (uy + vy) / _SQRT2
    px = -1j * cx * (ux - vx) / _SQRT2
    py = -1j * cy * (uy - vy) / _SQRT2

    if code == 1:
        # smoothed Nelson: quartic coupling + confinement + width correction
        mu = mp[5]
        sx = mp[6]
        c0 = mp[7]
        dvx = -2.0 * qx * qy + qx * qx * qx + (mu + 3.0 * sx) * qx
        dvy = 2.0 * (qy - 0.5 * qx * qx) - sx
        hval = 0.5 * (px * px + py * py) \
            + (qy - 0.5 * qx * qx) ** 2 + 0.5 * mu * qx * qx \
            + sx * (1.5 * qx * qx - qy) + c0
        wxx = -2.0 * qy + 3.0 * qx * qx + mu + 3.0 * sx
        wxy = -2.0 * qx
        wyy = 2.0 + 0.0j
    else:
        # matched-width harmonic oscillator: H = hbar w (v u + 1/2) per axis
        wx = mp[5]
        wy = mp[6]
        hval = hbar * wx * (vx * ux + 0.5) + hbar * wy * (vy * uy + 0.5)
        dvx = 0.0j
        dvy = 0.0j
        wxx = 0.0j
        wxy = 0.0j
        wyy = 0.0j

    if code == 1:
        hux = (bx / _SQRT2) * dvx - 1j * (cx / _SQRT2) * px
        huy = (by / _SQRT2) * dvy - 1j * (cy / _SQRT2) * py
        hvx = (bx / _SQRT2) * dvx + 1j * (cx / _SQRT2) * px
        hvy = (by / _SQRT2) * dvy + 1j * (cy / _SQRT2) * py
        bb_xx = 0.5 * bx * bx
        bb_xy = 0.5 * bx * by
        bb_yy = 0.5 * by * by
        cc_x = 0.5 * cx * cx
        cc_y = 0.5 * cy * cy
        huu_xx = bb_xx * wxx - cc_x
        huu_xy = bb_xy * wxy
        huu_yy = bb_yy * wyy - cc_y
        huv_xx = bb_xx * wxx + cc_x
        huv_xy = bb_xy * wxy
        huv_yy = bb_yy * wyy + cc_y
        hvv_xx = huu_xx
        hvv_xy = huu_xy
        hvv_yy = huu_yy
    else:
        wx = mp[5]
        wy = mp[6]
        hux = hbar * wx * vx
        huy = hbar * wy * vy
        hvx = hbar * wx * ux
        hvy = hbar * wy * uy
        huu_xx = 0.0j
        huu_xy = 0.0j
        huu_yy = 0.0j
        huv_xx = hbar * wx + 0.0j
        huv_xy = 0.0j
        huv_yy = hbar * wy + 0.0j
        hvv_xx = 0.0j
        hvv_xy = 0.0j
        hvv_yy = 0.0j

    ih = 1j / hbar
    udotx = -ih * hvx
    udoty = -ih * hvy
    vdotx = ih * hux
    vdoty = ih * huy

    out[0] = udotx
    out[1] = udoty
    out[2] = vdotx
    out[3] = vdoty

    # variational Jacobian; both models here have symmetric H_uv, but the
    # assembly keeps the general transpose convention (H_vu)_{rs} = (H_uv)_{sr}
    j00 = -ih * huv_xx
    j01 = -ih * huv_xy
    j10 = -ih * huv_xy
    j11 = -ih * huv_yy
    j02 = -ih * hvv_xx
    j03 = -ih * hvv_xy
    j12 = -ih * hvv_xy
    j13 = -ih * hvv_yy
    j20 = ih * huu_xx
    j21 = ih * huu_xy
    j30 = ih * huu_xy
    j31 = ih * huu_yy
    j22 = ih * huv_xx
    j23 = ih * huv_xy
    j32 = ih * huv_xy
    j33 = ih * huv_yy

    for col in range(4):
        m0 = y[4 + col]
        m1 = y[8 + col]
        m2 = y[12 + col]
        m3 = y[16 + col]
        out[4 + col] = j00 * m0 + j01 * m1 + j02 * m2 + j03 * m3
        out[8 + col] = j10 * m0 + j11 * m1 + j12 * m2 + j13 * m3
        out[12 + col] = j20 * m0 + j21 * m1 + j22 * m2 + j23 * m3
        out[16 + col] = j30 * m0 + j31 * m1 + j32 * m2 + j33 * m3

    out[20] = 0.5j * mp[0] * (udotx * vx + udoty * vy - ux * vdotx - uy * vdoty) - hval
    out[21] = 0.5 * (huv_xx + huv_yy)

    hess_uv[0] = huv_xx
    hess_uv[1] = huv_xy
    hess_uv[2] = huv_yy


@njit(cache=True)
def _dp45_kernel(code, mp, y0, t1, rtol, atol, max_steps):
    """Adaptive DP45 loop for the compiled models.

    Returns ``(y, status, n_accepted, detmvv_arg, max_arg_step)`` where
    ``detmvv_arg`` is the continuously unwrapped argument of det M_vv.
    """
    n = y0.shape[0]
    y = y0.copy()
    ks = np.empty((7, n), dtype=np.complex128)
    ytmp = np.empty(n, dtype=np.complex128)
    y5 = np.empty(n, dtype=np.complex128)
    hess_uv = np.empty(3, dtype=np.complex128)

    t = 0.0
    if t1 <= 0.0:
        return y, STATUS_OK, 0, 0.0, 0.0

    _rhs_kernel(code, mp, y, ks[0], hess_uv)
    h = t1 * 1e-4
    if h > 1e-3:
        h = 1e-3
    hmin = 1e-14 * (t1 if t1 > 1.0 else 1.0)

    det_prev = y[14] * y[19] - y[15] * y[18]
    arg_acc = 0.0
    max_dphi = 0.0
    n_acc = 0

    a21 = 1.0 / 5.0
    a31 = 3.0 / 40.0
    a32 = 9.0 / 40.0
    a41 = 44.0 / 45.0
    a42 = -56.0 / 15.0
    a43 = 32.0 / 9.0
    a51 = 19372.0 / 6561.0
    a52 = -25360.0 / 2187.0
    a53 = 64448.0 / 6561.0
    a54 = -212.0 / 729.0
    a61 = 9017.0 / 3168.0
    a62 = -355.0 / 33.0
    a63 = 46732.0 / 5247.0
    a64 = 49.0 / 176.0
    a65 = -5103.0 / 18656.0
    a71 = 35.0 / 384.0
    a73 = 500.0 / 1113.0
    a74 = 125.0 / 192.0
    a75 = -2187.0 / 6784.0
    a76 = 11.0 / 84.0
    e1 = 71.0 / 57600.0
    e3 = -71.0 / 16695.0
    e4 = 71.0 / 1920.0
    e5 = -17253.0 / 339200.0
    e6 = 22.0 / 525.0
    e7 = -1.0 / 40.0

    steps = 0
    while t < t1:
        steps += 1
        if steps > max_steps:
            return y, STATUS_MAX_STEPS, n_acc, arg_acc, max_dphi
        if h > t1 - t:
            h = t1 - t

        for i in range(n):
            ytmp[i] = y[i] + h * a21 * ks[0, i]
        _rhs_kernel(code, mp, ytmp, ks[1], hess_uv)
        for i in range(n):
            ytmp[i] = y[i] + h * (a31 * ks[0, i] + a32 * ks[1, i])
        _rhs_kernel(code, mp, ytmp, ks[2], hess_uv)
        for i in range(n):
            ytmp[i] = y[i] + h * (a41 * ks[0, i] + a42 * ks[1, i] + a43 * ks[2, i])
        _rhs_kernel(code, mp, ytmp, ks[3], hess_uv)
        for i in range(n):
            ytmp[i] = y[i] + h * (
                a51 * ks[0, i] + a52 * ks[1, i] + a53 * ks[2, i] + a54 * ks[3, i]
            )
        _rhs_kernel(code, mp, ytmp, ks[4], hess_uv)
        for i in range(n):
            ytmp[i] = y[i] + h * (
                a61 * ks[0, i] + a62 * ks[1, i] + a63 * ks[2, i]
                + a64 * ks[3, i] + a65 * ks[4, i]
            )
        _rhs_kernel(code, mp, ytmp, ks[5], hess_uv)
        for i in range(n):
            y5[i] = y[i] + h * (
                a71 * ks[0, i] + a73 * ks[2, i] + a74 * ks[3, i]
                + a75 * ks[4, i] + a76 * ks[5, i]
            )
        _rhs_kernel(code, mp, y5, ks[6], hess_uv)

        err_sq = 0.0
        bad = False
        for i in range(n):
            ei = h * (
                e1 * ks[0, i] + e3 * ks[2, i] + e4 * ks[3, i]
                + e5 * ks[4, i] + e6 * ks[5, i] + e7 * ks[6, i]
            )
            ay = abs(y[i])
            ay5 = abs(y5[i])
            sc = atol + rtol * (ay if ay > ay5 else ay5)
            q = abs(ei) / sc
            err_sq += q * q
            if not np.isfinite(err_sq):
                bad = True
                break
        if bad:
            h *= 0.1
            if h < hmin:
                return y, STATUS_UNDERFLOW, n_acc, arg_acc, max_dphi
            continue
        err = math.sqrt(err_sq / n)

        if err <= 1.0:
            t += h
            for i in range(n):
                y[i] = y5[i]
                ks[0, i] = ks[6, i]
            det = y[14] * y[19] - y[15] * y[18]
            dphi = math.atan2(
                (det * np.conj(det_prev)).imag, (det * np.conj(det_prev)).real
            )
            arg_acc += dphi
            if abs(dphi) > max_dphi:
                max_dphi = abs(dphi)
            det_prev = det
            n_acc += 1
            amax = 0.0
            for i in range(4):
                ai = abs(y[i])
                if ai > amax:
                    amax = ai
            if amax > _ESCAPE or not np.isfinite(amax):
                return y, STATUS_ESCAPE, n_acc, arg_acc, max_dphi
            if err == 0.0:
                fac = 5.0
            else:
                fac = 0.9 * err ** -0.2
                if fac > 5.0:
                    fac = 5.0
                elif fac < 0.2:
                    fac = 0.2
            h *= fac
        else:
            fac = 0.9 * err ** -0.2
            if fac < 0.1:
                fac = 0.1
            h *= fac
        if h < hmin:
            return y, STATUS_UNDERFLOW, n_acc, arg_acc, max_dphi

    return y, STATUS_OK, n_acc, arg_acc, max_dphi


def _rhs_generic(model, y):
    """Generic right-hand side built from a HamiltonianModel's methods."""
    from .phase_core import PhasePointUV

    hbar = model.cp.hbar
    pt = PhasePointUV(y[0], y[1], y[2], y[3])
    gu = model.grad_u(pt)
    gv = model.grad_v(pt)
    huu, huv, hvu, hvv = model.hess(pt)
    hval = model.value(pt)
    ih = 1j / hbar

    out = np.empty_like(y)
    udot = -ih * gv
    vdot = ih * gu
    out[0:2] = udot
    out[2:4] = vdot
    J = np.empty((4, 4), dtype=np.complex128)
    J[0:2, 0:2] = -ih * hvu
    J[0:2, 2:4] = -ih * hvv
    J[2:4, 0:2] = ih * huu
    J[2:4, 2:4] = ih * huv
    M = y[4:20].reshape(4, 4)
    out[4:20] = (J @ M).reshape(-1)
    u = y[0:2]
    v = y[2:4]
    out[20] = 0.5j * hbar * (udot @ v - u @ vdot) - hval
    out[21] = 0.5 * (huv[0, 0] + huv[1, 1])
    return out


def _dp45_python(model, y0, t1, rtol, atol, max_steps, record=None):
    """Numpy twin of the compiled loop; works with any HamiltonianModel.

    ``record`` may be a list; accepted (t, y.copy()) samples are appended.
    """
    y = y0.copy()
    t = 0.0
    if t1 <= 0.0:
        return y, STATUS_OK, 0, 0.0, 0.0

    k = [None] * 7
    k[0] = _rhs_generic(model, y)
    h = min(t1 * 1e-4, 1e-3)
    hmin = 1e-14 * max(t1, 1.0)

    det_prev = y[14] * y[19] - y[15] * y[18]
    arg_acc = 0.0
    max_dphi = 0.0
    n_acc = 0
    if record is not None:
        record.append((0.0, y.copy()))

    steps = 0
    while t < t1:
        steps += 1
        if steps > max_steps:
            return y, STATUS_MAX_STEPS, n_acc, arg_acc, max_dphi
        h = min(h, t1 - t)
        for s in range(1, 7):
            acc = y.copy()
            for j, a in enumerate(_A[s]):
                if a != 0.0:
                    acc += (h * a) * k[j]
            k[s] = _rhs_generic(model, acc)
            if s == 6:
                y5 = acc
        ei = h * sum(e * k[j] for j, e in enumerate(_E) if e != 0.0)
        sc = atol + rtol * np.maximum(np.abs(y), np.abs(y5))
        with np.errstate(all="ignore"):
            err = float(np.sqrt(np.mean(np.abs(ei / sc) ** 2)))
        if not np.isfinite(err):
            h *= 0.1
            if h < hmin:
                return y, STATUS_UNDERFLOW, n_acc, arg_acc, max_dphi
            continue

        if err <= 1.0:
            t += h
            y = y5
            k[0] = k[6]
            det = y[14] * y[19] - y[15] * y[18]
            dphi = math.atan2((det * np.conj(det_prev)).imag, (det * np.conj(det_prev)).real)
            arg_acc += dphi
            max_dphi = max(max_dphi, abs(dphi))
            det_prev = det
            n_acc += 1
            if record is not None:
                record.append((t, y.copy()))
            if not np.all(np.isfinite(y[0:4])) or np.max(np.abs(y[0:4])) > _ESCAPE:
                return y, STATUS_ESCAPE, n_acc, arg_acc, max_dphi
            fac = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
            h *= fac
        else:
            h *= max(0.1, 0.9 * err ** -0.2)
        if h < hmin:
            return y, STATUS_UNDERFLOW, n_acc, arg_acc, max_dphi

    return y, STATUS_OK, n_acc, arg_acc, max_dphi

"""Uniform Airy-function propagator, finite through the phase-space caustic.

The building block is the entire function

    f_j(xi) = (1/2pi) Int_{C_j} exp[i (xi t + t^3/3)] dt,

where the three inequivalent contours C_j connect the sector valleys of the
cubic exponent (directions pi/6, 5pi/6, -pi/2) pairwise.  All three solve
f'' = xi f and sum to zero.  One canonical solution is evaluated directly
(Maclaurin series in the inner disk, asymptotic expansions in the outer
region, and a stabilized Taylor continuation of the ODE across the gap);
the other two follow from the rotation relations of the integrand.  The
index-to-function table used here is

    f_1(xi) = F(xi)                      contour: valley 5pi/6 -> pi/6
    f_2(xi) = w F(w xi),  w = e^{2pi i/3}  contour: valley -pi/2 -> 5pi/6
    f_3(xi) = conj(w) F(conj(w) xi)        contour: valley pi/6 -> -pi/2

with F the recessive-on-the-positive-axis solution; the table is pinned by
direct numerical quadrature of the contour integral (also provided here,
as the validation oracle).

From two trajectories' actions the uniform propagator is assembled as

    A = (i/2hbar)(S_a + S_b),   sqrtB = [(3i/4hbar)(S_b - S_a)]^{1/3},
    h_{a,b} = sqrt(-+ sqrtB / det M_vv|_{a,b}) exp[(i/hbar) G_{a,b}],
    K = i sqrt(pi) N [c_1 f_j'(B) + c_2 f_j(B)] e^A,
    c_1 = (h_b - h_a)/sqrtB,  c_2 = h_a + h_b,

where B = sqrtB^2 and N is the coherent-state normalization
exp(-|z'|^2/2 - |z''|^2/2) (bundling -i hbar ln N into each action leaves B
unchanged and produces exactly this factor; it is required for the formula
to merge with the quadratic propagator far from the caustic).  Near
coalescence c_1 is evaluated through a log-ratio form that avoids the
subtractive cancellation of h_b - h_a.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import quad
from scipy.special import gamma

_OMEGA = cmath.exp(2j * cmath.pi / 3.0)
_AI0 = 3.0 ** (-2.0 / 3.0) / gamma(2.0 / 3.0)
_AIP0 = -(3.0 ** (-1.0 / 3.0)) / gamma(1.0 / 3.0)

# sector boundaries for the evaluation strategy (see _ai_core)
_ARG_RECESSIVE = math.pi / 3.0 + 0.1
_ARG_ROTATE = 2.0 * math.pi / 3.0 + 0.05
_SERIES_R_RECESSIVE = 4.5
_SERIES_R_OSCILLATORY = 8.0
_MARCH_ANCHOR = 8.5


class AmbiguousBranch(UserWarning):
    """Two uniform surfaces tie in the far-field election."""


# ---------------------------------------------------------------------------
# canonical Airy solution for complex argument


def _ai_series(z):
    """Maclaurin series of the canonical solution and its derivative."""
    z3 = z * z * z
    # f = sum f_k z^{3k}, g = sum g_k z^{3k+1}
    tf = 1.0 + 0.0j
    tg = z
    sf, sg = tf, tg
    sfp, sgp = 0.0j, 1.0 + 0.0j
    for k in range(120):
        tf = tf * z3 / ((3 * k + 3) * (3 * k + 2))
        tg = tg * z3 / ((3 * k + 4) * (3 * k + 3))
        sf += tf
        sg += tg
        if z != 0:
            sfp += (3 * k + 3) * tf / z
            sgp += (3 * k + 4) * tg / z
        if abs(tf) + abs(tg) < 1e-20 * (abs(sf) + abs(sg) + 1e-300):
            break
    ai = _AI0 * sf + _AIP0 * sg
    aip = _AI0 * sfp + _AIP0 * sgp
    return ai, aip


def _ai_asymptotic(z):
    """Poincare expansions for large |z|, |arg z| < pi (best <= 2pi/3)."""
    zeta = (2.0 / 3.0) * z ** 1.5
    su = 1.0 + 0.0j
    sv = 1.0 + 0.0j
    u = 1.0
    term_prev = 1.0
    sign = 1.0
    for k in range(1, 40):
        u *= (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / (216.0 * k * (2 * k - 1))
        v = u * (6 * k + 1) / (1.0 - 6 * k)
        sign = -sign
        tu = sign * u / zeta**k
        tv = sign * v / zeta**k
        if abs(tu) > term_prev:
            break
        su += tu
        sv += tv
        term_prev = abs(tu)
        if abs(tu) < 1e-18 * abs(su):
            break
    pref = cmath.exp(-zeta) / (2.0 * math.sqrt(math.pi) * z**0.25)
    ai = pref * su
    aip = -(z**0.25) * cmath.exp(-zeta) / (2.0 * math.sqrt(math.pi)) * sv
    return ai, aip


def _ai_taylor_march(z):
    """Continue the ODE solution inward from the asymptotic anchor.

    Used only in the recessive sector, where the tracked solution grows
    relative to its dominant partner on the way in, so contamination
    introduced at the anchor decays and the march is numerically stable.
    """
    phase = z / abs(z)
    a = _MARCH_ANCHOR * phase
    y, yp = _ai_asymptotic(a)
    n_steps = max(1, int(math.ceil((_MARCH_ANCHOR - abs(z)) / 0.9)))
    hs = (z - a) / n_steps
    for _ in range(n_steps):
        c0, c1 = y, yp
        y_new = c0 + c1 * hs
        yp_new = c1
        hk = hs
        # rolling window c_{k-2}, c_{k-3} for c_k = (a c_{k-2} + c_{k-3})/(k(k-1))
        ck, ckm1, ckm2 = c1, c0, 0.0j
        for k in range(2, 80):
            cnew = (a * ckm1 + ckm2) / (k * (k - 1))
            hk *= hs
            y_new += cnew * hk
            yp_new += k * cnew * hk / hs
            ckm2, ckm1, ck = ckm1, ck, cnew
            if abs(cnew * hk) < 1e-20 * (abs(y_new) + 1e-300) and k > 8:
                break
        a = a + hs
        y, yp = y_new, yp_new
    return y, yp


def _ai_core(z):
    """Canonical solution F(z), F'(z) for any complex z.

    Strategy by sector of arg z (symmetric in conjugation):

    * recessive sector ``|arg| <= pi/3 + 0.1``: the value is exponentially
      small and the Maclaurin series suffers cancellation, so the series is
      used only in a small disk, asymptotics outside, and a stabilized ODE
      march across the gap;
    * oscillatory band up to ``2pi/3 + 0.05``: no exponential smallness, so
      the plain series is accurate in a much larger disk, asymptotics
      beyond;
    * past ``2pi/3 + 0.05``: one level of the connection identity lands
      both rotated arguments inside the directly covered sectors.
    """
    z = complex(z)
    if z == 0.0:
        return _AI0 + 0.0j, _AIP0 + 0.0j
    aarg = abs(cmath.phase(z))
    if aarg > _ARG_ROTATE:
        zw = z * _OMEGA
        zwc = z * _OMEGA.conjugate()
        a1, a1p = _ai_core(zw)
        a2, a2p = _ai_core(zwc)
        ai = -(_OMEGA * a1 + _OMEGA.conjugate() * a2)
        aip = -(_OMEGA.conjugate() * a1p + _OMEGA * a2p)
        return ai, aip
    r = abs(z)
    if aarg <= _ARG_RECESSIVE:
        if r <= _SERIES_R_RECESSIVE:
            return _ai_series(z)
        if r >= _MARCH_ANCHOR:
            return _ai_asymptotic(z)
        return _ai_taylor_march(z)
    if r <= _SERIES_R_OSCILLATORY:
        return _ai_series(z)
    return _ai_asymptotic(z)


@dataclass(frozen=True)
class AiryBranch:
    """Contour selector j in {1, 2, 3}; see the module table."""

    j: int

    def __post_init__(self):
        if self.j not in (1, 2, 3):
            raise ValueError("contour index must be 1, 2 or 3")


def _branch_index(j) -> int:
    return j.j if isinstance(j, AiryBranch) else int(j)


def airy_f(j, xi) -> complex:
    """Contour-integral Airy solution f_j at complex xi."""
    k = _branch_index(j)
    if k == 1:
        return _ai_core(xi)[0]
    if k == 2:
        return _OMEGA * _ai_core(_OMEGA * xi)[0]
    return _OMEGA.conjugate() * _ai_core(_OMEGA.conjugate() * xi)[0]


def airy_f_prime(j, xi) -> complex:
    """xi-derivative of :func:`airy_f`."""
    k = _branch_index(j)
    if k == 1:
        return _ai_core(xi)[1]
    if k == 2:
        return _OMEGA * _OMEGA * _ai_core(_OMEGA * xi)[1]
    w = _OMEGA.conjugate()
    return w * w * _ai_core(w * xi)[1]


# ---------------------------------------------------------------------------
# quadrature oracle for the contour integral

_VALLEYS = {1: (5.0 * math.pi / 6.0, math.pi / 6.0),
            2: (-math.pi / 2.0, 5.0 * math.pi / 6.0),
            3: (math.pi / 6.0, -math.pi / 2.0)}


def _quad_complex(func, a, b, **kw):
    re = quad(lambda x: func(x).real, a, b, **kw)[0]
    im = quad(lambda x: func(x).imag, a, b, **kw)[0]
    return re + 1j * im


def _ray_integral(xi, theta):
    e = cmath.exp(1j * theta)

    def g(rho):
        t = rho * e
        return cmath.exp(1j * (xi * t + t * t * t / 3.0)) * e

    return _quad_complex(g, 0.0, np.inf, epsabs=1e-13, epsrel=1e-12, limit=400)


def _saddle_integral(xi):
    """Canonical contour via the descent path t(x) = x + i sqrt(xi + x^2/3).

    The exponential scale exp(-zeta) is factored out so the recessive
    solution is resolved with full relative accuracy.
    """
    zeta = (2.0 / 3.0) * complex(xi) ** 1.5

    def g(x):
        s = cmath.sqrt(xi + x * x / 3.0)
        t = x + 1j * s
        dt = 1.0 + 1j * x / (3.0 * s)
        return cmath.exp(1j * (xi * t + t * t * t / 3.0) + zeta) * dt

    L = 9.0 + 1.5 * abs(xi) ** 0.5
    val = _quad_complex(g, -L, L, epsabs=1e-13, epsrel=1e-12, limit=400, points=[0.0])
    return cmath.exp(-zeta) * val / (2.0 * math.pi)


def airy_contour_quadrature(j, xi) -> complex:
    """Direct numerical integration of the contour integral (oracle).

    Small arguments integrate each contour along its two valley rays; larger
    ones use a saddle-anchored descent path for the canonical contour (the
    exact rotation algebra maps the other two onto it, and is itself
    validated in the small-argument regime).
    """
    k = _branch_index(j)
    xi = complex(xi)
    if abs(xi) <= 3.5:
        th_in, th_out = _VALLEYS[k]
        return (_ray_integral(xi, th_out) - _ray_integral(xi, th_in)) / (2.0 * math.pi)
    if k == 2:
        return _OMEGA * airy_contour_quadrature(1, _OMEGA * xi)
    if k == 3:
        return _OMEGA.conjugate() * airy_contour_quadrature(1, _OMEGA.conjugate() * xi)
    if abs(cmath.phase(xi)) > _ARG_ROTATE:
        # one identity level; both rotated arguments land inside the sector
        # covered directly by the descent path
        return -(_OMEGA * _saddle_integral(_OMEGA * xi)
                 + _OMEGA.conjugate() * _saddle_integral(_OMEGA.conjugate() * xi))
    return _saddle_integral(xi)


# ---------------------------------------------------------------------------
# uniform formula


@dataclass(frozen=True)
class UniformInputs:
    """Actions, corrections and branch metadata for one grid point.

    ``w`` records the chosen cube root of ``(3i/4hbar)(S_b - S_a)``; the
    formula uses ``sqrt(B) = w`` and ``B = w^2``, so one tracked quantity
    fixes both powers coherently.  ``sign_a, sign_b`` select the square-root
    branches of the two prefactor ratios relative to the principal root.
    """

    S_a: complex
    S_b: complex
    G_a: complex
    G_b: complex
    det_a: complex
    det_b: complex
    norm_N: float
    hbar: float
    w: complex
    sign_a: int = 1
    sign_b: int = 1

    @property
    def B(self) -> complex:
        return self.w * self.w

    def h_values(self):
        ha = self.sign_a * cmath.sqrt(-self.w / self.det_a) \
            * cmath.exp(1j * self.G_a / self.hbar)
        hb = self.sign_b * cmath.sqrt(self.w / self.det_b) \
            * cmath.exp(1j * self.G_b / self.hbar)
        return ha, hb


def _cexpm1(eta: complex) -> complex:
    """exp(eta) - 1 without cancellation for small complex eta."""
    if abs(eta) < 1e-4:
        return eta * (1.0 + eta * (0.5 + eta * (1.0 / 6.0 + eta / 24.0)))
    return cmath.exp(eta) - 1.0


def _closest_cbrt(delta, prev_w):
    if delta == 0:
        return 0.0j
    w0 = delta ** (1.0 / 3.0)
    cands = [w0, w0 * _OMEGA, w0 * _OMEGA.conjugate()]
    if prev_w is None:
        return w0
    return min(cands, key=lambda w: abs(w - prev_w))


def uniform_inputs(tr_a: "TrajectoryResult", tr_b: "TrajectoryResult",
                   prev: UniformInputs | None = None) -> UniformInputs:
    """Assemble branch-coherent uniform-formula inputs from two trajectories.

    The cube-root branch of ``w`` and the square-root branches of the two
    prefactor ratios are taken closest to ``prev`` when given (grid
    continuity), principal otherwise.
    """
    pa, pb = tr_a.problem, tr_b.problem
    hbar = tr_a.hbar
    nsq = pa.z_prime.norm_sq + float(np.sum(np.abs(pa.z_dprime_star) ** 2))
    delta = 0.75j * (tr_b.S - tr_a.S) / hbar
    w = _closest_cbrt(delta, prev.w if prev is not None else None)

    ui = UniformInputs(
        S_a=tr_a.S, S_b=tr_b.S, G_a=tr_a.G, G_b=tr_b.G,
        det_a=tr_a.det_mvv, det_b=tr_b.det_mvv,
        norm_N=math.exp(-0.5 * nsq), hbar=hbar, w=w,
    )
    if prev is not None and w != 0:
        ha_prev, hb_prev = prev.h_values()
        ha, hb = ui.h_values()
        sa = 1 if abs(ha - ha_prev) <= abs(-ha - ha_prev) else -1
        sb = 1 if abs(hb - hb_prev) <= abs(-hb - hb_prev) else -1
        if sa < 0 or sb < 0:
            ui = replace(ui, sign_a=sa, sign_b=sb)
    return ui


def k_uniform(ui: UniformInputs, j, delta_caustic: float = 1e-4) -> complex:
    """Evaluate the uniform propagator on contour ``j``.

    For ``|B| < delta_caustic`` the coefficient ``c_1 = (h_b - h_a)/sqrt(B)``
    is computed from the log-ratio of the two prefactor ratios and the
    difference of phase corrections, which stays finite through coalescence;
    at exactly ``B = 0`` the degenerate ratio conventions give ``h = 0`` and
    ``c_1 = 0`` (the coalescence-limit expression for identical inputs).
    """
    w = ui.w
    B = w * w
    f = airy_f(j, B)
    fp = airy_f_prime(j, B)
    ha, hb = ui.h_values()
    c2 = ha + hb
    if abs(B) >= delta_caustic:
        c1 = (hb - ha) / w
    elif w == 0:
        c1 = 0.0j
    else:
        same_sign = ui.sign_a == ui.sign_b
        if same_sign:
            eta = 0.5 * cmath.log(-ui.det_a / ui.det_b) \
                + 1j * (ui.G_b - ui.G_a) / ui.hbar
            c1 = ha * _cexpm1(eta) / w
        else:
            c1 = (hb - ha) / w
    expo = 0.5j * (ui.S_a + ui.S_b) / ui.hbar + math.log(ui.norm_N)
    return 1j * math.sqrt(math.pi) * (c1 * fp + c2 * f) * cmath.exp(expo)


def k2_from_branch(ui: UniformInputs, which: str) -> complex:
    """Single-trajectory quadratic value implied by the uniform inputs.

    Used for far-field cross checks: for large ``|B|`` the elected uniform
    surface approaches the ``a``-trajectory term
    ``N sqrt(1/det M_vv) exp[(i/hbar)(S+G)]`` up to the tracked branch sign.
    """
    if which == "a":
        S, G, det = ui.S_a, ui.G_a, ui.det_a
    else:
        S, G, det = ui.S_b, ui.G_b, ui.det_b
    expo = 1j * (S + G) / ui.hbar + math.log(ui.norm_N)
    return cmath.exp(expo) / cmath.sqrt(det)


def select_uniform_branch(kun: np.ndarray, k2: np.ndarray, absB: np.ndarray,
                          far_threshold: float = 2.0, tie: float = 1e-6):
    """Elect the uniform surface that merges with the quadratic field.

    ``kun`` has shape (3, ...) holding the three contour solutions.  Scores
    are mean relative magnitude deviations from ``k2`` over the far-field
    mask ``absB > far_threshold``; the winner is returned together with a
    global sign making the elected surface match ``k2`` in phase there.
    Warns :class:`AmbiguousBranch` on a tie (lower index wins).
    """
    mask = np.isfinite(k2) & np.isfinite(absB) & (absB > far_threshold)
    for s in range(3):
        mask &= np.isfinite(kun[s])
    if not np.any(mask):
        raise ValueError("no far-field points available for branch election")
    scores = []
    for s in range(3):
        rel = np.abs(np.abs(kun[s][mask]) - np.abs(k2[mask])) / np.abs(k2[mask])
        scores.append(float(np.mean(rel)))
    order = np.argsort(scores, kind="stable")
    if abs(scores[order[0]] - scores[order[1]]) < tie:
        warnings.warn(
            f"uniform surfaces {order[0] + 1} and {order[1] + 1} tie "
            f"({scores[order[0]]:.3e} vs {scores[order[1]]:.3e}); picking lower index",
            AmbiguousBranch,
        )
        j_star = int(min(order[0], order[1])) + 1
    else:
        j_star = int(order[0]) + 1
    ratio = k2[mask] / kun[j_star - 1][mask]
    sign = -1.0 if float(np.median(ratio.real)) < 0.0 else 1.0
    return j_star, sign, scores

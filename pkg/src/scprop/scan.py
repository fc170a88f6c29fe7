"""Parameter-plane scans comparing the three propagator evaluations.

The scan protocol fixes the initial-state energy and momentum direction,
ties the second position centroid to the first, and sweeps a rectangular
``(T, qx)`` window.  At each point two contributing trajectories are
continued from a seed pair found by multistart at the window center; the
quadratic propagator, the three uniform surfaces, and optionally the exact
split-operator reference are evaluated on the same grid, the caustic is
located and refined, and everything is exported as plot-ready CSV plus a
JSON metadata record.
"""

from __future__ import annotations

import csv
import json
import math
from collections import deque
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from . import __version__
from .exact_qm import GridSpec, coherent_wavefunction, propagate_snapshots
from .hamiltonians import NelsonParams, nelson_smoothed
from .phase_core import CoherentLabel, CoherentParams
from .semiclassical import CausticSingular, k2_single, stokes_filter
from .trajectory import (
    ShootingProblem,
    multistart_roots,
    newton_shoot,
    track_root,
)
from .uniform import UniformInputs, k_uniform, select_uniform_branch


class EnergyInfeasible(ValueError):
    """The energy protocol has no real momentum at the requested point."""


class CausticNotFound(RuntimeError):
    """No candidate coalescence point below the search threshold."""


@dataclass
class ScanConfig:
    """Scan window, physical parameters and numerical knobs (with defaults)."""

    E: float = 0.5
    theta_deg: float = 140.0
    mu: float = 0.1
    b: float = 0.2
    hbar: float = 0.05
    qx_min: float = 0.2
    qx_max: float = 1.0
    t_min: float = 7.0
    t_max: float = 8.0
    n_qx: int = 81
    n_t: int = 81
    methods: tuple = ("k2", "uniform", "exact")
    tol_ode: float = 1e-12
    tol_shoot: float = 1e-10
    eps_stokes: float = 1e-12
    caustic_guard: float = 1e-12
    delta_caustic: float = 1e-4
    far_threshold: float = 2.0
    refine_levels: int = 3
    seed: int = 7
    box_x: tuple = (-4.0, 4.0)
    box_y: tuple = (-4.0, 4.0)
    n_grid: int = 256
    dt_exact: float = 1e-3

    def __post_init__(self):
        if self.qx_min >= self.qx_max or self.t_min >= self.t_max:
            raise ValueError("scan window must have positive extent")
        if self.n_qx < 2 or self.n_t < 2:
            raise ValueError("grid needs at least 2 points per axis")
        unknown = set(self.methods) - {"k2", "uniform", "exact"}
        if unknown:
            raise ValueError(f"unknown methods: {sorted(unknown)}")

    @property
    def coherent_params(self) -> CoherentParams:
        return CoherentParams(self.b, self.b, self.hbar)

    @property
    def grid_spec(self) -> GridSpec:
        return GridSpec(tuple(self.box_x), tuple(self.box_y),
                        self.n_grid, self.n_grid, self.dt_exact)

    @classmethod
    def from_file(cls, path) -> "ScanConfig":
        """Flat ``key = value`` file with ``#`` comments; unknown keys fail."""
        values = {}
        fields = {f.name for f in cls.__dataclass_fields__.values()}  # type: ignore[attr-defined]
        with open(path) as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ValueError(f"{path}:{lineno}: expected 'key = value'")
                key, val = (s.strip() for s in line.split("=", 1))
                if key not in fields:
                    raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
                values[key] = val
        return cls(**{k: _coerce(cls, k, v) for k, v in values.items()})


def _coerce(cls, key, text):
    kind = cls.__dataclass_fields__[key].type
    if key == "methods":
        return tuple(s.strip() for s in text.split(",") if s.strip())
    if key in ("box_x", "box_y"):
        lo, hi = (float(s) for s in text.split(","))
        return (lo, hi)
    if kind == "int":
        return int(text)
    if kind == "float":
        return float(text)
    return text


def nelson_model(cfg: ScanConfig):
    return nelson_smoothed(NelsonParams(cfg.mu), cfg.coherent_params)


def bare_potential(cfg: ScanConfig):
    mu = cfg.mu

    def V(qx, qy):
        return (qy - 0.5 * qx**2) ** 2 + 0.5 * mu * qx**2

    return V


def resolve_point(cfg: ScanConfig, qx: float) -> CoherentLabel:
    """Protocol: ``qy = 2 qx / 3``, momentum magnitude from the energy rule.

    Raises :class:`EnergyInfeasible` when the requested energy is below the
    potential at the centroid.
    """
    qy = 2.0 * qx / 3.0
    pot = (qy - 0.5 * qx**2) ** 2 + 0.5 * cfg.mu * qx**2
    psq = 2.0 * (cfg.E - pot)
    if psq < 0.0:
        raise EnergyInfeasible(
            f"|p|^2 = {psq:.6f} < 0 at qx = {qx} (E = {cfg.E})"
        )
    pmag = math.sqrt(psq)
    th = math.radians(cfg.theta_deg)
    return CoherentLabel.from_centroid(
        (qx, qy), (pmag * math.cos(th), pmag * math.sin(th)), cfg.coherent_params
    )


@dataclass
class CausticRecord:
    T: float
    qx: float
    absB: float
    abs_dS: float
    v0_distance: float
    n_iterations: int
    converged: bool


@dataclass
class ScanGrid:
    """All per-point fields of one scan; axes are (T, qx) row-major in T."""

    cfg: ScanConfig
    Ts: np.ndarray
    qxs: np.ndarray
    qy: np.ndarray
    px: np.ndarray
    py: np.ndarray
    S: np.ndarray          # (2, nT, nqx) complex, sweep families
    G: np.ndarray
    det_mvv: np.ndarray
    v0: np.ndarray         # (2, nT, nqx, 2)
    F0: np.ndarray         # (2, nT, nqx) real
    k2_family: np.ndarray  # (2, nT, nqx) complex single-trajectory values
    included: np.ndarray   # (2, nT, nqx) bool
    gap: np.ndarray        # (nT, nqx) bool
    a_index: np.ndarray    # (nT, nqx) int: which sweep family is f_a
    k2: np.ndarray         # combined field
    absB: np.ndarray
    kun: np.ndarray        # (3, nT, nqx)
    kun_elected: np.ndarray
    elected_j: int
    elected_sign: float
    election_scores: list
    k_exact: np.ndarray | None
    rel_err: np.ndarray | None
    caustic: CausticRecord | None
    anchor_roots_found: int
    failures: list = field(default_factory=list)

    @property
    def F0_a(self):
        return np.take_along_axis(self.F0, self.a_index[None], axis=0)[0]

    @property
    def F0_b(self):
        return np.take_along_axis(self.F0, 1 - self.a_index[None], axis=0)[0]

    @property
    def k2_a(self):
        return np.take_along_axis(self.k2_family, self.a_index[None], axis=0)[0]

    @property
    def k2_b(self):
        return np.take_along_axis(self.k2_family, 1 - self.a_index[None], axis=0)[0]

    @property
    def det_a(self):
        return np.take_along_axis(self.det_mvv, self.a_index[None], axis=0)[0]

    @property
    def det_b(self):
        return np.take_along_axis(self.det_mvv, 1 - self.a_index[None], axis=0)[0]


def _serpentine(n_t, n_qx):
    path = []
    for j in range(n_qx):
        rng = range(n_t) if j % 2 == 0 else range(n_t - 1, -1, -1)
        for i in rng:
            path.append((i, j))
    return path


def _problem_factory(cfg, model, nodes):
    """Continuous-parameter shooting problems along a node path.

    Fractional ``s`` interpolates linearly between adjacent nodes so the
    continuation can refine between grid points.
    """

    def factory(s):
        k = int(math.floor(s))
        frac = s - k
        if k >= len(nodes) - 1:
            T, qx = nodes[-1]
        else:
            (t0, q0), (t1, q1) = nodes[k], nodes[k + 1]
            T = t0 + frac * (t1 - t0)
            qx = q0 + frac * (q1 - q0)
        z = resolve_point(cfg, qx)
        return ShootingProblem.for_labels(
            model, z, z, T, tol_shoot=cfg.tol_shoot, tol_ode=cfg.tol_ode
        )

    return factory


def _segment_nodes(p0, p1, n):
    return [(p0[0] + s * (p1[0] - p0[0]), p0[1] + s * (p1[1] - p0[1]))
            for s in np.linspace(0.0, 1.0, n)]


def find_contributing_pair(cfg: ScanConfig, model, anchor=None):
    """Multistart at the anchor and pick the near-degenerate dominant pair.

    The two contributing trajectories are the pair with the smallest action
    separation among the four smallest-|F0| roots (the caustic pair is the
    unique nearly degenerate one near the window center).  Returns the pair
    plus the total number of distinct roots found.
    """
    if anchor is None:
        anchor = (0.5 * (cfg.t_min + cfg.t_max), 0.5 * (cfg.qx_min + cfg.qx_max))
    T0, qx0 = anchor
    z = resolve_point(cfg, qx0)
    prob = ShootingProblem.for_labels(model, z, z, T0,
                                      tol_shoot=cfg.tol_shoot, tol_ode=cfg.tol_ode)
    roots = multistart_roots(prob, seed=cfg.seed)
    if len(roots) < 2:
        raise RuntimeError(
            f"multistart found {len(roots)} root(s) at anchor {anchor}; "
            "cannot seed two families"
        )
    nsq = z.norm_sq * 2.0
    ranked = sorted(roots, key=lambda r: abs(r.S.imag + 0.5 * cfg.hbar * nsq))[:4]
    best = None
    for i in range(len(ranked)):
        for j in range(i + 1, len(ranked)):
            d = abs(ranked[i].S - ranked[j].S)
            if best is None or d < best[0]:
                best = (d, ranked[i], ranked[j])
    return (best[1], best[2]), len(roots)


def _sweep_families(cfg, model, Ts, qxs, pair, anchor):
    """Continue both seed trajectories over the serpentine grid.

    Continuation steps larger than the scale at which sheet identity is
    reliably preserved can silently hop onto a different root, so coarse
    grids are traversed with intermediate sub-steps (results at sub-steps
    are discarded, they only carry the seed).
    """
    n_t, n_qx = len(Ts), len(qxs)
    path = _serpentine(n_t, n_qx)
    start = (Ts[path[0][0]], qxs[path[0][1]])
    dT = Ts[1] - Ts[0] if n_t > 1 else 0.0
    dq = qxs[1] - qxs[0] if n_qx > 1 else 0.0
    sub = max(1, int(math.ceil(dT / 0.025)), int(math.ceil(dq / 0.02)))
    results = np.empty((2, n_t, n_qx), dtype=object)
    failures = []
    for f, root in enumerate(pair):
        lead = _segment_nodes(anchor, start, 40)
        lead_res, _ = track_root(
            _problem_factory(cfg, model, lead),
            np.arange(len(lead), dtype=float), root.v0,
            refine_levels=cfg.refine_levels,
        )
        if lead_res[-1] is None:
            raise RuntimeError(f"family {f}: could not reach the sweep start")
        nodes = [(Ts[i], qxs[j]) for i, j in path]
        s_values = np.linspace(0.0, len(nodes) - 1.0, (len(nodes) - 1) * sub + 1)
        res, fails = track_root(
            _problem_factory(cfg, model, nodes),
            s_values, lead_res[-1].v0,
            refine_levels=cfg.refine_levels,
        )
        failures.extend(f"family {f}: {e}" for e in fails)
        for k, r in enumerate(res):
            if k % sub:
                continue
            i, j = path[k // sub]
            results[f, i, j] = r
    return results, failures


def _cut_edge_fn(caustic, Ts, qxs):
    """Edge predicate for the caustic cut ray ``T = T*, qx <= qx*``.

    The two-sheet structure admits no global cut-free labeling (encircling
    the caustic swaps the sheets), so one cut ray running from the caustic
    toward smaller qx is removed from the grid adjacency; the remainder is
    simply connected and all continuity-built structures (family labels,
    root branches, the combined field) share it.
    """
    if caustic is None:
        return lambda i0, j0, i1, j1: False

    def crosses(i0, j0, i1, j1):
        if i0 == i1:
            return False
        t_lo, t_hi = sorted((Ts[i0], Ts[i1]))
        if not (t_lo <= caustic.T <= t_hi):
            return False
        return qxs[j0] <= caustic.qx

    return crosses


def _traversal(gap, crosses, root_key):
    """BFS order and parents over non-gap points avoiding cut edges."""
    n_t, n_qx = gap.shape
    starts = sorted(
        ((i, j) for i in range(n_t) for j in range(n_qx) if not gap[i, j]),
        key=root_key,
    )
    if not starts:
        return [], {}
    seen = np.zeros((n_t, n_qx), dtype=bool)
    order = []
    parent = {}
    queue = deque()
    for s in starts:
        if seen[s]:
            continue
        seen[s] = True
        parent[s] = None
        queue.append(s)
        while queue:
            i, j = queue.popleft()
            order.append((i, j))
            for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                ii, jj = i + di, j + dj
                if not (0 <= ii < n_t and 0 <= jj < n_qx):
                    continue
                if seen[ii, jj] or gap[ii, jj] or crosses(i, j, ii, jj):
                    continue
                seen[ii, jj] = True
                parent[(ii, jj)] = (i, j)
                queue.append((ii, jj))
    return order, parent


def _relabel_families(grid_v0, gap, order, parent, F0):
    """Assign (f_a, f_b) by nearest-v0 matching along the shared traversal.

    Family ``a`` is the class with the larger minimum F0 over the window.
    """
    n_t, n_qx = gap.shape
    swap = np.zeros((n_t, n_qx), dtype=bool)
    for pt in order:
        par = parent[pt]
        if par is None:
            continue
        ref0 = grid_v0[1 if swap[par] else 0][par]
        d_keep = np.max(np.abs(grid_v0[0][pt] - ref0))
        d_swap = np.max(np.abs(grid_v0[1][pt] - ref0))
        swap[pt] = bool(d_swap < d_keep)

    a_index = swap.astype(int)
    f0_class0 = np.where(a_index == 0, F0[0], F0[1])
    f0_class1 = np.where(a_index == 0, F0[1], F0[0])
    valid = ~gap
    if np.nanmin(np.where(valid, f0_class1, np.nan)) > np.nanmin(
        np.where(valid, f0_class0, np.nan)
    ):
        a_index = 1 - a_index
    return a_index


def _combine_field(val_a, val_b, F0_a, F0_b, inc_a, inc_b, gap, crosses):
    """Continuity-optimized combination, grown outward from forced points.

    Per point the candidates are the always-kept family alone and the full
    sum (the optional family enters only through the sum), matching the
    span-the-plane comparison of the single-family field against the
    two-family field.  The growth respects the caustic cut, so the selected
    field carries the same branch geometry as the per-family fields and the
    tracked uniform surfaces.
    """
    n_t, n_qx = gap.shape
    out = np.full((n_t, n_qx), np.nan + 0j, dtype=complex)
    resolved = np.zeros((n_t, n_qx), dtype=bool)

    def candidates(i, j):
        cands = []
        if inc_a[i, j] and np.isfinite(val_a[i, j]):
            cands.append(val_a[i, j])
            if inc_b[i, j] and np.isfinite(val_b[i, j]):
                cands.append(val_a[i, j] + val_b[i, j])
        elif inc_b[i, j] and np.isfinite(val_b[i, j]):
            cands.append(val_b[i, j])
        return cands

    def resolve(ii, jj):
        cands = candidates(ii, jj)
        if not cands:
            out[ii, jj] = np.nan
            resolved[ii, jj] = True
            return
        neigh = []
        for ddi, ddj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            ni, nj = ii + ddi, jj + ddj
            if (0 <= ni < n_t and 0 <= nj < n_qx and resolved[ni, nj]
                    and np.isfinite(out[ni, nj]) and not crosses(ii, jj, ni, nj)):
                neigh.append(out[ni, nj])
        if len(cands) == 1 or not neigh:
            out[ii, jj] = cands[0]
        else:
            # full complex continuity: a spuriously included branch carries a
            # rapidly rotating phase that no smooth neighborhood predicts
            target = complex(np.mean(neigh))
            dists = [abs(v - target) for v in cands]
            out[ii, jj] = cands[int(np.argmin(dists))]
        resolved[ii, jj] = True

    queue = deque()
    forced = (~gap) & (~inc_a | ~inc_b)
    for i, j in map(tuple, np.argwhere(forced)):
        resolve(i, j)
        queue.append((i, j))
    if not queue:
        seeds = list(map(tuple, np.argwhere(~gap)))
        if not seeds:
            return out
        resolve(*seeds[0])
        queue.append(seeds[0])

    while True:
        while queue:
            i, j = queue.popleft()
            for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                ii, jj = i + di, j + dj
                if not (0 <= ii < n_t and 0 <= jj < n_qx):
                    continue
                if resolved[ii, jj] or gap[ii, jj] or crosses(i, j, ii, jj):
                    continue
                resolve(ii, jj)
                queue.append((ii, jj))
        # regions separated by the cut or by gaps: reseed at any unresolved
        # point (preferring one with a resolved neighbor) and keep growing
        left = [tuple(p) for p in np.argwhere(~resolved & ~gap)]
        if not left:
            break

        def has_resolved_neighbor(p):
            ii, jj = p
            return any(
                0 <= ii + d < n_t and 0 <= jj + e < n_qx and resolved[ii + d, jj + e]
                for d, e in ((1, 0), (-1, 0), (0, 1), (0, -1))
            )

        seeds_with = [p for p in left if has_resolved_neighbor(p)]
        ii, jj = (seeds_with or left)[0]
        resolve(ii, jj)
        queue.append((ii, jj))
    return out


def run_scan(cfg: ScanConfig) -> ScanGrid:
    """Execute the full pipeline on the configured window."""
    model = nelson_model(cfg)
    Ts = np.linspace(cfg.t_min, cfg.t_max, cfg.n_t)
    qxs = np.linspace(cfg.qx_min, cfg.qx_max, cfg.n_qx)
    n_t, n_qx = len(Ts), len(qxs)

    labels = [resolve_point(cfg, qx) for qx in qxs]
    qy = np.array([lab.centroid(cfg.coherent_params)[0][1] for lab in labels])
    px = np.array([lab.centroid(cfg.coherent_params)[1][0] for lab in labels])
    py = np.array([lab.centroid(cfg.coherent_params)[1][1] for lab in labels])

    anchor = (0.5 * (cfg.t_min + cfg.t_max), 0.5 * (cfg.qx_min + cfg.qx_max))
    pair, n_found = find_contributing_pair(cfg, model, anchor)
    results, failures = _sweep_families(cfg, model, Ts, qxs, pair, anchor)

    S = np.full((2, n_t, n_qx), np.nan + 0j, dtype=complex)
    G = np.full_like(S, np.nan + 0j)
    det = np.full_like(S, np.nan + 0j)
    v0 = np.full((2, n_t, n_qx, 2), np.nan + 0j, dtype=complex)
    F0 = np.full((2, n_t, n_qx), np.nan)
    vals = np.full_like(S, np.nan + 0j)
    included = np.zeros((2, n_t, n_qx), dtype=bool)
    gap = np.zeros((n_t, n_qx), dtype=bool)

    for i in range(n_t):
        for j in range(n_qx):
            rs = [results[0, i, j], results[1, i, j]]
            if rs[0] is None or rs[1] is None:
                gap[i, j] = True
                continue
            if np.max(np.abs(rs[0].v0 - rs[1].v0)) < 1e-8:
                gap[i, j] = True  # families collided; flag, never interpolate
                continue
            for f, r in enumerate(rs):
                S[f, i, j] = r.S
                G[f, i, j] = r.G
                det[f, i, j] = r.det_mvv
                v0[f, i, j] = r.v0
                try:
                    c = stokes_filter(k2_single(r, labels[j], labels[j],
                                                caustic_guard=cfg.caustic_guard),
                                      eps_stokes=cfg.eps_stokes)
                    F0[f, i, j] = c.F0
                    vals[f, i, j] = c.value
                    included[f, i, j] = c.included
                except CausticSingular:
                    F0[f, i, j] = rs[f].S.imag + cfg.hbar * labels[j].norm_sq
                    included[f, i, j] = True

    absB = (np.abs(0.75 * (S[1] - S[0]) / cfg.hbar)) ** (2.0 / 3.0)

    caustic = None
    if "uniform" in cfg.methods or "k2" in cfg.methods:
        try:
            caustic = locate_caustic_from_fields(cfg, model, Ts, qxs, absB, v0, gap)
        except CausticNotFound:
            caustic = None

    crosses = _cut_edge_fn(caustic, Ts, qxs)
    if caustic is not None:
        def root_key(pt):
            return -(abs(Ts[pt[0]] - caustic.T) + abs(qxs[pt[1]] - caustic.qx))
    else:
        def root_key(pt):
            return pt
    order, parent = _traversal(gap, crosses, root_key)

    a_index = _relabel_families(v0, gap, order, parent, F0)
    ai = a_index[None]
    val_a = np.take_along_axis(vals, ai, axis=0)[0]
    val_b = np.take_along_axis(vals, 1 - ai, axis=0)[0]
    f0_a = np.take_along_axis(F0, ai, axis=0)[0]
    f0_b = np.take_along_axis(F0, 1 - ai, axis=0)[0]
    inc_a = np.take_along_axis(included, ai, axis=0)[0]
    inc_b = np.take_along_axis(included, 1 - ai, axis=0)[0]
    k2 = _combine_field(val_a, val_b, f0_a, f0_b, inc_a, inc_b, gap, crosses)

    kun = np.full((3, n_t, n_qx), np.nan + 0j, dtype=complex)
    kun_elected = np.full((n_t, n_qx), np.nan + 0j, dtype=complex)
    elected_j, elected_sign, scores = 0, 1.0, []
    if "uniform" in cfg.methods:
        kun = _uniform_surfaces(cfg, S, G, det, a_index, labels, gap)
        elected_j, elected_sign, scores = select_uniform_branch(
            kun, k2, absB, far_threshold=cfg.far_threshold
        )
        kun_elected = elected_sign * kun[elected_j - 1]

    k_ex = None
    rel_err = None
    if "exact" in cfg.methods:
        k_ex = exact_field(cfg, Ts, qxs)
        ref = kun_elected if "uniform" in cfg.methods else k2
        with np.errstate(invalid="ignore", divide="ignore"):
            rel_err = np.abs(np.abs(k_ex) - np.abs(ref)) / np.abs(k_ex)

    return ScanGrid(
        cfg=cfg, Ts=Ts, qxs=qxs, qy=qy, px=px, py=py,
        S=S, G=G, det_mvv=det, v0=v0, F0=F0, k2_family=vals,
        included=included, gap=gap, a_index=a_index, k2=k2, absB=absB,
        kun=kun, kun_elected=kun_elected, elected_j=elected_j,
        elected_sign=elected_sign, election_scores=scores,
        k_exact=k_ex, rel_err=rel_err, caustic=caustic,
        anchor_roots_found=n_found, failures=failures,
    )


def _assign_branch_field(raw_candidates, weight, gap, passes=12):
    """Pick one candidate per point so the resulting field is smooth.

    ``raw_candidates(pt)`` returns the finite list of branch values at a
    point.  Points are first assigned in decreasing ``weight`` order (most
    branch-separated first), each taking the candidate closest to the mean
    of already-assigned grid neighbors; Jacobi relaxation then heals any
    isolated misassignments near the zeros of the field.
    """
    n_t, n_qx = gap.shape
    out = np.full((n_t, n_qx), np.nan + 0j, dtype=complex)
    pts = sorted(
        (tuple(p) for p in np.argwhere(~gap)),
        key=lambda p: -weight[p],
    )

    def neighbor_ref(i, j):
        acc = []
        for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            ii, jj = i + di, j + dj
            if 0 <= ii < n_t and 0 <= jj < n_qx and np.isfinite(out[ii, jj]):
                acc.append(out[ii, jj])
        return np.mean(acc) if acc else None

    for pt in pts:
        cands = raw_candidates(pt)
        ref = neighbor_ref(*pt)
        out[pt] = cands[0] if ref is None else min(cands, key=lambda c: abs(c - ref))
    for _ in range(passes):
        changed = False
        for pt in pts:
            cands = raw_candidates(pt)
            ref = neighbor_ref(*pt)
            if ref is None:
                continue
            best = min(cands, key=lambda c: abs(c - ref))
            if best != out[pt]:
                out[pt] = best
                changed = True
        if not changed:
            break
    return out


def _uniform_surfaces(cfg, S, G, det, a_index, labels, gap):
    """Evaluate the three uniform surfaces with globally smooth branches.

    ``B = [(3i/4hbar)(S_b - S_a)]^{2/3}`` is a smooth single-valued field on
    the whole window (the formula is covariant under the label swap combined
    with ``w -> -w``), so its three-fold branch is fixed as a field; then
    ``w = delta / B`` satisfies ``w^3 = delta`` and ``w^2 = B`` exactly with
    no further choice.  The two square-root branches of the prefactor ratios
    are fixed the same way as smooth sign fields.
    """
    n_t, n_qx = gap.shape
    ai = a_index[None]
    S_a = np.take_along_axis(S, ai, axis=0)[0]
    S_b = np.take_along_axis(S, 1 - ai, axis=0)[0]
    G_a = np.take_along_axis(G, ai, axis=0)[0]
    G_b = np.take_along_axis(G, 1 - ai, axis=0)[0]
    det_a = np.take_along_axis(det, ai, axis=0)[0]
    det_b = np.take_along_axis(det, 1 - ai, axis=0)[0]

    delta = 0.75j * (S_b - S_a) / cfg.hbar
    rot = np.exp(2j * np.pi / 3.0)

    def b_cands(pt):
        d = delta[pt]
        if d == 0 or not np.isfinite(d):
            return [0.0j]
        b0 = d ** (2.0 / 3.0)
        return [b0, b0 * rot, b0 * np.conj(rot)]

    B = _assign_branch_field(b_cands, np.abs(delta), gap)
    with np.errstate(invalid="ignore", divide="ignore"):
        w = np.where((delta != 0) & np.isfinite(B) & (B != 0), delta / B, 0.0 + 0.0j)

    raw_a = np.sqrt((-w / det_a).astype(complex)) * np.exp(1j * G_a / cfg.hbar)
    raw_b = np.sqrt((w / det_b).astype(complex)) * np.exp(1j * G_b / cfg.hbar)
    ha = _assign_branch_field(lambda pt: [raw_a[pt], -raw_a[pt]], np.abs(raw_a), gap)
    hb = _assign_branch_field(lambda pt: [raw_b[pt], -raw_b[pt]], np.abs(raw_b), gap)
    sign_a = np.where(np.abs(ha - raw_a) <= np.abs(ha + raw_a), 1, -1)
    sign_b = np.where(np.abs(hb - raw_b) <= np.abs(hb + raw_b), 1, -1)

    kun = np.full((3, n_t, n_qx), np.nan + 0j, dtype=complex)
    for pt in map(tuple, np.argwhere(~gap)):
        i, j = pt
        nsq = 2.0 * labels[j].norm_sq
        ui = UniformInputs(
            S_a=complex(S_a[pt]), S_b=complex(S_b[pt]),
            G_a=complex(G_a[pt]), G_b=complex(G_b[pt]),
            det_a=complex(det_a[pt]), det_b=complex(det_b[pt]),
            norm_N=math.exp(-0.5 * nsq), hbar=cfg.hbar,
            w=complex(w[pt]), sign_a=int(sign_a[pt]), sign_b=int(sign_b[pt]),
        )
        for s in range(3):
            kun[(s,) + pt] = k_uniform(ui, s + 1, delta_caustic=cfg.delta_caustic)
    return kun


def exact_field(cfg: ScanConfig, Ts, qxs) -> np.ndarray:
    """Exact propagator magnitude data over a (T, qx) lattice.

    One split-operator propagation per qx column harvests every requested T
    (the state label depends on qx only).
    """
    gs = cfg.grid_spec
    V = bare_potential(cfg)
    Ts = np.asarray(Ts, dtype=float)
    out = np.full((len(Ts), len(qxs)), np.nan + 0j, dtype=complex)
    for j, qx in enumerate(qxs):
        lab = resolve_point(cfg, qx)
        ket = coherent_wavefunction(lab, cfg.coherent_params, gs)
        ov, _ = propagate_snapshots(ket, V, Ts, gs, cfg.hbar, ket)
        out[:, j] = ov
    return out


# ---------------------------------------------------------------------------
# caustic localization


def locate_caustic(grid: ScanGrid, threshold: float = 0.1,
                   target_absB: float = 1e-6) -> CausticRecord:
    """Locate and refine the caustic from a completed scan's fields."""
    return locate_caustic_from_fields(
        grid.cfg, nelson_model(grid.cfg), grid.Ts, grid.qxs, grid.absB,
        grid.v0, grid.gap, threshold=threshold, target_absB=target_absB,
    )


def locate_caustic_from_fields(cfg, model, Ts, qxs, absB, v0, gap,
                               threshold: float = 0.1,
                               target_absB: float = 1e-6) -> CausticRecord:
    """Find and refine the coalescence point starting from the grid minimum.

    The grid minimum of ``|B|`` seeds a 2D Newton iteration on the complex
    function ``g(T, qx) = [(3i/4hbar)(S_b - S_a)]^{2/3}`` (branch-tracked),
    which is asymptotically linear in the parameters near a fold and
    therefore converges quadratically where a direct Newton on the action
    difference stalls.  Both families are re-shot at every evaluation with
    tightened tolerances.
    """
    masked = np.where(gap, np.inf, absB)
    i, j = np.unravel_index(int(np.argmin(masked)), masked.shape)
    if not np.isfinite(masked[i, j]) or masked[i, j] > threshold:
        raise CausticNotFound(
            f"grid minimum |B| = {masked[i, j]:.3f} above threshold {threshold}"
        )
    return refine_caustic(cfg, model, (Ts[i], qxs[j]),
                          (v0[0, i, j].copy(), v0[1, i, j].copy()),
                          target_absB=target_absB)


def refine_caustic(cfg, model, start, v0_pair, target_absB=1e-6,
                   max_iter=60) -> CausticRecord:
    # tightened tolerances: near the target the action difference sits only
    # two orders above the shooting/integration noise floor
    tol = min(cfg.tol_ode, 1e-13)
    tol_shoot = min(cfg.tol_shoot, 1e-12)

    def prob(T, qx):
        z = resolve_point(cfg, qx)
        return ShootingProblem.for_labels(model, z, z, T,
                                          tol_shoot=tol_shoot, tol_ode=tol)

    va, vb = v0_pair

    def g_at(T, qx, va, vb, prev_g):
        ra = newton_shoot(prob(T, qx), va)
        rb = newton_shoot(prob(T, qx), vb)
        delta = 0.75j * (rb.S - ra.S) / cfg.hbar
        if delta == 0:
            return 0.0j, ra, rb
        g0 = delta ** (2.0 / 3.0)
        cands = [g0, g0 * np.exp(2j * np.pi / 3.0), g0 * np.exp(-2j * np.pi / 3.0)]
        if prev_g is not None and prev_g != 0:
            g0 = min(cands, key=lambda c: abs(c - prev_g))
        return g0, ra, rb

    T, qx = float(start[0]), float(start[1])
    g, ra, rb = g_at(T, qx, va, vb, None)
    va, vb = ra.v0, rb.v0
    it = 0
    for it in range(1, max_iter + 1):
        absB = abs(g)
        if absB < target_absB:
            break
        h = max(1e-7, 0.02 * absB)
        gT, _, _ = g_at(T + h, qx, va, vb, g)
        gQ, _, _ = g_at(T, qx + h, va, vb, g)
        J = np.array([[(gT.real - g.real) / h, (gQ.real - g.real) / h],
                      [(gT.imag - g.imag) / h, (gQ.imag - g.imag) / h]])
        try:
            dx = np.linalg.solve(J, -np.array([g.real, g.imag]))
        except np.linalg.LinAlgError:
            break
        n = float(np.linalg.norm(dx))
        if n > 0.05:
            dx *= 0.05 / n
        T += dx[0]
        qx += dx[1]
        g, ra, rb = g_at(T, qx, va, vb, g)
        va, vb = ra.v0, rb.v0

    return CausticRecord(
        T=float(T), qx=float(qx), absB=float(abs(g)),
        abs_dS=float(abs(rb.S - ra.S)),
        v0_distance=float(np.max(np.abs(ra.v0 - rb.v0))),
        n_iterations=it, converged=bool(abs(g) < target_absB),
    )


def continue_loop(cfg, model, center, half_widths, v0_init, n_per_edge=30):
    """Continue one family around a closed rectangle in ``(T, qx)``.

    Returns the trajectory at the loop base point before and after the
    circuit; encircling the caustic lands on the other family.
    """
    T0, q0 = center
    hT, hq = half_widths
    corners = [(T0 - hT, q0 - hq), (T0 + hT, q0 - hq), (T0 + hT, q0 + hq),
               (T0 - hT, q0 + hq), (T0 - hT, q0 - hq)]
    nodes = []
    for p0, p1 in zip(corners[:-1], corners[1:]):
        nodes.extend(_segment_nodes(p0, p1, n_per_edge)[:-1])
    nodes.append(corners[0])
    fac = _problem_factory(cfg, model, nodes)
    start = newton_shoot(fac(0.0), v0_init)
    res, fails = track_root(fac, np.arange(len(nodes), dtype=float), start.v0,
                            refine_levels=cfg.refine_levels)
    if fails or res[-1] is None:
        raise RuntimeError(f"loop continuation lost the root: {fails}")
    return start, res[-1]


# ---------------------------------------------------------------------------
# export


_CSV_HEADER = ("T,qx,qy,px,py,abs_K2_fa,abs_K2_fb,abs_K2,abs_Kun_1,abs_Kun_2,"
               "abs_Kun_3,abs_Kun_elected,abs_K_exact,rel_err,F0_fa,F0_fb,absB,gap_flag")


def export(grid: ScanGrid, out_dir, cut_qx: float | None = None) -> dict:
    """Write the scan CSV, the JSON metadata, and an optional line cut.

    Returns the mapping of artifact names to paths.  I/O failures carry the
    offending path in the exception message.
    """
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise OSError(f"cannot create output directory {out}: {e}") from e

    paths = {"scan": out / "scan.csv", "metadata": out / "metadata.json"}
    absK2a = np.abs(grid.k2_a)
    absK2b = np.abs(grid.k2_b)
    absK2 = np.abs(grid.k2)
    absKex = np.abs(grid.k_exact) if grid.k_exact is not None else None
    try:
        with open(paths["scan"], "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(_CSV_HEADER.split(","))
            for j in range(len(grid.qxs)):
                for i in range(len(grid.Ts)):
                    row = [
                        grid.Ts[i], grid.qxs[j], grid.qy[j], grid.px[j], grid.py[j],
                        absK2a[i, j], absK2b[i, j], absK2[i, j],
                        abs(grid.kun[0, i, j]), abs(grid.kun[1, i, j]),
                        abs(grid.kun[2, i, j]), abs(grid.kun_elected[i, j]),
                        absKex[i, j] if absKex is not None else float("nan"),
                        grid.rel_err[i, j] if grid.rel_err is not None else float("nan"),
                        grid.F0_a[i, j], grid.F0_b[i, j], grid.absB[i, j],
                        int(grid.gap[i, j]),
                    ]
                    w.writerow([repr(float(x)) if not isinstance(x, int) else x
                                for x in row])
    except OSError as e:
        raise OSError(f"cannot write {paths['scan']}: {e}") from e

    meta = {
        "version": __version__,
        "config": _config_dict(grid.cfg),
        "anchor_roots_found": grid.anchor_roots_found,
        "gaps": [[int(i), int(j)] for i, j in np.argwhere(grid.gap)],
        "caustic": asdict(grid.caustic) if grid.caustic else None,
        "elected_surface": grid.elected_j,
        "elected_sign": grid.elected_sign,
        "election_scores": grid.election_scores,
        "error_quantiles": error_quantiles(grid),
        "failures": [str(f) for f in grid.failures],
    }
    try:
        with open(paths["metadata"], "w") as fh:
            json.dump(meta, fh, indent=2)
            fh.write("\n")
    except OSError as e:
        raise OSError(f"cannot write {paths['metadata']}: {e}") from e

    if cut_qx is not None:
        paths["cut"] = out / "cut.csv"
        _export_cut(grid, cut_qx, paths["cut"])
    return paths


def _config_dict(cfg: ScanConfig) -> dict:
    d = asdict(cfg)
    d["methods"] = list(d["methods"])
    d["box_x"] = list(d["box_x"])
    d["box_y"] = list(d["box_y"])
    return d


def error_quantiles(grid: ScanGrid) -> dict | None:
    """Quantiles of the relative error over valid exact-reference points."""
    if grid.rel_err is None:
        return None
    vals = grid.rel_err[~grid.gap]
    vals = vals[np.isfinite(vals)]
    if len(vals) == 0:
        return None
    return {
        "n_points": int(len(vals)),
        "q50": float(np.quantile(vals, 0.50)),
        "q90": float(np.quantile(vals, 0.90)),
        "q95": float(np.quantile(vals, 0.95)),
        "max": float(np.max(vals)),
    }


def _export_cut(grid: ScanGrid, cut_qx: float, path):
    j = int(np.argmin(np.abs(grid.qxs - cut_qx)))
    inv_pa = np.sqrt(np.abs(grid.det_a[:, j]))
    inv_pb = np.sqrt(np.abs(grid.det_b[:, j]))
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["T", "qx", "abs_K2_fa", "abs_K2_fb", "abs_Kun_elected",
                        "abs_K_exact", "inv_absP_fa", "inv_absP_fb"])
            for i in range(len(grid.Ts)):
                kex = abs(grid.k_exact[i, j]) if grid.k_exact is not None else float("nan")
                w.writerow([repr(float(x)) for x in (
                    grid.Ts[i], grid.qxs[j], abs(grid.k2_a[i, j]), abs(grid.k2_b[i, j]),
                    abs(grid.kun_elected[i, j]), kex, inv_pa[i], inv_pb[i],
                )])
    except OSError as e:
        raise OSError(f"cannot write {path}: {e}") from e

"""Command-line interface: scan, point, cut, caustic and selftest commands.

Exit codes: 0 success, 1 configuration error, 2 scan completed with gaps,
3 I/O failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

import numpy as np

from .scan import (
    CausticNotFound,
    EnergyInfeasible,
    ScanConfig,
    bare_potential,
    export,
    locate_caustic,
    nelson_model,
    resolve_point,
    run_scan,
)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_GAPS = 2
EXIT_IO = 3


def _load_config(args) -> ScanConfig:
    if getattr(args, "config", None):
        cfg = ScanConfig.from_file(args.config)
    else:
        cfg = ScanConfig()
    overrides = {}
    for item in getattr(args, "set", None) or []:
        if "=" not in item:
            raise ValueError(f"--set expects key=value, got {item!r}")
        key, val = (s.strip() for s in item.split("=", 1))
        if key not in ScanConfig.__dataclass_fields__:
            raise ValueError(f"unknown config key {key!r}")
        from .scan import _coerce

        overrides[key] = _coerce(ScanConfig, key, val)
    if overrides:
        cfg = dataclasses.replace(cfg, **overrides)
    return cfg


def _cmd_scan(args) -> int:
    cfg = _load_config(args)
    grid = run_scan(cfg)
    paths = export(grid, args.out, cut_qx=args.cut)
    n_gaps = int(grid.gap.sum())
    print(f"scan complete: {grid.Ts.size} x {grid.qxs.size} points, {n_gaps} gaps")
    if grid.caustic is not None:
        c = grid.caustic
        print(f"caustic: T = {c.T:.6f}, qx = {c.qx:.6f}, |B| = {c.absB:.2e}")
    if grid.elected_j:
        print(f"elected uniform surface: {grid.elected_j} (sign {grid.elected_sign:+.0f})")
    for name, p in paths.items():
        print(f"wrote {name}: {p}")
    return EXIT_GAPS if n_gaps else EXIT_OK


def _cmd_point(args) -> int:
    cfg = _load_config(args)
    from .semiclassical import k2_single, stokes_filter
    from .trajectory import ShootingProblem, multistart_roots
    from .uniform import k_uniform, uniform_inputs

    model = nelson_model(cfg)
    z = resolve_point(cfg, args.qx)
    qbar, pbar = z.centroid(cfg.coherent_params)
    print(f"point: T = {args.t}, qx = {args.qx}")
    print(f"  centroid q = ({qbar[0]:.6f}, {qbar[1]:.6f}), p = ({pbar[0]:.6f}, {pbar[1]:.6f})")
    prob = ShootingProblem.for_labels(model, z, z, args.t,
                                      tol_shoot=cfg.tol_shoot, tol_ode=cfg.tol_ode)
    roots = multistart_roots(prob, seed=cfg.seed)
    print(f"  distinct converged trajectories: {len(roots)}")
    contribs = []
    for k, r in enumerate(roots):
        c = stokes_filter(k2_single(r, z, z), eps_stokes=cfg.eps_stokes)
        contribs.append(c)
        print(f"  root {k}: v0 = {np.round(r.v0, 6)}")
        print(f"          S = {r.S:.8f}  G = {r.G:.8f}")
        print(f"          det M_vv = {r.det_mvv:.6f}  F0 = {c.F0:.6f}"
              f"  |K2 contrib| = {abs(c.value):.6f}  included = {c.included}")
    if len(roots) >= 2:
        ui = uniform_inputs(roots[0], roots[1])
        print(f"  pair (0,1): |B| = {abs(ui.B):.6f}")
        for j in (1, 2, 3):
            print(f"  K_un (contour {j}, principal branches): {k_uniform(ui, j):.6f}")
    if args.exact:
        from .exact_qm import coherent_wavefunction, propagate

        gs = cfg.grid_spec
        ket = coherent_wavefunction(z, cfg.coherent_params, gs)
        val = ket.overlap(propagate(ket, bare_potential(cfg), args.t, gs, cfg.hbar))
        print(f"  exact K = {val:.8f}  |K| = {abs(val):.6f}")
    return EXIT_OK


def _cmd_cut(args) -> int:
    cfg = _load_config(args)
    half = args.half_width
    cfg = dataclasses.replace(
        cfg, qx_min=args.qx - half, qx_max=args.qx + half, n_qx=3, n_t=args.nt
    )
    grid = run_scan(cfg)
    paths = export(grid, args.out, cut_qx=args.qx)
    print(f"cut at qx = {args.qx} with {args.nt} time samples")
    print(f"wrote {paths['cut']}")
    return EXIT_GAPS if int(grid.gap.sum()) else EXIT_OK


def _cmd_caustic(args) -> int:
    cfg = _load_config(args)
    cfg = dataclasses.replace(cfg, methods=("k2",),
                              n_t=args.nt, n_qx=args.nqx)
    grid = run_scan(cfg)
    try:
        rec = grid.caustic or locate_caustic(grid)
    except CausticNotFound as e:
        print(f"no caustic: {e}")
        return EXIT_CONFIG
    print(json.dumps(dataclasses.asdict(rec), indent=2))
    return EXIT_OK


def _cmd_selftest(args) -> int:
    ok = True

    def report(name, passed, detail=""):
        nonlocal ok
        ok &= passed
        print(f"  [{'PASS' if passed else 'FAIL'}] {name} {detail}")

    print("harmonic exactness oracle:")
    from .hamiltonians import harmonic_coherent_propagator, harmonic_smoothed
    from .phase_core import CoherentLabel, CoherentParams
    from .semiclassical import k2_single
    from .trajectory import ShootingProblem, newton_shoot

    cp = CoherentParams(0.2, 0.2, 0.05)
    w = cp.hbar / cp.b_x**2
    rng = np.random.default_rng(1)
    worst = 0.0
    for _ in range(20):
        z1 = CoherentLabel(*(rng.normal(size=2) + 1j * rng.normal(size=2)))
        z2 = CoherentLabel(*(rng.normal(size=2) + 1j * rng.normal(size=2)))
        T = rng.uniform(0.1, 10.0)
        prob = ShootingProblem.for_labels(harmonic_smoothed(w, w, cp), z1, z2, T)
        res = newton_shoot(prob, np.conj(z2.z) * np.exp(-1j * w * T))
        val = k2_single(res, z1, z2).value
        worst = max(worst, abs(val - harmonic_coherent_propagator(z1, z2, T, w, w)))
    report("quadratic propagator vs analytic oscillator", worst < 1e-8, f"(max {worst:.2e})")

    print("Airy contour oracle:")
    from .uniform import airy_contour_quadrature, airy_f

    rng = np.random.default_rng(2)
    worst = 0.0
    for _ in range(25):
        xi = rng.uniform(0, 20.0) * np.exp(1j * rng.uniform(-np.pi, np.pi))
        for j in (1, 2, 3):
            ref = airy_contour_quadrature(j, xi)
            worst = max(worst, abs(airy_f(j, xi) - ref) / max(1.0, abs(ref)))
    report("series/asymptotics vs contour quadrature", worst < 1e-9, f"(max {worst:.2e})")

    worst = 0.0
    rng = np.random.default_rng(3)
    for _ in range(25):
        xi = rng.uniform(0, 10.0) * np.exp(1j * rng.uniform(-np.pi, np.pi))
        s = airy_f(1, xi) + airy_f(2, xi) + airy_f(3, xi)
        scale = max(1.0, *(abs(airy_f(j, xi)) for j in (1, 2, 3)))
        worst = max(worst, abs(s) / scale)
    report("three-contour connection identity", worst < 1e-10, f"(max {worst:.2e})")

    print("zero-time identity:")
    from .phase_core import overlap
    from .scan import nelson_model as _nm

    cfg = ScanConfig()
    model = _nm(cfg)
    worst = 0.0
    for qx in (0.3, 0.6, 0.9):
        z = resolve_point(cfg, qx)
        res = newton_shoot(
            ShootingProblem.for_labels(model, z, z, 1e-6), np.conj(z.z)
        )
        val = k2_single(res, z, z).value
        worst = max(worst, abs(abs(val) - abs(overlap(z, z))))
    report("K2 magnitude at T = 1e-6", worst < 1e-5, f"(max {worst:.2e})")

    return EXIT_OK if ok else EXIT_CONFIG


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="scprop",
        description="Semiclassical coherent-state propagators through a phase-space caustic",
    )
    sub = p.add_subparsers(dest="command", required=True)

    def add_config_args(sp):
        sp.add_argument("--config", help="flat key = value configuration file")
        sp.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override one configuration key (repeatable)")

    sp = sub.add_parser("scan", help="full pipeline over the (T, qx) window")
    add_config_args(sp)
    sp.add_argument("--out", default="scan_out", help="output directory")
    sp.add_argument("--cut", type=float, default=None,
                    help="also export a line cut at this qx")
    sp.set_defaults(func=_cmd_scan)

    sp = sub.add_parser("point", help="verbose diagnostics at one (T, qx)")
    add_config_args(sp)
    sp.add_argument("--t", type=float, required=True)
    sp.add_argument("--qx", type=float, required=True)
    sp.add_argument("--exact", action="store_true", help="also run the exact reference")
    sp.set_defaults(func=_cmd_point)

    sp = sub.add_parser("cut", help="fixed-qx line over the time window")
    add_config_args(sp)
    sp.add_argument("--qx", type=float, required=True)
    sp.add_argument("--nt", type=int, default=161)
    sp.add_argument("--half-width", type=float, default=0.005)
    sp.add_argument("--out", default="cut_out")
    sp.set_defaults(func=_cmd_cut)

    sp = sub.add_parser("caustic", help="locate and refine the phase-space caustic")
    add_config_args(sp)
    sp.add_argument("--nt", type=int, default=21)
    sp.add_argument("--nqx", type=int, default=21)
    sp.set_defaults(func=_cmd_caustic)

    sp = sub.add_parser("selftest", help="run the built-in oracles")
    sp.set_defaults(func=_cmd_selftest)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, EnergyInfeasible, FileNotFoundError, RuntimeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as e:
        print(f"i/o error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

import csv
import json

import numpy as np
import pytest

from scprop.cli import main as cli_main
from scprop.scan import (
    CausticNotFound,
    EnergyInfeasible,
    ScanConfig,
    export,
    locate_caustic,
    resolve_point,
    run_scan,
)

FAST = dict(t_min=6.8, t_max=7.0, qx_min=0.4, qx_max=0.7, n_t=5, n_qx=5,
            methods=("k2", "uniform"))


@pytest.fixture(scope="module")
def fast_grid():
    return run_scan(ScanConfig(**FAST))


def test_resolve_point_protocol():
    cfg = ScanConfig()
    z = resolve_point(cfg, 0.6)
    qbar, pbar = z.centroid(cfg.coherent_params)
    assert qbar[1] == pytest.approx(0.4, abs=1e-14)
    # energy closes: E = |p|^2/2 + (qy - qx^2/2)^2 + mu qx^2 / 2
    E = 0.5 * pbar @ pbar + (qbar[1] - 0.5 * qbar[0] ** 2) ** 2 + 0.05 * qbar[0] ** 2
    assert E == pytest.approx(cfg.E, abs=1e-12)
    # |p|^2 = 2 (0.5 - 0.0484 - 0.018) = 0.8672; theta = 140 deg quadrant
    assert pbar @ pbar == pytest.approx(0.8672, abs=1e-12)
    assert pbar[0] < 0 < pbar[1]


def test_resolve_point_feasible_at_window_corners():
    cfg = ScanConfig()
    for qx in (cfg.qx_min, cfg.qx_max):
        resolve_point(cfg, qx)  # must not raise


def test_energy_infeasible():
    cfg = ScanConfig(E=0.05)
    with pytest.raises(EnergyInfeasible):
        resolve_point(cfg, 1.0)


def test_config_file_parsing(tmp_path):
    path = tmp_path / "scan.cfg"
    path.write_text(
        "# comment line\n"
        "E = 0.5\n"
        "n_qx = 7   # inline comment\n"
        "methods = k2, uniform\n"
        "box_x = -5, 5\n"
    )
    cfg = ScanConfig.from_file(path)
    assert cfg.n_qx == 7
    assert cfg.methods == ("k2", "uniform")
    assert cfg.box_x == (-5.0, 5.0)

    bad = tmp_path / "bad.cfg"
    bad.write_text("no_such_key = 3\n")
    with pytest.raises(ValueError):
        ScanConfig.from_file(bad)


def test_config_validation():
    with pytest.raises(ValueError):
        ScanConfig(qx_min=0.9, qx_max=0.2)
    with pytest.raises(ValueError):
        ScanConfig(methods=("k2", "bogus"))


def test_fast_scan_structure(fast_grid):
    g = fast_grid
    assert g.gap.sum() == 0
    # two distinct families everywhere
    sep = np.max(np.abs(g.v0[0] - g.v0[1]), axis=-1)
    assert np.nanmin(sep) > 1e-3
    assert np.all(np.isfinite(g.k2[~g.gap]))
    assert g.elected_j in (1, 2, 3)
    assert np.all(np.isfinite(np.abs(g.kun_elected[~g.gap])))


def test_no_caustic_in_short_window(fast_grid):
    with pytest.raises(CausticNotFound):
        locate_caustic(fast_grid, threshold=0.01)


def test_export_schema_and_roundtrip(tmp_path, fast_grid):
    g = fast_grid
    # inject a synthetic exact field so the error statistics path is exercised
    rng = np.random.default_rng(0)
    g.k_exact = np.abs(g.kun_elected) * (1.0 + 0.02 * rng.normal(size=g.k2.shape))
    with np.errstate(invalid="ignore"):
        g.rel_err = np.abs(np.abs(g.k_exact) - np.abs(g.kun_elected)) / np.abs(g.k_exact)
    paths = export(g, tmp_path / "out", cut_qx=0.55)

    with open(paths["scan"]) as fh:
        rows = list(csv.reader(fh))
    header = ("T,qx,qy,px,py,abs_K2_fa,abs_K2_fb,abs_K2,abs_Kun_1,abs_Kun_2,"
              "abs_Kun_3,abs_Kun_elected,abs_K_exact,rel_err,F0_fa,F0_fb,absB,gap_flag")
    assert rows[0] == header.split(",")
    assert len(rows) - 1 == g.cfg.n_qx * g.cfg.n_t

    meta = json.loads(paths["metadata"].read_text())
    col = rows[0].index("rel_err")
    vals = np.array([float(r[col]) for r in rows[1:] if r[-1] == "0"])
    vals = vals[np.isfinite(vals)]
    assert meta["error_quantiles"]["q50"] == pytest.approx(np.quantile(vals, 0.5), abs=1e-12)
    assert meta["error_quantiles"]["q90"] == pytest.approx(np.quantile(vals, 0.9), abs=1e-12)
    assert meta["error_quantiles"]["max"] == pytest.approx(np.max(vals), abs=1e-12)

    with open(paths["cut"]) as fh:
        cut_rows = list(csv.reader(fh))
    assert cut_rows[0] == ["T", "qx", "abs_K2_fa", "abs_K2_fb", "abs_Kun_elected",
                           "abs_K_exact", "inv_absP_fa", "inv_absP_fb"]
    assert len(cut_rows) - 1 == g.cfg.n_t


def test_scan_determinism(tmp_path):
    cfg = ScanConfig(**{**FAST, "n_t": 3, "n_qx": 3})
    p1 = export(run_scan(cfg), tmp_path / "a")
    p2 = export(run_scan(cfg), tmp_path / "b")
    assert p1["scan"].read_bytes() == p2["scan"].read_bytes()


def test_cli_selftest_passes(capsys):
    assert cli_main(["selftest"]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out


def test_cli_scan_end_to_end(tmp_path, capsys):
    rc = cli_main([
        "scan", "--out", str(tmp_path / "run"),
        "--set", "t_min=6.8", "--set", "t_max=7.0",
        "--set", "qx_min=0.4", "--set", "qx_max=0.7",
        "--set", "n_t=3", "--set", "n_qx=3",
        "--set", "methods=k2,uniform",
    ])
    assert rc == 0
    assert (tmp_path / "run" / "scan.csv").exists()
    assert (tmp_path / "run" / "metadata.json").exists()


def test_cli_config_error_exit_code(tmp_path):
    assert cli_main(["scan", "--set", "bogus_key=1"]) == 1
    bad = tmp_path / "bad.cfg"
    bad.write_text("qx_min = 2.0\nqx_max = 1.0\n")
    assert cli_main(["scan", "--config", str(bad)]) == 1


def test_cli_point_diagnostics(capsys):
    rc = cli_main(["point", "--t", "7.5", "--qx", "0.6"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "distinct converged trajectories" in out
    assert "F0" in out

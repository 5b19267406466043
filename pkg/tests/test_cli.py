"""End-to-end runs of the command surface on a small scene.

The tests call main(argv) in-process and check exit codes, emitted files,
and manifests.  Exit contract: 0 success (invert: tolerance met), 2 usage
or format errors, 3 iteration cap reached without meeting the tolerance.
"""

import hashlib
import json

import numpy as np
import pytest
import yaml

from convexscat import (
    Disk,
    IncidentWave,
    InversionConfig,
    Scenario,
    make_kgrid,
    read_cauchy,
    read_coefficient,
    read_history,
    save_scenario,
    write_coefficient,
)
from convexscat.cli import main

pytestmark = pytest.mark.filterwarnings("ignore::UserWarning")


@pytest.fixture(scope="module")
def scene_file(tmp_path_factory):
    sc = Scenario(
        "small-disk",
        (Disk(center=(0.0, 0.4), radius=0.25, value=1.5),),
        noise_level=0.05,
        seed=1,
        config=InversionConfig(n_cells=16, n_k=10, n_modes=3),
    )
    path = tmp_path_factory.mktemp("scene") / "small.yaml"
    save_scenario(sc, path)
    return path


@pytest.fixture(scope="module")
def sim_dir(scene_file, tmp_path_factory):
    out = tmp_path_factory.mktemp("sim")
    assert main(["simulate", "--scenario", str(scene_file), "--out", str(out)]) == 0
    return out


@pytest.fixture(scope="module")
def config_file(tmp_path_factory):
    # grid settings in the config must match the data header
    path = tmp_path_factory.mktemp("cfg") / "small.yaml"
    path.write_text(yaml.safe_dump({"n_cells": 16, "n_k": 10, "n_modes": 3}))
    return path


@pytest.fixture(scope="module")
def inv_dir(sim_dir, config_file, tmp_path_factory):
    out = tmp_path_factory.mktemp("inv")
    rc = main(["invert", "--data", str(sim_dir / "cauchy_noisy.txt"),
               "--config", str(config_file), "--out", str(out)])
    assert rc == 0
    return out


def _manifest(d):
    return json.loads((d / "manifest.json").read_text())


def _sha(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


def test_simulate_outputs_and_manifest(sim_dir, scene_file):
    for name in ("truth.txt", "cauchy_clean.txt", "cauchy_noisy.txt"):
        assert (sim_dir / name).exists()

    doc = _manifest(sim_dir)
    assert doc["command"] == "simulate"
    assert doc["seed"] == 1
    assert doc["config"]["scenario"] == "small-disk"
    assert doc["inputs"] == {str(scene_file): _sha(scene_file)}
    for path, digest in doc["outputs"].items():
        assert hashlib.sha256(open(path, "rb").read()).hexdigest() == digest

    truth = read_coefficient(sim_dir / "truth.txt")
    assert truth.values.max() == pytest.approx(1.5)
    noisy = read_cauchy(sim_dir / "cauchy_noisy.txt")
    assert noisy.noise_level == 0.05 and noisy.seed == 1


def test_simulate_is_deterministic(scene_file, sim_dir, tmp_path):
    assert main(["simulate", "--scenario", str(scene_file), "--out", str(tmp_path)]) == 0
    for name in ("truth.txt", "cauchy_clean.txt", "cauchy_noisy.txt"):
        assert (tmp_path / name).read_bytes() == (sim_dir / name).read_bytes()
    assert sorted(_manifest(tmp_path)["outputs"].values()) == sorted(
        _manifest(sim_dir)["outputs"].values()
    )


def test_simulate_seed_override(scene_file, sim_dir, tmp_path):
    rc = main(["simulate", "--scenario", str(scene_file), "--out", str(tmp_path),
               "--seed", "7"])
    assert rc == 0
    assert _manifest(tmp_path)["seed"] == 7
    same = ("truth.txt", "cauchy_clean.txt")
    for name in same:
        assert (tmp_path / name).read_bytes() == (sim_dir / name).read_bytes()
    assert (tmp_path / "cauchy_noisy.txt").read_bytes() != (sim_dir / "cauchy_noisy.txt").read_bytes()
    assert read_cauchy(tmp_path / "cauchy_noisy.txt").seed == 7


def test_simulate_null_scene_gives_incident_traces(tmp_path):
    assert main(["simulate", "--scenario", "null", "--out", str(tmp_path)]) == 0

    truth = read_coefficient(tmp_path / "truth.txt")
    assert np.all(truth.values == 0.0)
    # zero noise level: the clean and noisy files are the same data
    assert (tmp_path / "cauchy_clean.txt").read_bytes() == (tmp_path / "cauchy_noisy.txt").read_bytes()

    cd = read_cauchy(tmp_path / "cauchy_clean.txt")
    wave = IncidentWave()
    x1 = cd.grid.nodes
    x2 = cd.grid.nodes[cd.grid.gamma_row]
    for m, k in enumerate(cd.kgrid.midpoints):
        u = wave.field(x1, x2, k)
        assert np.allclose(cd.g0[:, m], u, atol=1e-13)
        assert np.allclose(cd.g1[:, m], wave.dx2(x1, x2, k), atol=1e-13)


def test_simulate_unknown_scenario_is_a_usage_error(tmp_path, capsys):
    rc = main(["simulate", "--scenario", "example9", "--out", str(tmp_path)])
    assert rc == 2
    err = capsys.readouterr().err
    assert "error:" in err and "example1" in err


def test_invert_outputs_and_exit_code(inv_dir, sim_dir):
    coeff = read_coefficient(inv_dir / "coefficient.txt")
    assert coeff.values.min() >= 0.0
    assert coeff.values.max() > 0.5

    records = read_history(inv_dir / "history.txt")
    assert [r.n for r in records] == list(range(len(records)))
    assert records[-1].J_value <= records[0].J_value

    doc = _manifest(inv_dir)
    assert doc["command"] == "invert"
    assert doc["config"]["n_cells"] == 16
    assert str(sim_dir / "cauchy_noisy.txt") in doc["inputs"]


def test_invert_is_deterministic(sim_dir, config_file, inv_dir, tmp_path):
    rc = main(["invert", "--data", str(sim_dir / "cauchy_noisy.txt"),
               "--config", str(config_file), "--out", str(tmp_path)])
    assert rc == 0
    for name in ("coefficient.txt", "history.txt"):
        assert (tmp_path / name).read_bytes() == (inv_dir / name).read_bytes()


def test_invert_reads_config_overrides(sim_dir, tmp_path, capsys):
    cfg_path = tmp_path / "cfg.yaml"
    cfg_path.write_text(yaml.safe_dump({"n_cells": 16, "n_k": 10, "n_modes": 3,
                                        "max_iterations": 1, "tolerance": 1e-12}))
    rc = main(["invert", "--data", str(sim_dir / "cauchy_noisy.txt"),
               "--config", str(cfg_path), "--out", str(tmp_path)])
    # cap reached without meeting the (unreachably small) tolerance
    assert rc == 3
    assert len(read_history(tmp_path / "history.txt")) == 2
    assert _manifest(tmp_path)["config"]["max_iterations"] == 1
    assert "iterations: 1" in capsys.readouterr().out


def test_invert_no_carleman_runs_the_comparison(sim_dir, config_file, tmp_path):
    rc = main(["invert", "--data", str(sim_dir / "cauchy_noisy.txt"),
               "--config", str(config_file), "--out", str(tmp_path), "--no-carleman"])
    assert rc == 0  # the comparison run has no convergence contract
    assert "--no-carleman" in _manifest(tmp_path)["command"]
    coeff = read_coefficient(tmp_path / "coefficient.txt")
    assert np.isfinite(coeff.values).all()


def test_invert_rejects_grid_mismatch(sim_dir, tmp_path, capsys):
    # no config: defaults (28 cells) disagree with the 16-cell data header
    rc = main(["invert", "--data", str(sim_dir / "cauchy_noisy.txt"), "--out", str(tmp_path)])
    assert rc == 2
    assert "does not match config" in capsys.readouterr().err


def test_invert_rejects_malformed_data(tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("not a data file\n")
    rc = main(["invert", "--data", str(bad), "--out", str(tmp_path)])
    assert rc == 2
    assert "error:" in capsys.readouterr().err


def test_invert_rejects_unknown_config_keys(sim_dir, tmp_path, capsys):
    cfg_path = tmp_path / "cfg.yaml"
    cfg_path.write_text(yaml.safe_dump({"stepsize": 1e-3}))
    rc = main(["invert", "--data", str(sim_dir / "cauchy_noisy.txt"),
               "--config", str(cfg_path), "--out", str(tmp_path)])
    assert rc == 2
    assert "stepsize" in capsys.readouterr().err


def test_export_tables(inv_dir, tmp_path):
    rc = main(["export", "--result", str(inv_dir / "coefficient.txt"),
               "--row", "0.4", "--out", str(tmp_path)])
    assert rc == 0

    coeff = read_coefficient(inv_dir / "coefficient.txt")
    g = coeff.grid
    i_row = int(np.argmin(np.abs(g.nodes - 0.4)))

    rows = [ln.split() for ln in (tmp_path / "cross_section.txt").read_text().splitlines()
            if not ln.startswith("#")]
    assert len(rows) == g.n_nodes
    x1 = np.array([float(r[0]) for r in rows])
    a = np.array([float(r[1]) for r in rows])
    assert np.array_equal(x1, g.nodes)
    assert np.array_equal(a, coeff.values[i_row])

    heat = [ln for ln in (tmp_path / "heatmap.txt").read_text().splitlines()
            if not ln.startswith("#")]
    assert len(heat) == g.n_points


def test_export_snaps_to_nearest_row_with_warning(inv_dir, tmp_path):
    with pytest.warns(UserWarning, match="nearest row"):
        rc = main(["export", "--result", str(inv_dir / "coefficient.txt"),
                   "--row", "0.43", "--out", str(tmp_path)])
    assert rc == 0
    header = (tmp_path / "cross_section.txt").read_text().splitlines()[0]
    assert "0.4" in header


def test_export_zero_coefficient_gives_zero_rows(tmp_path):
    from convexscat import Coefficient, Grid2D

    grid = Grid2D(0.8, 8)
    path = tmp_path / "zero.txt"
    write_coefficient(Coefficient(grid=grid, values=np.zeros((9, 9))), path)
    assert main(["export", "--result", str(path), "--row", "0.4", "--out", str(tmp_path)]) == 0
    rows = [ln.split() for ln in (tmp_path / "heatmap.txt").read_text().splitlines()
            if not ln.startswith("#")]
    assert all(float(r[2]) == 0.0 for r in rows)


def test_validate_command_reports_all_green(capsys):
    assert main(["validate"]) == 0
    out = capsys.readouterr().out
    assert out.count("[pass]") == 5
    assert "5/5 checks passed" in out
    assert "FAIL" not in out

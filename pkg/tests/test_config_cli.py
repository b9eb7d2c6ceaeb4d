import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from horizonflux import CflViolationError, GridState, compute_weights, Kernel
from horizonflux.cli import main
from horizonflux.config import config_to_text, parse_config, parse_config_text
from horizonflux.outputs import write_solution_csv

MINIMAL = """
[kernel]
delta = 0.05

[flux]
family = godunov

[problem]
name = burgers_shock

[grid]
dx = 0.03125

[time]
mesh_ratio = 0.9
"""


# -- parsing ------------------------------------------------------------------


def test_minimal_config_gets_defaults():
    cfg = parse_config_text(MINIMAL)
    assert cfg.cfl_safety == 0.9
    assert cfg.profile == "uniform"
    assert cfg.boundary == "constant_extension"
    assert (cfg.x_left, cfg.x_right) == (-2.0, 3.0)
    assert (cfg.window_left, cfg.window_right) == (-0.5, 1.5)
    assert cfg.final_time == 0.5
    assert cfg.out_dir == "out"


def test_unknown_keys_and_sections_rejected():
    with pytest.raises(ValueError, match="valid keys"):
        parse_config_text(MINIMAL.replace("dx = 0.03125", "dx = 0.03125\ncells = 4"))
    with pytest.raises(ValueError, match="valid sections"):
        parse_config_text(MINIMAL + "\n[mesh]\ndx = 1\n")


def test_missing_required_key_rejected():
    with pytest.raises(ValueError, match=r"\[grid\] dx"):
        parse_config_text(MINIMAL.replace("[grid]\ndx = 0.03125\n", ""))


def test_unknown_flux_lists_valid_keys():
    with pytest.raises(ValueError, match="engquist_osher, godunov"):
        parse_config_text(MINIMAL.replace("family = godunov", "family = roe"))


def test_bad_values_rejected():
    with pytest.raises(ValueError, match="positive"):
        parse_config_text(MINIMAL.replace("delta = 0.05", "delta = -1"))
    with pytest.raises(ValueError, match="expects a float"):
        parse_config_text(MINIMAL.replace("dx = 0.03125", "dx = tiny"))


def test_cfl_inconsistent_mesh_ratio_rejected_at_load():
    # rarefaction data box [-1, 1]: L1 + L2 = 2, so 0.9 is too large
    text = MINIMAL.replace("name = burgers_shock", "name = burgers_rarefaction")
    with pytest.raises(CflViolationError, match="dt/dx <= 0.5"):
        parse_config_text(text)
    relaxed = text.replace("mesh_ratio = 0.9", "mesh_ratio = 0.9\nenforce_cfl = false")
    assert parse_config_text(relaxed).enforce_cfl is False


def test_overrides_apply_before_validation():
    cfg = parse_config_text(MINIMAL, {"grid.dx": "0.0625", "kernel.delta": "0.125"})
    assert cfg.dx == 0.0625
    assert cfg.delta == 0.125
    with pytest.raises(ValueError, match="override"):
        parse_config_text(MINIMAL, {"grid.spacing": "1"})


def test_config_round_trips_through_text():
    cfg = parse_config_text(MINIMAL, {"flux.family": "lax_friedrichs",
                                      "flux.lf_lambda": "0.7", "time.mesh_ratio": "0.4"})
    assert parse_config_text(config_to_text(cfg)) == cfg


# -- writers ------------------------------------------------------------------


def test_solution_csv_shape(tmp_path):
    path = tmp_path / "solution.csv"
    write_solution_csv([], path)
    assert path.read_text() == "t,x_center,u\n"
    state = GridState(dx=1.0, x0=0.0, values=np.array([0.0, 1.0, 0.0]))
    after = GridState(dx=1.0, x0=0.0, values=np.array([0.0, 0.75, 0.25]), time=0.5)
    write_solution_csv([state, after], path)
    lines = path.read_text().strip().split("\n")
    assert len(lines) == 1 + 6  # header + 2 snapshots x 3 cells
    assert lines[1] == "0,0.5,0"


def test_weights_csv(tmp_path):
    from horizonflux.outputs import write_weights_csv

    weights = compute_weights(Kernel(2.0, "uniform"), 1.0)
    write_weights_csv(weights, tmp_path / "w.csv")
    assert (tmp_path / "w.csv").read_text() == "k,W_k\n1,0.5\n2,0.25\n"


# -- CLI ----------------------------------------------------------------------


def write_config(tmp_path, text=MINIMAL, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_cli_weights_prints_table(tmp_path, capsys):
    code = main(["weights", "--delta", "2.0", "--dx", "1.0"])
    out = capsys.readouterr().out
    assert code == 0
    assert "1,0.5,0.5" in out
    assert "defect" in out


def test_cli_run_writes_solution(tmp_path, capsys):
    cfg = write_config(tmp_path)
    code = main(["run", "--config", cfg, "--out", str(tmp_path / "res")])
    assert code == 0
    csv = (tmp_path / "res" / "solution.csv").read_text()
    assert csv.startswith("t,x_center,u\n")
    assert len(csv.strip().split("\n")) == 1 + 9 * 160  # snapshots x cells


def test_cli_check_passes_on_compliant_run(tmp_path):
    cfg = write_config(tmp_path)
    code = main(["check", "--config", cfg, "--out", str(tmp_path / "chk")])
    assert code == 0
    payload = json.loads((tmp_path / "chk" / "invariants.json").read_text())
    assert payload["passed"] is True
    names = {c["name"] for c in payload["checks"]}
    assert {"max_principle", "tvd", "cell_entropy"} <= names


def test_cli_check_fails_on_cfl_violation(tmp_path):
    text = MINIMAL.replace("mesh_ratio = 0.9", "mesh_ratio = 2.2\nenforce_cfl = false")
    cfg = write_config(tmp_path, text)
    code = main(["check", "--config", cfg, "--out", str(tmp_path / "chk")])
    assert code == 2
    payload = json.loads((tmp_path / "chk" / "invariants.json").read_text())
    assert payload["passed"] is False


def test_cli_study_writes_tables(tmp_path):
    text = MINIMAL + "\n[study]\nregime = joint_limit\nlevels = 2\ncoupling = 2.0\n"
    cfg = write_config(tmp_path, text)
    code = main(["study", "--config", cfg, "--out", str(tmp_path / "st")])
    assert code == 0
    table = (tmp_path / "st" / "study.csv").read_text().strip().split("\n")
    assert table[0] == "level,dx,delta,dt,n_cells,measure,eoc"
    assert len(table) == 3
    report = json.loads((tmp_path / "st" / "study.json").read_text())
    assert report["passed"] is True
    plot = (tmp_path / "st" / "study_plot.dat").read_text().strip().split("\n")
    assert len(plot) == 3


def test_cli_usage_error_exits_1(tmp_path):
    result = subprocess.run(
        [sys.executable, "-m", "horizonflux", "frobnicate"],
        capture_output=True, text=True, cwd=tmp_path,
    )
    assert result.returncode == 1
    missing = subprocess.run(
        [sys.executable, "-m", "horizonflux", "run", "--config", "nope.cfg"],
        capture_output=True, text=True, cwd=tmp_path,
    )
    assert missing.returncode == 1
    assert "error" in missing.stderr.lower()


def test_cli_flag_overrides(tmp_path, capsys):
    cfg = write_config(tmp_path)
    code = main(["run", "--config", cfg, "--dx", "0.0625", "--T", "0.25",
                 "--out", str(tmp_path / "o2")])
    assert code == 0
    rows = (tmp_path / "o2" / "solution.csv").read_text().strip().split("\n")
    assert len(rows) == 1 + 9 * 80


def test_cli_rerun_is_byte_identical(tmp_path):
    cfg = write_config(tmp_path)
    out = tmp_path / "res"
    first = {}
    for attempt in range(2):
        assert main(["run", "--config", cfg, "--out", str(out)]) == 0
        assert main(["check", "--config", cfg, "--out", str(out)]) == 0
        payload = {
            name: (out / name).read_bytes()
            for name in ("solution.csv", "invariants.json")
        }
        if attempt == 0:
            first = payload
        else:
            assert payload == first

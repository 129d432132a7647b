import csv
import xml.etree.ElementTree as ET

import pytest

from openrcd.cli import main

SMALL_CFG = """
n = 4
alpha = 1.0
beta = 2.0
b = 1.0
p_U = 0.9
horizon = 50
replications = 200
seed = 3
"""


@pytest.fixture
def cfg_file(tmp_path):
    path = tmp_path / "exp.cfg"
    path.write_text(SMALL_CFG, encoding="utf-8")
    return str(path)


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_simulate_ensemble_csv(cfg_file, tmp_path, capsys):
    out = str(tmp_path / "run")
    assert main(["simulate", "--config", cfg_file, "--out", out]) == 0
    rows = read_rows(f"{out}/ensemble.csv")
    assert len(rows) == 51
    assert list(rows[0]) == [
        "k", "mean_C", "ci_lo", "ci_hi", "bound_general", "bound_quadratic",
    ]
    for row in rows:
        assert float(row["ci_lo"]) <= float(row["mean_C"]) <= float(row["ci_hi"])
    # round-trippable floats and the bound columns seeded at mean_C[0]
    assert float(rows[0]["bound_general"]) == float(rows[0]["mean_C"])
    header = capsys.readouterr().out
    assert "open-system rate" in header
    assert "stable" in header


def test_simulate_single_run_trajectory(cfg_file, tmp_path):
    path = tmp_path / "single.cfg"
    path.write_text(SMALL_CFG.replace("replications = 200", "replications = 1"))
    out = str(tmp_path / "run")
    assert main(["simulate", "--config", str(path), "--out", out]) == 0
    rows = read_rows(f"{out}/trajectory.csv")
    assert len(rows) == 51
    assert list(rows[0]) == ["k", "event", "C_k", "subopt", "min_shift"]
    assert rows[0]["event"] == "init"
    assert {row["event"] for row in rows[1:]} <= {"update", "replace"}


def test_simulate_preset_and_file_combine(cfg_file, tmp_path):
    out = str(tmp_path / "run")
    # preset fills every key; the tiny file then shrinks the run
    assert main(["simulate", "--preset", "fig1", "--config", cfg_file, "--out", out]) == 0
    rows = read_rows(f"{out}/ensemble.csv")
    assert len(rows) == 51


def test_simulate_requires_some_source(tmp_path, capsys):
    assert main(["simulate", "--out", str(tmp_path)]) == 2
    assert "config" in capsys.readouterr().err


def test_simulate_unknown_key_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text(SMALL_CFG + "mystery = 1\n", encoding="utf-8")
    assert main(["simulate", "--config", str(bad), "--out", str(tmp_path)]) == 2
    assert "mystery" in capsys.readouterr().err


def test_simulate_rerun_is_byte_identical(cfg_file, tmp_path):
    out_a, out_b = str(tmp_path / "a"), str(tmp_path / "b")
    main(["simulate", "--config", cfg_file, "--out", out_a])
    main(["simulate", "--config", cfg_file, "--out", out_b])
    with open(f"{out_a}/ensemble.csv", "rb") as fa, open(f"{out_b}/ensemble.csv", "rb") as fb:
        assert fa.read() == fb.read()


def test_bounds_table_prints_rows(capsys):
    assert main(["bounds", "--n", "5", "--kappa", "1.2", "--b", "1", "--pu", "0.9,0.95,0.8"]) == 0
    out = capsys.readouterr().out
    assert out.count("\n") >= 4
    assert "UNSTABLE" in out            # the 0.8 row sits past the threshold
    assert "steady state (printed)" in out


def test_bounds_bad_pu_list_exits_2(capsys):
    assert main(["bounds", "--n", "5", "--kappa", "1.2", "--b", "1", "--pu", "a,b"]) == 2
    assert "pu" in capsys.readouterr().err


def test_worstcase_csv_and_svg(tmp_path):
    out = str(tmp_path / "w")
    code = main([
        "worstcase", "--n", "2:4", "--kappa", "2,5", "--b", "1",
        "--budget", "8", "--seed", "7", "--out", out,
    ])
    assert code == 0
    rows = read_rows(f"{out}/worstcase.csv")
    assert len(rows) == 6
    assert list(rows[0]) == [
        "n", "kappa", "empirical_max", "bound_general", "bound_quadratic", "conjecture",
    ]
    for row in rows:
        assert float(row["empirical_max"]) <= float(row["bound_general"])
    tree = ET.parse(f"{out}/worstcase.svg")
    ns = "{http://www.w3.org/2000/svg}"
    polylines = tree.getroot().findall(f".//{ns}polyline")
    assert len(polylines) == 4          # per kappa: search line + conjecture overlay
    assert all(p.get("points") for p in polylines)


def test_worstcase_preset(tmp_path):
    out = str(tmp_path / "w")
    assert main(["worstcase", "--preset", "fig2-analogue", "--n", "2:3",
                 "--budget", "8", "--out", out]) == 0
    rows = read_rows(f"{out}/worstcase.csv")
    assert {row["kappa"] for row in rows} == {"2", "5"}


def test_worstcase_rerun_is_byte_identical(tmp_path):
    args = ["worstcase", "--n", "2:3", "--kappa", "2", "--b", "1",
            "--budget", "8", "--seed", "5"]
    main(args + ["--out", str(tmp_path / "a")])
    main(args + ["--out", str(tmp_path / "b")])
    for name in ("worstcase.csv", "worstcase.svg"):
        with open(tmp_path / "a" / name, "rb") as fa, open(tmp_path / "b" / name, "rb") as fb:
            assert fa.read() == fb.read()


def test_worstcase_bad_range_exits_2(capsys):
    assert main(["worstcase", "--n", "4:2", "--kappa", "2", "--b", "1"]) == 2
    assert "n" in capsys.readouterr().err


def test_solver_failure_exits_3(cfg_file, tmp_path, monkeypatch, capsys):
    from openrcd.allocation import NonConvergenceError
    import openrcd.cli as cli_mod

    def explode(config, replications=None, base_seed=None):
        raise NonConvergenceError("stuck bracket")

    monkeypatch.setattr(cli_mod, "run_ensemble", explode)
    assert main(["simulate", "--config", cfg_file, "--out", str(tmp_path)]) == 3
    assert "stuck bracket" in capsys.readouterr().err

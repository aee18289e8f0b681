import json
import subprocess
import sys

import numpy as np
import pytest

from bicmcap import cli
from bicmcap.dmc import save_matrix

from .helpers import bsc, product_bsc


def run(argv, capsys):
    code = cli.main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def files(tmp_path):
    paths = {}
    for name, H in {
        "bsc": bsc(0.1),
        "eye": np.eye(4),
        "pbsc": product_bsc(0.1, 2),
        "three": np.full((2, 3), 0.5),
    }.items():
        if name == "three":
            paths[name] = tmp_path / "three.txt"
            paths[name].write_text("0.5 0.5 0.5\n0.5 0.5 0.5\n")
        else:
            paths[name] = tmp_path / f"{name}.txt"
            save_matrix(H, paths[name])
    paths["dir"] = tmp_path
    return paths


# -- dmc-capacity ---------------------------------------------------------------------


def test_dmc_capacity_bsc(files, capsys):
    code, out, _ = run(["dmc-capacity", files["bsc"]], capsys)
    rec = json.loads(out)
    assert code == 0
    assert rec["value"] == pytest.approx(0.531004, abs=1e-6)
    assert rec["schema_version"] == cli.SCHEMA_VERSION
    np.testing.assert_allclose(rec["input_pmf"], [0.5, 0.5], atol=1e-6)


def test_dmc_capacity_identity(files, capsys):
    code, out, _ = run(["dmc-capacity", files["eye"]], capsys)
    assert json.loads(out)["value"] == pytest.approx(2.0, abs=1e-9)


def test_dmc_capacity_malformed_row(files, capsys):
    bad = files["dir"] / "bad.txt"
    bad.write_text("0.9 0.1\n0.1 0.9 0.0\n")
    code, _, err = run(["dmc-capacity", bad], capsys)
    assert code == 2
    assert "0.1 0.9 0.0" in err and ":2:" in err


def test_dmc_capacity_missing_file(files, capsys):
    code, _, err = run(["dmc-capacity", files["dir"] / "nope.txt"], capsys)
    assert code == 2 and "no such file" in err


def test_non_stochastic_column_named(files, capsys):
    bad = files["dir"] / "bad.txt"
    bad.write_text("0.9 0.2\n0.1 0.9\n")
    code, _, err = run(["dmc-capacity", bad], capsys)
    assert code == 2 and "column 2" in err


# -- bicm-dmc ---------------------------------------------------------------------------


def test_bicm_dmc_identity(files, capsys):
    code, out, _ = run(["bicm-dmc", files["eye"]], capsys)
    rec = json.loads(out)
    assert code == 0
    assert rec["value"] == pytest.approx(2.0)
    assert rec["bits"] == [0.5, 0.5]
    assert rec["outer_passes"] >= 1 and rec["inner_iterations"]


def test_bicm_dmc_product_bsc_with_exhaustive_check(files, capsys):
    code, out, err = run(["bicm-dmc", files["pbsc"], "--exhaustive-check"], capsys)
    rec = json.loads(out)
    assert code == 0
    assert rec["value"] == pytest.approx(1.062009, abs=1e-6)
    assert rec["exhaustive_match"] is True
    assert "match within 1e-3" in err
    assert rec["uniform_bicm"] <= rec["value"] + 1e-9 <= rec["cm_capacity"] + 2e-9


def test_bicm_dmc_non_power_of_two(files, capsys):
    code, _, err = run(["bicm-dmc", files["three"]], capsys)
    assert code == 2 and "power of two" in err


def test_bicm_dmc_cost_file_length_mismatch(files, capsys):
    costs = files["dir"] / "w.txt"
    costs.write_text("1\n2\n3\n")
    code, _, err = run(["bicm-dmc", files["eye"], "--cost-file", costs, "--lambda", "0.1"], capsys)
    assert code == 2 and "3 costs" in err


def test_bicm_dmc_with_penalty(files, capsys):
    costs = files["dir"] / "w.txt"
    costs.write_text("# powers\n9\n1\n9\n1\n")
    code, out, _ = run(
        ["bicm-dmc", files["pbsc"], "--cost-file", costs, "--lambda", "0.05"], capsys
    )
    rec = json.loads(out)
    assert code == 0
    assert rec["realized_cost"] < 5.0
    assert rec["objective"] == pytest.approx(rec["value"] - 0.05 * rec["realized_cost"])


def test_bicm_dmc_starts(files, capsys):
    code, out, _ = run(["bicm-dmc", files["pbsc"], "--starts", "0.5,0.5;0.2,0.7"], capsys)
    assert code == 0
    code, _, err = run(["bicm-dmc", files["pbsc"], "--starts", "0.5"], capsys)
    assert code == 2 and "expected 2" in err


def test_iteration_cap_gives_exit_3(files, capsys, monkeypatch):
    original = cli.BacmConfig

    def capped(**kw):
        return original(max_outer=1, max_inner=1, **kw)

    monkeypatch.setattr(cli, "BacmConfig", capped)
    H = np.random.default_rng(0).dirichlet(np.ones(6), size=8).T
    path = files["dir"] / "rand.txt"
    save_matrix(H / H.sum(axis=0), path)
    code, out, _ = run(["bicm-dmc", path], capsys)
    assert code == 3
    assert "not_converged" in json.loads(out)["flags"]


# -- bicm-awgn ---------------------------------------------------------------------------


@pytest.fixture(scope="module")
def awgn_json():
    argv = ["bicm-awgn", "--m", "2", "--snr-db", "8", "--gamma-grid", "1.2,1.4,1.6"]
    outputs = []
    for _ in range(2):
        proc = subprocess.run(
            [sys.executable, "-m", "bicmcap.cli", *argv], capture_output=True, text=True
        )
        outputs.append((proc.returncode, proc.stdout))
    return outputs


def test_bicm_awgn_record(awgn_json):
    code, out = awgn_json[0]
    rec = json.loads(out)
    assert code == 0
    assert rec["uniform_bicm"] <= rec["value"] + 1e-9 <= rec["cm_capacity"] + 2e-9
    assert rec["cm_capacity"] <= rec["awgn_capacity"]
    assert rec["gap_percent"] == pytest.approx(100 * (1 - rec["value"] / rec["awgn_capacity"]))
    assert rec["gamma"] in (1.2, 1.4, 1.6)
    assert set(rec["bisection_evaluations"]) <= {16}


def test_bicm_awgn_is_deterministic(awgn_json):
    assert awgn_json[0] == awgn_json[1]


def test_bicm_awgn_csv_single_row(capsys):
    code, out, _ = run(
        ["bicm-awgn", "--m", "1", "--snr-db", "3", "--gamma-grid", "1.0", "--format", "csv"],
        capsys,
    )
    lines = out.splitlines()
    assert code == 0
    assert lines[0] == cli.CSV_HEADER_COMMENT
    assert lines[1].split(",") == cli.COLUMNS
    assert len(lines) == 3


def test_bicm_awgn_input_errors(capsys):
    assert run(["bicm-awgn", "--m", "7", "--snr-db", "3"], capsys)[0] == 2
    assert run(["bicm-awgn", "--m", "2", "--snr-db", "inf"], capsys)[0] == 2
    assert run(["bicm-awgn", "--m", "2", "--snr-db", "3", "--gamma-grid", "a,b"], capsys)[0] == 2
    assert run(["bicm-awgn", "--m", "2"], capsys)[0] == 2


def test_output_file(tmp_path, capsys):
    out = tmp_path / "r.json"
    code, stdout, _ = run(
        ["bicm-awgn", "--m", "1", "--snr-db", "0", "--gamma-grid", "0.9", "--out", out], capsys
    )
    assert code == 0 and stdout == ""
    assert json.loads(out.read_text())["m"] == 1


# -- sweep ---------------------------------------------------------------------------------


def test_sweep_empty_config(tmp_path, capsys):
    cfg = tmp_path / "empty.csv"
    cfg.write_text("m,snr_db\n")
    code, out, _ = run(["sweep", cfg], capsys)
    assert code == 0
    assert out.splitlines() == [cli.CSV_HEADER_COMMENT, ",".join(cli.COLUMNS)]


def test_sweep_rows_duplicates_and_failures(tmp_path, capsys):
    cfg = tmp_path / "cfg.csv"
    cfg.write_text(
        "m,snr_db,gamma_grid\n1,3,1.0\n1,3,1.0\n9,3,\n2,6,\n"
    )
    code, out, _ = run(["sweep", cfg], capsys)
    records = cli.read_csv_records(out)
    assert len(records) == 4
    assert records[0]["value"] == records[1]["value"]
    assert records[2]["error"] and "InputError" in records[2]["error"]
    assert records[3]["uniform_bicm"] < records[3]["value"] <= records[3]["cm_capacity"] + 2e-9
    # a failed row is reported through the exit status
    assert code == 3


def test_sweep_missing_column(tmp_path, capsys):
    cfg = tmp_path / "cfg.csv"
    cfg.write_text("m\n2\n")
    assert run(["sweep", cfg], capsys)[0] == 2


# -- records ---------------------------------------------------------------------------------


def _sample_record():
    rec = cli.new_record("bicm-dmc", {"lambda": 0.1, "starts": None})
    rec.update(
        m=3, n_out=12, value=0.1 + 0.2, objective=1 / 3, lam=0.1, realized_cost=2.0 / 7,
        bits=[1 / 3, 0.5, 2 / 3], uniform_bicm=np.pi / 10, cm_capacity=np.e / 5,
        exhaustive_value=0.123456789012345678, exhaustive_match=True,
        outer_passes=3, inner_iterations=[4, 1, 1], derivative_evaluations=90,
        bisection_evaluations=[16, 16], flags=["below_target"],
    )
    return rec


def test_csv_round_trip_is_lossless():
    rec = _sample_record()
    back = cli.read_csv_records(cli.records_to_csv([rec]))[0]
    for key in cli.COLUMNS:
        assert back[key] == rec[key], key


def test_json_round_trip_is_lossless():
    rec = _sample_record()
    back = cli.read_json_records(cli.records_to_json([rec]))[0]
    for key in cli.COLUMNS:
        assert back[key] == rec[key], key


def test_timing_is_opt_in(files, capsys):
    _, out, _ = run(["dmc-capacity", files["bsc"]], capsys)
    assert json.loads(out)["wall_time"] is None
    _, out, _ = run(["dmc-capacity", files["bsc"], "--timing"], capsys)
    assert json.loads(out)["wall_time"] > 0


def test_console_script_entry_point(files):
    proc = subprocess.run(["bicmcap", "dmc-capacity", str(files["eye"])], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["value"] == pytest.approx(2.0)

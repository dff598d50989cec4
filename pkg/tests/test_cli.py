"""Command-line interface: exit codes, report files, and round trips."""

import csv
import json

import numpy as np
import pytest
from click.testing import CliRunner

from mcdirac.cli import main


@pytest.fixture
def runner():
    return CliRunner()


def test_symbols_verify_passes(runner, tmp_path):
    out = tmp_path / "report.json"
    res = runner.invoke(main, ["symbols-verify", "--out", str(out)])
    assert res.exit_code == 0, res.output
    payload = json.loads(out.read_text())
    assert payload["pass"] is True
    assert all(c["status"] == "MATCH" for c in payload["checks"])
    # resolved config is written next to the report
    cfg = json.loads(out.with_suffix(".config.json").read_text())
    assert cfg["config"]["command"] == "symbols-verify"


def test_symbols_verify_negative_control(runner):
    res = runner.invoke(main, ["symbols-verify", "--perturb"])
    assert res.exit_code == 2
    payload = json.loads(res.output)
    assert payload["pass"] is False
    assert any(c["status"] != "MATCH" for c in payload["checks"])


def test_specfun_eval(runner):
    res = runner.invoke(main, ["specfun", "eval", "--fn", "G", "--s", "1.0"])
    assert res.exit_code == 0
    assert abs(float(res.output) - 2.0 / 3.0) < 1e-12
    res = runner.invoke(main, ["specfun", "eval", "--fn", "Q", "--s", "2.0", "--t", "1.0"])
    assert res.exit_code == 0


def test_specfun_rejects_bad_domain(runner):
    res = runner.invoke(main, ["specfun", "eval", "--fn", "F", "--s", "-1.0"])
    assert res.exit_code == 4


def test_curvature_dump(runner):
    res = runner.invoke(main, ["curvature"])
    assert res.exit_code == 0
    payload = json.loads(res.output)
    assert len(payload["density"]["pureH"]) == 3
    assert len(payload["density"]["sandwich"]) == 4


def test_chern_bott_small_grid(runner):
    res = runner.invoke(main, ["chern", "--case", "bott", "--grid", "120x60"])
    assert res.exit_code == 0
    payload = json.loads(res.output)
    assert payload["rounded"] == -1


def test_chern_rejects_malformed_grid(runner):
    res = runner.invoke(main, ["chern", "--case", "bott", "--grid", "oops"])
    assert res.exit_code == 4


def test_zeta_writes_traces_csv(runner, tmp_path):
    out = tmp_path / "zeta.json"
    res = runner.invoke(
        main, ["zeta", "--profile", "P1", "--n", "1", "--N", "6", "--out", str(out)]
    )
    assert res.exit_code == 0, res.output
    payload = json.loads(out.read_text())
    assert payload["rows"][0]["kernel_dim"] == 2
    csv_rows = list(csv.reader(out.with_suffix(".traces.csv").open()))
    assert csv_rows[0] == ["N", "t", "trace"]
    assert len(csv_rows) == 1 + 25


def test_zeta_rejects_bad_cutoff_list(runner):
    res = runner.invoke(main, ["zeta", "--N", "8,oops"])
    assert res.exit_code == 4


def _write_field_csv(path, values):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["# i, j, row-major re/im pairs"])
        for i in range(values.shape[0]):
            for j in range(values.shape[1]):
                flat = values[i, j].reshape(-1)
                w.writerow(
                    [i, j] + [x for z in flat for x in (float(z.real), float(z.imag))]
                )


def test_diag_check_round_trip(runner, tmp_path):
    from mcdirac.chern import bott_projection

    values = np.eye(2) + bott_projection((40, 40)).values
    path = tmp_path / "field.csv"
    _write_field_csv(path, values)
    res = runner.invoke(
        main, ["diag-check", "--input", str(path), "--domain", "sphere"]
    )
    assert res.exit_code == 0, res.output
    payload = json.loads(res.output)
    cherns = sorted(b["chern"] for b in payload["bands"])
    assert cherns == [-1, 1]
    assert payload["diagonalizable"] is False


def test_diag_check_missing_file(runner, tmp_path):
    res = runner.invoke(main, ["diag-check", "--input", str(tmp_path / "nope.csv")])
    assert res.exit_code == 4


def test_diag_check_degenerate_field_is_numerical_failure(runner, tmp_path):
    values = np.broadcast_to(np.eye(2, dtype=complex), (6, 6, 2, 2)).copy()
    path = tmp_path / "flat.csv"
    _write_field_csv(path, values)
    res = runner.invoke(main, ["diag-check", "--input", str(path)])
    assert res.exit_code == 3

import json
import math
import os
import subprocess
import sys

import numpy as np
import pytest

import lambdaq.basisopt as bopt
import lambdaq.cli as cli
from lambdaq.chem import load_basis, parse_basis, save_basis
from lambdaq.cli import (EXIT_CAP, EXIT_IO, EXIT_OK, EXIT_PARSE, EXIT_SCF,
                         main, validate_report)
from lambdaq.hamiltonian import write_fcidump
from lambdaq.scf import SCFConvergenceError

from conftest import one_orbital_ham


def read_report(outdir, command):
    with open(os.path.join(str(outdir), f"{command}-report.json")) as fh:
        return json.load(fh)


def test_norm_from_fcidump_hand_values(tmp_path):
    dump = str(tmp_path / "one.fcidump")
    write_fcidump(one_orbital_ham(a=0.5, v=0.25, e_core=1.0), dump)
    assert main(["norm", "--fcidump", dump,
                 "--output-dir", str(tmp_path)]) == EXIT_OK
    doc = read_report(tmp_path, "norm")
    assert doc["schema_version"] == 1
    assert doc["status"] == "ok"
    assert doc["payload_kind"] == "norm_report"
    assert len(doc["provenance"]["fcidump_hash"]) == 64
    assert "code_version" in doc["provenance"]
    pay = doc["payload"]
    assert pay["n"] == 1 and pay["n_electrons"] == 2
    assert pay["e_hf"] is None
    assert pay["lambda_c"] == pytest.approx(1.5625, abs=1e-14)
    assert pay["lambda_t"] == pytest.approx(0.625, abs=1e-14)
    assert pay["lambda_v"] == pytest.approx(0.0625, abs=1e-14)
    assert pay["lambda_q"] == pytest.approx(2.25, abs=1e-14)
    assert pay["lambda_eff"] == pytest.approx(0.6875, abs=1e-14)
    # f = (0.5 - 0.125) + 0.25 = 0.625; single leaf w = 0.5
    assert pay["n_df"] == 1
    assert pay["lambda_df"] == pytest.approx(0.625 + 0.25 * 0.25, abs=1e-13)
    assert pay["df_reconstruction_error"] == pytest.approx(0.0, abs=1e-14)


def test_norm_from_geometry(tmp_path):
    assert main(["norm", "--geometry", "h2", "--basis", "sto-3g",
                 "--output-dir", str(tmp_path)]) == EXIT_OK
    pay = read_report(tmp_path, "norm")["payload"]
    assert pay["n"] == 2
    assert pay["e_hf"] == pytest.approx(-1.11668439, abs=1e-6)
    assert pay["lambda_c"] == pytest.approx(0.09886390916155952, abs=1e-10)
    assert pay["lambda_t"] == pytest.approx(0.7879674165966895, abs=1e-10)
    assert pay["lambda_v"] == pytest.approx(1.0970831448551437, abs=1e-10)
    assert pay["lambda_df"] == pytest.approx(1.6551464124612232, abs=1e-10)
    assert pay["n_df"] == 4


def test_missing_fcidump_exits_io_without_report(tmp_path):
    assert main(["norm", "--fcidump", str(tmp_path / "absent.fcidump"),
                 "--output-dir", str(tmp_path)]) == EXIT_IO
    assert not os.path.exists(tmp_path / "norm-report.json")


def test_source_exclusivity(tmp_path):
    assert main(["norm", "--output-dir", str(tmp_path)]) == EXIT_PARSE
    dump = str(tmp_path / "one.fcidump")
    write_fcidump(one_orbital_ham(0.5, 0.25), dump)
    assert main(["norm", "--fcidump", dump, "--geometry", "h2",
                 "--basis", "sto-3g",
                 "--output-dir", str(tmp_path)]) == EXIT_PARSE


def test_reports_byte_identical(tmp_path):
    d1, d2 = tmp_path / "a", tmp_path / "b"
    for d in (d1, d2):
        assert main(["norm", "--geometry", "lih", "--basis", "sto-3g",
                     "--output-dir", str(d)]) == EXIT_OK
    b1 = (d1 / "norm-report.json").read_bytes()
    b2 = (d2 / "norm-report.json").read_bytes()
    assert b1 == b2


def test_schema_check_accepts_own_reports(tmp_path, capsys):
    assert main(["norm", "--geometry", "h2", "--basis", "sto-3g",
                 "--output-dir", str(tmp_path)]) == EXIT_OK
    report = str(tmp_path / "norm-report.json")
    assert main(["schema-check", "--report", report,
                 "--output-dir", str(tmp_path)]) == EXIT_OK
    assert "valid (norm_report)" in capsys.readouterr().out


def test_schema_check_rejects_corruption(tmp_path):
    missing = str(tmp_path / "nope.json")
    assert main(["schema-check", "--report", missing,
                 "--output-dir", str(tmp_path)]) == EXIT_IO
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["schema-check", "--report", str(bad),
                 "--output-dir", str(tmp_path)]) == EXIT_PARSE
    wrong = tmp_path / "wrong.json"
    wrong.write_text(json.dumps({"schema_version": 99}))
    assert main(["schema-check", "--report", str(wrong),
                 "--output-dir", str(tmp_path)]) == EXIT_PARSE
    # NaN smuggled into a payload is a schema violation
    assert main(["norm", "--geometry", "h2", "--basis", "sto-3g",
                 "--output-dir", str(tmp_path)]) == EXIT_OK
    doc = read_report(tmp_path, "norm")
    doc["payload"]["lambda_t"] = float("nan")
    nan_path = tmp_path / "nan.json"
    nan_path.write_text(json.dumps(doc))
    assert main(["schema-check", "--report", str(nan_path),
                 "--output-dir", str(tmp_path)]) == EXIT_PARSE


def test_validate_report_branches():
    assert validate_report([]) == ["report is not a JSON object"]
    good = {"schema_version": 1, "command": "norm", "status": "ok",
            "provenance": {"code_version": "0"},
            "payload_kind": "norm_report", "payload": {"x": 1.0}}
    assert validate_report(good) == []
    doc = dict(good)
    del doc["payload"]
    assert any("payload" in p for p in validate_report(doc))
    doc = dict(good, payload_kind="mystery")
    assert any("payload_kind" in p for p in validate_report(doc))
    doc = dict(good, status="failed")
    assert any("error" in p for p in validate_report(doc))
    doc = dict(good, provenance={})
    assert any("code_version" in p for p in validate_report(doc))
    doc = dict(good, payload={"deep": [{"v": math.inf}]})
    problems = validate_report(doc)
    assert any("non-finite" in p and "deep" in p for p in problems)


def test_config_supplies_defaults_flags_win(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"geometry": "h2o", "basis": "sto-3g",
                               "output-dir": str(tmp_path / "from-config")}))
    assert main(["--config", str(cfg), "norm"]) == EXIT_OK
    assert read_report(tmp_path / "from-config", "norm")["payload"]["n"] == 7
    # explicit flag overrides the config value
    assert main(["norm", "--config", str(cfg), "--geometry", "h2",
                 "--output-dir", str(tmp_path)]) == EXIT_OK
    assert read_report(tmp_path, "norm")["payload"]["n"] == 2


def test_config_error_paths(tmp_path):
    assert main(["--config", str(tmp_path / "absent.json"), "norm",
                 "--geometry", "h2", "--basis", "sto-3g"]) == EXIT_IO
    bad = tmp_path / "bad.json"
    bad.write_text("[1,2]")
    assert main(["--config", str(bad), "norm"]) == EXIT_PARSE
    unknown = tmp_path / "unknown.json"
    unknown.write_text(json.dumps({"geometry": "h2", "banana": 1}))
    assert main(["--config", str(unknown), "norm",
                 "--basis", "sto-3g"]) == EXIT_PARSE


def test_no_command_prints_help(capsys):
    assert main([]) == EXIT_PARSE
    assert "usage" in capsys.readouterr().out.lower()
    assert main(["frobnicate"]) == EXIT_PARSE


def test_unknown_geometry_is_parse_error(tmp_path):
    assert main(["norm", "--geometry", "unobtainium", "--basis", "sto-3g",
                 "--output-dir", str(tmp_path)]) == EXIT_PARSE


def test_df_report_and_leaves(tmp_path):
    assert main(["df", "--geometry", "h2", "--basis", "sto-3g",
                 "--eps-qpe", "1e-3",
                 "--output-dir", str(tmp_path)]) == EXIT_OK
    pay = read_report(tmp_path, "df")["payload"]
    assert pay["lambda_one_body"] + pay["lambda_two_body"] \
        == pytest.approx(pay["lambda_df"], abs=1e-12)
    assert pay["walk_calls"] == math.ceil(math.pi * pay["lambda_df"] / 2e-3)
    assert pay["block_encoding_size"] == pay["n"] * pay["n_df"]
    lines = (tmp_path / "df-leaves.csv").read_text().splitlines()
    assert lines[0] == "leaf,sum_abs_w,lambda_contribution"
    assert len(lines) == 1 + pay["n_df"]
    contrib = sum(float(ln.split(",")[2]) for ln in lines[1:])
    assert contrib == pytest.approx(pay["lambda_two_body"], abs=1e-12)


def test_fno_keep_everything_changes_nothing(tmp_path):
    assert main(["fno", "--geometry", "lih", "--basis", "sto-3g",
                 "--keep", "99", "--output-dir", str(tmp_path)]) == EXIT_OK
    pay = read_report(tmp_path, "fno")["payload"]
    assert pay["mode"] == "keep"
    assert pay["n_kept"] == pay["n_full"]
    assert pay["lambda_after"] == pytest.approx(pay["lambda_before"],
                                                abs=1e-9)


def test_fno_sigma_mode(tmp_path):
    assert main(["fno", "--geometry", "h2o", "--basis", "sto-3g",
                 "--sigma", "1e-4", "--output-dir", str(tmp_path)]) == EXIT_OK
    pay = read_report(tmp_path, "fno")["payload"]
    assert pay["mode"] == "sigma" and pay["sigma"] == 1e-4
    assert 0 < pay["n_kept"] <= pay["n_full"]
    assert pay["e_corr_mp2_truncated"] < 0
    assert pay["noon_last_kept"] > 1e-4


def test_fno_criterion_exclusive(tmp_path):
    base = ["fno", "--geometry", "h2", "--basis", "sto-3g",
            "--output-dir", str(tmp_path)]
    assert main(base) == EXIT_PARSE
    assert main(base + ["--sigma", "1e-4", "--keep", "2"]) == EXIT_PARSE


def test_scan_csv_layout(tmp_path):
    assert main(["scan", "--geometry", "h2", "--basis", "sto-3g",
                 "--kind", "s", "--grid", "0.5,2.0",
                 "--output-dir", str(tmp_path)]) == EXIT_OK
    lines = (tmp_path / "scan.csv").read_text().splitlines()
    assert lines[0] == "alpha,status,n,lambda_sparse,lambda_df,e_hf,e_fci,note"
    assert len(lines) == 3
    assert lines[1].startswith("0.5,ok,4,")
    assert lines[2].startswith("2.0,ok,4,")
    pay = read_report(tmp_path, "scan")["payload"]
    assert pay["kind"] == "s"
    assert [r["alpha"] for r in pay["rows"]] == [0.5, 2.0]


def test_scan_parallel_matches_serial(tmp_path):
    d1, d2 = tmp_path / "serial", tmp_path / "par"
    for d, jobs in ((d1, "1"), (d2, "2")):
        assert main(["scan", "--geometry", "h2", "--basis", "sto-3g",
                     "--kind", "p", "--grid", "0.4,1.1,3.0",
                     "--jobs", jobs, "--output-dir", str(d)]) == EXIT_OK
    assert (d1 / "scan.csv").read_bytes() == (d2 / "scan.csv").read_bytes()


def test_scan_grid_validation(tmp_path):
    args = ["scan", "--geometry", "h2", "--basis", "sto-3g", "--kind", "s",
            "--output-dir", str(tmp_path)]
    assert main(args + ["--grid", "a,b"]) == EXIT_PARSE
    assert main(args + ["--grid", ","]) == EXIT_PARSE


def sp_basis_file(tmp_path):
    bs = parse_basis(
        '{"H": [{"l": 0, "exponents": [3.425250914, 0.6239137298, '
        '0.1688554040], "coefficients": [[0.1543289673], [0.5353281423], '
        '[0.4446345422]]}, {"l": 1, "exponents": [0.727], '
        '"coefficients": [[1.0]]}]}', "sp-test")
    path = str(tmp_path / "sp-test.json")
    save_basis(bs, path)
    return path


def test_optimize_smoke(tmp_path):
    path = sp_basis_file(tmp_path)
    assert main(["optimize", "--geometry", "h2", "--basis", path,
                 "--element", "H", "--shell", "p", "--gamma", "0.25",
                 "--energy-method", "mp2", "--max-iter", "2",
                 "--output-dir", str(tmp_path)]) == EXIT_OK
    doc = read_report(tmp_path, "optimize")
    pay = doc["payload"]
    assert doc["payload_kind"] == "optimization_trace"
    assert pay["iterations"] == 2
    assert pay["termination"] == "iteration cap"
    assert pay["best_cost"] <= pay["trace"][0]["cost"] + 1e-12
    assert pay["gamma_effective"] == 0.25
    assert pay["lambda_reference"] is None
    assert len(pay["trace"]) == 3
    assert len(pay["trace"][0]["theta"]) == 10
    lines = (tmp_path / "optimize-trace.csv").read_text().splitlines()
    assert lines[0] == "iteration,energy,lambda,cost"
    assert len(lines) == 4
    best = load_basis(str(tmp_path / "optimize-basis.json"))
    p_shell = [sh for sh in best.shells_for("H") if sh.l == 1][0]
    assert p_shell.n_primitives == 5


def test_optimize_normalize_gamma(tmp_path):
    path = sp_basis_file(tmp_path)
    assert main(["optimize", "--geometry", "h2", "--basis", path,
                 "--element", "H", "--shell", "p", "--gamma", "0.5",
                 "--normalize-gamma", "--energy-method", "mp2",
                 "--max-iter", "1",
                 "--output-dir", str(tmp_path)]) == EXIT_OK
    pay = read_report(tmp_path, "optimize")["payload"]
    assert pay["lambda_reference"] is not None
    assert pay["gamma_effective"] == pytest.approx(
        0.5 / pay["lambda_reference"], rel=1e-12)


def test_invalid_gamma_exits_cap_with_failure_report(tmp_path):
    path = sp_basis_file(tmp_path)
    assert main(["optimize", "--geometry", "h2", "--basis", path,
                 "--element", "H", "--shell", "p", "--gamma", "1.5",
                 "--output-dir", str(tmp_path)]) == EXIT_CAP
    doc = read_report(tmp_path, "optimize")
    assert doc["status"] == "failed"
    assert "gamma" in doc["error"]
    assert doc["payload"] is None


def test_scf_failure_exit_and_flush(tmp_path, monkeypatch):
    def boom(*args, **kwargs):
        raise SCFConvergenceError("diverged badly", None)
    monkeypatch.setattr(cli, "run_rhf", boom)
    assert main(["norm", "--geometry", "h2", "--basis", "sto-3g",
                 "--output-dir", str(tmp_path)]) == EXIT_SCF
    doc = read_report(tmp_path, "norm")
    assert doc["status"] == "failed"
    assert "diverged badly" in doc["error"]


def test_n2_demo_small(tmp_path):
    assert main(["n2-demo", "--basis-dz", "sto-3g", "--basis-tz", "sto-3g",
                 "--sigma-dz", "1e-4", "--sigma-tz", "1e-3",
                 "--output-dir", str(tmp_path)]) == EXIT_OK
    doc = read_report(tmp_path, "n2-demo")
    assert doc["payload_kind"] == "n2_demo_table"
    rows = doc["payload"]["rows"]
    assert len(rows) == 18    # 9 bond lengths, 2 cases each
    assert len(doc["payload"]["grid_angstrom"]) == 9
    lines = (tmp_path / "n2-demo.csv").read_text().splitlines()
    assert lines[0] == ("bond_angstrom,case,sigma,n_kept,n_full,"
                        "lambda_df,e_hf,e_corr_mp2")
    assert len(lines) == 19
    assert main(["schema-check", "--report",
                 str(tmp_path / "n2-demo-report.json"),
                 "--output-dir", str(tmp_path)]) == EXIT_OK


def test_fallback_path_report_matches_numba(tmp_path):
    d1, d2 = tmp_path / "jit", tmp_path / "pure"
    assert main(["norm", "--geometry", "h2", "--basis", "sto-3g",
                 "--output-dir", str(d1)]) == EXIT_OK
    env = dict(os.environ, LAMBDAQ_NO_NUMBA="1")
    proc = subprocess.run(
        [sys.executable, "-m", "lambdaq.cli", "norm", "--geometry", "h2",
         "--basis", "sto-3g", "--output-dir", str(d2)],
        env=env, capture_output=True, text=True)
    assert proc.returncode == EXIT_OK, proc.stderr
    assert (d1 / "norm-report.json").read_bytes() \
        == (d2 / "norm-report.json").read_bytes()

import json
import math

import pytest

from einlab import cli


def run(tmp_path, *argv, name="out"):
    out = tmp_path / name
    code = cli.main([*argv, "--out", str(out)])
    return code, (out.read_text() if out.exists() else None)


def test_bh_fold_json(tmp_path):
    code, text = run(tmp_path, "bh-fold", "n=3")
    assert code == 0
    doc = json.loads(text)
    assert doc["result"]["beta0"] == pytest.approx(3.62760, abs=1e-5)
    assert doc["scenario"]["kind"] == "bh-fold"
    assert len(doc["scenario"]["input_sha256"]) == 64


def test_verify_csv(tmp_path):
    code, text = run(tmp_path, "verify", "n=3", "k=1", "m=1", "--format", "csv")
    assert code == 0
    lines = text.split("\n")
    assert "\r" not in text and text.endswith("\n")
    header = next(l for l in lines if not l.startswith("#"))
    assert header == "r,einstein_residual"
    rows = [l.split(",") for l in lines[lines.index(header) + 1:] if l]
    assert len(rows) == 20
    assert all(float(r[1]) < 1e-8 for r in rows)


def test_glue_decay_summary(tmp_path):
    code, text = run(tmp_path, "glue-decay", "n=3", "beta=1", "R=2,3,4,5")
    assert code == 0
    res = json.loads(text)["result"]
    assert res["slope"] == pytest.approx(-math.sqrt(3), rel=0.10)
    assert len(res["residual_sup"]) == 4


def test_glue_profile_csv_columns(tmp_path):
    code, text = run(tmp_path, "glue-decay", "R=3", "--format", "csv")
    assert code == 0
    header = next(l for l in text.splitlines() if not l.startswith("#"))
    assert header == "R,x,f,h,residual"


def test_float_formatting():
    assert cli.fmt_float(1 / 3) == "0.333333333333"
    assert cli.fmt_float(2.0) == "2"
    assert cli.fmt_float(math.inf) == "inf"
    assert cli._canonical({"a": [1 / 3, math.nan]}) == {"a": [0.333333333333, "nan"]}


def test_unknown_key_is_validation_error(tmp_path, capsys):
    code, _ = run(tmp_path, "verify", "n=3", "mass=1")
    assert code == 2
    assert "unknown keys" in capsys.readouterr().err


def test_bad_value_and_kind(tmp_path):
    assert run(tmp_path, "verify", "n=three")[0] == 2
    assert run(tmp_path, "bogus")[0] == 2
    assert run(tmp_path, "verify", "n=3", "k=1", "m=-1")[0] == 2
    assert run(tmp_path, "glue-decay", "R=0.5")[0] == 2


def test_tolerance_failure_exit_code(tmp_path):
    assert run(tmp_path, "verify", "n=3", "tol=1e-20")[0] == 3


def test_numerical_failure_exit_code(tmp_path):
    assert run(tmp_path, "fg-extract", "order_extra=12")[0] == 3


def test_hyperbolic_falloff_reports_status(tmp_path):
    code, text = run(tmp_path, "falloff", "m=0")
    assert code == 0
    res = json.loads(text)["result"]
    assert res["slope"] is None and "hyperbolic" in res["status"]


@pytest.mark.parametrize("fmt", ["json", "csv"])
def test_output_round_trips(tmp_path, fmt):
    code, first = run(tmp_path, "bh-preimages", "n=3", "beta=3", "--format", fmt, name="a")
    assert code == 0
    code, second = run(tmp_path, "run", "--config", str(tmp_path / "a"), "--format", fmt, name="b")
    assert code == 0 and first == second


def test_flat_config_file(tmp_path):
    cfg = tmp_path / "scenario.txt"
    cfg.write_text("# comment\nkind=bh-fold\nn=4\n")
    code, text = run(tmp_path, "run", "--config", str(cfg))
    assert code == 0
    assert json.loads(text)["result"]["n"] == 4


def test_sweep_preimage_counts(tmp_path):
    code, text = run(
        tmp_path, "sweep", "bh-preimages", "n=3", "k=1",
        "--axis", "beta", "--values", "3.6,2.0,2.8,3.7,4.0", "--format", "json",
    )
    assert code == 0
    rows = json.loads(text)["rows"]
    assert [r["beta"] for r in rows] == [2.0, 2.8, 3.6, 3.7, 4.0]
    assert [r["count"] for r in rows] == [2, 2, 2, 0, 0]


def test_sweep_mass_monotone(tmp_path):
    code, text = run(
        tmp_path, "sweep", "verify", "n=3", "k=0", "--axis", "m",
        "--values", "0.1,0.3,1,3,10", "--format", "json",
    )
    assert code == 0
    betas = [r["beta"] for r in json.loads(text)["rows"]]
    assert all(b > c for b, c in zip(betas, betas[1:]))


def test_sweep_glue_residual_monotone(tmp_path):
    code, text = run(tmp_path, "sweep", "glue-decay", "n=3", "--axis", "R", "--values", "2,3,4", "--format", "json")
    assert code == 0
    sups = [r["residual_sup"] for r in json.loads(text)["rows"]]
    assert sups[0] > sups[1] > sups[2]


def test_sweep_partial_failure(tmp_path, capsys):
    code, text = run(tmp_path, "sweep", "verify", "n=3", "k=1", "--axis", "m", "--values", "1,-1,2", "--format", "json")
    assert code == 3
    doc = json.loads(text)
    assert [f["m"] for f in doc["failed"]] == [-1.0]
    assert len(doc["rows"]) == 2
    assert "m=-1" in capsys.readouterr().err


def test_sweep_rejects_non_numeric_axis(tmp_path):
    assert run(tmp_path, "sweep", "glue-decay", "--axis", "gauge", "--values", "cusp")[0] == 2
    assert run(tmp_path, "sweep", "verify", "--axis", "nope", "--values", "1")[0] == 2


def test_sweep_deterministic_across_workers(tmp_path):
    argv = ["sweep", "bh-preimages", "n=3", "k=1", "--axis", "beta", "--values", "2,2.5,3,3.5", "--format", "csv"]
    _, one = run(tmp_path, *argv, "--workers", "1", name="w1")
    _, four = run(tmp_path, *argv, "--workers", "4", name="w4")
    _, again = run(tmp_path, *argv, "--workers", "1", name="w1b")
    assert one == four == again


def test_seed_recorded_but_inert(tmp_path):
    _, a = run(tmp_path, "bh-fold", "--seed", "1", name="s1")
    _, b = run(tmp_path, "bh-fold", "--seed", "2", name="s2")
    da, db = json.loads(a), json.loads(b)
    assert da["result"] == db["result"]
    assert da["scenario"]["config"]["seed"] == "1"
    assert da["scenario"]["input_sha256"] != db["scenario"]["input_sha256"]

import csv
import json
import subprocess
import sys

import pytest

from encsec import schemes
from encsec.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_keygen_writes_loadable_key(tmp_path, capsys):
    path = tmp_path / "k.json"
    code, out, _ = run(capsys, "keygen", "--scheme", "additive", "--lambda", "64", "--out", str(path), "--json")
    assert code == 0
    info = json.loads(out)
    kp = schemes.keypair_from_json(path.read_text())
    assert kp.lam == 64 and info["fingerprint"] == schemes.fingerprint(kp.pk, 64)


def test_run_cpa_json_and_csv(tmp_path, capsys):
    out_csv, out_json = tmp_path / "t.csv", tmp_path / "s.json"
    code, out, _ = run(capsys, "run-cpa", "--scheme", "broken", "--lambda", "32", "--adversary", "det-cpa",
                       "--trials", "100", "--seed", "3", "--json", "--csv", str(out_csv), "--out", str(out_json))
    assert code == 0
    d = json.loads(out)
    assert d["wins"] == 100 and d["verdict"] == "non-negligible-at-this-λ"
    assert json.loads(out_json.read_text()) == d
    rows = list(csv.DictReader(out_csv.open()))
    assert len(rows) == 100 and set(rows[0]) == {"trial", "b", "b_hat", "win", "queries"}


def test_run_pea_human_output(capsys):
    code, out, _ = run(capsys, "run-pea", "--scheme", "broken-additive", "--lambda", "32",
                       "--adversary", "det-pea", "--trials", "100")
    assert code == 0
    assert "ind-pea" in out and "verdict" in out and "transcript hash" in out


def test_reduce_command(capsys):
    code, out, _ = run(capsys, "reduce", "--direction", "cpa-to-pea", "--scheme", "broken", "--lambda", "32",
                       "--adversary", "det-cpa", "--trials", "100", "--json")
    assert code == 0
    d = json.loads(out)
    assert d["gap"] == 0 and d["cis_overlap"]


def test_demo_eavesdrop(capsys):
    code, out, _ = run(capsys, "demo-eavesdrop", "--lambda", "64", "--samples", "20", "--json")
    assert code == 0
    d = json.loads(out)
    assert d["plaintext_error"] < 1e-6 and d["ciphertext_error"] > 0.5


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text("scheme = broken\nlambda = 32  # bits\nadversary = det-cpa\ntrials = 100\nseed = 5\n")
    code, out, _ = run(capsys, "run-cpa", "--config", str(cfg), "--json")
    d = json.loads(out)
    assert code == 0 and d["config"]["scheme"] == "broken" and d["config"]["seed"] == 5
    code, out, _ = run(capsys, "run-cpa", "--config", str(cfg), "--seed", "6", "--json")
    assert json.loads(out)["config"]["seed"] == 6


@pytest.mark.parametrize("argv,field", [
    (["run-cpa", "--lambda", "8"], "lambda"),
    (["run-cpa", "--lambda", "33", "--scheme", "additive"], "lambda"),
    (["run-cpa", "--trials", "0", "--lambda", "32"], "trials"),
    (["run-cpa", "--trials", "50", "--lambda", "32"], "trials"),
    (["run-cpa", "--adversary", "oracle", "--lambda", "32", "--trials", "100"], "adversary"),
    (["run-pea", "--adversary", "det-cpa", "--lambda", "32", "--trials", "100"], "adversary"),
    (["run-pea", "--scheme", "additive", "--law", "multiplicative-gain", "--lambda", "32", "--trials", "100"], "law"),
    (["run-pea", "--dims", "2x", "--lambda", "32", "--trials", "100"], "dims"),
    (["run-cpa", "--budget", "0", "--lambda", "32"], "budget"),
    (["demo-eavesdrop", "--gains", "1,2,3", "--lambda", "64"], "gains"),
])
def test_usage_errors_exit_2(capsys, argv, field):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert f"error: {field}" in err


def test_reduce_static_feedback_names_condition(capsys):
    code, _, err = run(capsys, "reduce", "--direction", "cpa-to-pea", "--scheme", "multiplicative",
                       "--law", "static-feedback", "--dims", "1x2", "--adversary", "det-cpa",
                       "--lambda", "32", "--trials", "100")
    assert code == 2 and "q = r" in err


def test_bad_config_file(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = blue\n")
    code, _, err = run(capsys, "run-cpa", "--config", str(cfg))
    assert code == 2 and "unknown field" in err
    code, _, _ = run(capsys, "run-cpa", "--config", str(tmp_path / "missing.cfg"))
    assert code == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "encsec", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "run-cpa" in res.stdout

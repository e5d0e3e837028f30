from __future__ import annotations

import json
import subprocess
import sys

import pytest

from crypticproof.cli import load_settings, main
from crypticproof.gateway import ConfigError
from helpers import FIXTURES, HERON_CLUE, golden, heron_book


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_verify_exit_codes(capsys, tmp_path):
    good = tmp_path / "once.py"
    good.write_text(golden("once"))
    code, out, _ = run(capsys, "verify", "--proof", str(good))
    assert code == 0 and json.loads(out)["verdict"] == "Success"

    bad = tmp_path / "bad.py"
    bad.write_text(golden("supermarket_uncorrected"))
    code, out, _ = run(capsys, "verify", "--proof", str(bad))
    assert code == 1 and json.loads(out)["parse_error"]


def test_solve_with_fixtures(capsys, tmp_path, kb, bundle):
    fixtures = heron_book(kb, bundle).dump(tmp_path / "heron.json")
    code, out, _ = run(capsys, "solve", "--clue", HERON_CLUE, "--pattern", "5", "--fixtures", str(fixtures))
    result = json.loads(out)
    assert code == 0 and result["answer"] == "HERON" and result["proven"] is True


def test_eval_with_fixtures(capsys, tmp_path, kb, bundle):
    (tmp_path / "cryptonite-test.jsonl").write_text(json.dumps(
        {"id": "h", "clue": HERON_CLUE, "answer": "heron", "enumeration": "(5)", "quick": False}) + "\n")
    fixtures = heron_book(kb, bundle).dump(tmp_path / "heron.json")
    code, out, _ = run(capsys, "eval", "--dataset", str(tmp_path), "--split", "test",
                       "--n", "1", "--seed", "0", "--fixtures", str(fixtures))
    report = json.loads(out)
    assert code == 0 and report["overall"] == 1.0 and report["hard"] == 1.0 and report["quick"] is None
    assert report["per_clue"][0]["proven"] is True


def test_partial_knn(capsys):
    code, out, _ = run(capsys, "partial", "--dataset", str(FIXTURES / "cryptonite"), "--split", "val",
                       "--fraction", "0.5", "--n", "10", "--seed", "1", "--knn", "toy")
    report = json.loads(out)
    assert code == 0 and report["samples"] == 10 and report["fraction"] == 0.5
    assert all(c["predicted"] or c["error"] for c in report["per_clue"])


def test_missing_backend_is_reported(capsys):
    code, _, err = run(capsys, "solve", "--clue", "x", "--pattern", "1")
    assert code == 2 and "fixtures" in err


def test_config_file(tmp_path, monkeypatch):
    (tmp_path / "kb").mkdir()
    cfg = tmp_path / "run.ini"
    cfg.write_text(
        "[endpoint]\nbase_url = http://localhost:8000/v1\nmodel_name = gemma\n"
        "api_key_env = MY_KEY\nmax_in_flight = 2\ntemperature = 0.7\n"
        "[pipeline]\nnum_answer_candidates = 5\nmax_rewrites = 1\nformalise_temperature = 0.1\n"
        "[resources]\nkb = kb\n")
    s = load_settings(cfg)
    assert s.endpoint.model_name == "gemma" and s.endpoint.max_in_flight == 2
    assert s.endpoint.temperature == 0.7 and s.endpoint.api_key_env == "MY_KEY"
    assert s.pipeline.num_answer_candidates == 5 and s.pipeline.regeneration_budget == 15
    assert s.formalise_temperature == 0.1
    assert s.kb_dir == tmp_path / "kb"


def test_bad_config(tmp_path):
    cfg = tmp_path / "bad.ini"
    cfg.write_text("[pipeline]\nnum_answer_candidates = 0\n")
    with pytest.raises(ConfigError):
        load_settings(cfg)
    with pytest.raises(ConfigError):
        load_settings(tmp_path / "missing.ini")


def test_console_entry_point(tmp_path):
    proof = tmp_path / "p.py"
    proof.write_text(golden("decimal"))
    done = subprocess.run([sys.executable, "-m", "crypticproof.cli", "verify", "--proof", str(proof)],
                          capture_output=True, text=True, check=False)
    assert done.returncode == 0, done.stderr

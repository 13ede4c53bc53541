import json
import subprocess
import sys

import pytest

from zerocert.certificates import OUTDIR_ENV, load_document
from zerocert.cli import run


def _run(*argv):
    return run([*argv, "--quiet"])


def test_prune_survivor_in_trivial_region():
    code, doc = _run("prune", "--range", "0.9,0.91", "--mult", "2", "--depth", "10")
    assert code == 1
    assert doc["verdict"] == "negative" and doc["result"]["outcome"] == "survivor"


def test_prune_excluded():
    code, doc = _run("prune", "--range", "0.6,0.6001", "--depth", "30")
    assert code == 0 and doc["result"]["outcome"] == "excluded"


def test_prune_abort_is_inconclusive():
    code, _ = _run("prune", "--range", "0.746,0.7465", "--mult", "3", "--depth", "60", "--max-nodes", "1000")
    assert code == 2


def test_usage_errors():
    assert run(["nonsense"])[0] == 3
    assert _run("prune", "--range", "0.9")[0] == 3
    assert _run("prune", "--range", "0.9,0.8")[0] == 3
    assert _run("interior", "--kind", "jordan")[0] == 3
    assert _run("trivial", "--t1", "1,0,0,1", "--t2", "0.5,0,0,0.5")[0] == 3
    assert _run("good-check", "--poly", "1x1", "--a", "0.6", "--b", "0.7")[0] == 3


def test_scan_writes_certificate(tmp_path, monkeypatch):
    monkeypatch.setenv(OUTDIR_ENV, str(tmp_path))
    code, doc = _run("scan", "--range", "0.4,0.41", "--grid", "4", "--depth", "20", "--jobs", "1",
                     "--out", "gap.json")
    assert code == 0
    text = (tmp_path / "gap.json").read_text()
    assert load_document(text)["result"]["summary"]["fully_excluded"]
    assert '"version": 1' in text and "input_digest" in text


def test_certificates_byte_identical(tmp_path):
    args = ["scan", "--range", "0.6684,0.66841", "--grid", "5", "--depth", "30"]
    _run(*args, "--jobs", "1", "--out", str(tmp_path / "a.json"))
    _run(*args, "--jobs", "2", "--out", str(tmp_path / "b.json"))
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


def test_good_check_and_localize():
    poly = "1ooo1011011011101110110111111101111111o11111o1oo1oo"
    code, doc = _run("good-check", "--poly", poly, "--a", "0.668470", "--b", "0.668482")
    assert code == 0 and doc["result"]["n"] == 50
    code, doc = _run("localize", "--poly", poly, "--a", "0.668470", "--b", "0.668482")
    assert code == 0
    lo, hi = doc["result"]["localization"]["interval"]
    assert 0.66847556 <= lo < hi <= 0.66847564
    code, doc = _run("good-check", "--poly", "1o", "--a", "0.6", "--b", "0.7")
    assert code == 1 and doc["result"]["error"] == "EndpointFail"


def test_localize_hypothesis_fail():
    poly = "(1, -2, -1, 1, 1, 1, 2, 1, 1, 2, 1, 1, 2, 1, 1, 2, 1, 2, 1, 1, 2, -2, -2, -1, -2, 2, -1)"
    code, doc = _run("localize", "--poly", poly, "--a", "0.5436", "--b", "0.5438")
    assert code == 1 and doc["result"]["error"] == "HypothesisFail"


def test_geometry_commands():
    assert _run("robustness", "--eta", "4e-6", "--search")[0] == 0
    assert _run("robustness", "--eta", "1e-2")[0] == 1
    assert _run("interior", "--kind", "jordan", "--lambda", "0.707105")[0] == 0
    assert _run("interior", "--kind", "jordan", "--lambda", "0.70")[0] == 1
    assert _run("interior", "--kind", "rotation", "--rho", "0.707107", "--im", "2e-6")[0] == 0
    assert _run("trivial", "--t1", "0.7071067811865476,0,0,0.7071067811865476",
                "--t2", "0.7071067811865476,0,0,0.7071067811865476")[0] == 0
    assert _run("trivial", "--t1", "0.5,0,0,0.5", "--t2", "0.5,0,0,0.5")[0] == 1


def test_cover_verify_depth_9():
    code, doc = _run("cover-verify", "--depth", "9")
    assert code == 0 and doc["result"]["covered"]
    code, doc = _run("cover-verify", "--depth", "2")
    assert code == 2 and not doc["result"]["covered"]


def test_locus_render(tmp_path):
    code, doc = _run("locus-render", "--region", "0.3,0.9,0.3,0.9", "--resolution", "4", "--depth", "8",
                     "--pgm", str(tmp_path / "l.pgm"), "--csv", str(tmp_path / "l.csv"))
    assert code == 0
    assert (tmp_path / "l.pgm").read_text().startswith("P2\n")
    assert len((tmp_path / "l.csv").read_text().splitlines()) == 17


def test_repro_fast(capsys):
    code, doc = _run("repro", "example-3-5")
    assert code == 0 and doc["config"]["experiment"] == "example-3-5"
    code, doc = _run("repro", "eta")
    assert code == 0 and doc["result"]["max_eta"] >= 4e-6


def test_repro_list(capsys):
    code, doc = run(["repro", "--list"])
    assert code == 0 and doc is None
    out = capsys.readouterr().out
    for name in ("gap-I1", "example-3-5", "cover-lemma", "eta", "alpha2-lower", "theta-table", "bprime",
                 "triple-root", "properties"):
        assert name in out


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "zerocert", "interior", "--kind", "jordan", "--lambda",
                           "0.707105"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["verdict"] == "positive"

import hashlib
import json
import subprocess
import sys

import pytest

from heis.cli import _verify_suite


def run_cli(*argv, **kw):
    return subprocess.run([sys.executable, "-m", "heis.cli", *argv],
                          capture_output=True, text=True, **kw)


def test_norm_central_generator():
    r = run_cli("norm", "[0,0|2]")
    assert r.returncode == 0
    payload = json.loads(r.stdout)
    assert payload["norm"] == pytest.approx(1.0)


def test_dist_between_elements():
    r = run_cli("dist", "[0,0|0]", "[2,0|0]")
    assert r.returncode == 0
    assert json.loads(r.stdout)["dist"] == pytest.approx(2.0)


def test_dist_to_vertical():
    r = run_cli("dist", "[2,3|0]", "--V", "1,0")
    assert r.returncode == 0
    assert json.loads(r.stdout)["dist"] == pytest.approx(3.0)


def test_classify_axis():
    r = run_cli("classify", "--basis", "0,0,1")
    assert r.returncode == 0
    payload = json.loads(r.stdout)
    assert payload["class"] == "Vertical"
    assert payload["normal"] is True and payload["homogeneous"] is True


def test_classify_not_a_subgroup():
    r = run_cli("classify", "--basis", "1,0,0", "--basis", "0,1,0")
    assert r.returncode == 0
    payload = json.loads(r.stdout)
    assert payload["class"] == "NotASubgroup"
    assert "witness" in payload


def test_enum_interval_matches_library():
    from heis.geometry import interval_set
    r = run_cli("enum", "--n", "1", "--t", "1")
    assert r.returncode == 0
    payload = json.loads(r.stdout)
    assert payload["count"] == len(interval_set(1, 1, 1).elements) == 15


def test_code_exit_codes():
    forces = run_cli("code", "--builtin", "three_dot",
                     "--A", "[[0,0,0],[1,0,0]]", "--B", "[[0,1,0]]",
                     "--window", "4,4,4")
    assert forces.returncode == 0, forces.stderr
    assert json.loads(forces.stdout)["tag"] == "Forces"
    not_forced = run_cli("code", "--builtin", "full_shift",
                         "--A", "[[0,0,0]]", "--B", "[[0,1,0]]",
                         "--window", "4,4,4")
    assert not_forced.returncode == 1
    assert "witness" in json.loads(not_forced.stdout)


def test_malformed_input_exits_2():
    assert run_cli("norm", "[0,0").returncode == 2
    assert run_cli("classify", "--basis", "a,b,c").returncode == 2
    assert run_cli("expansive", "--builtin", "three_dot",
                   "--V", "nonsense").returncode == 2


def test_sys_json_roundtrip(tmp_path):
    from heis.symdyn import load_system, three_dot
    r = run_cli("sys", "validate", "--builtin", "three_dot")
    assert r.returncode == 0
    payload = json.loads(r.stdout)
    assert payload["kind"] == "linear2" and payload["valid"] is True
    # the serialized form reloads to the same constraints
    blob = tmp_path / "sys.json"
    from heis.symdyn import system_to_json
    blob.write_text(json.dumps(system_to_json(three_dot())))
    r2 = run_cli("sys", "validate", "--sys", str(blob))
    assert r2.returncode == 0
    assert load_system(str(blob)).constraints == three_dot().constraints


def test_sys_patterns_count():
    r = run_cli("sys", "patterns", "--builtin", "full_shift",
                "--window", "2,2,1")
    assert r.returncode == 0
    assert json.loads(r.stdout)["count"] == 16


def test_expansive_fixed_point():
    r = run_cli("expansive", "--builtin", "fixed_point", "--V", "1,0")
    assert r.returncode == 0
    assert json.loads(r.stdout)["tag"] == "Certified"


def test_expansive_evidence_only():
    r = run_cli("expansive", "--builtin", "full_shift", "--evidence-only",
                "--evidence-n", "2")
    assert r.returncode == 0
    payload = json.loads(r.stdout)
    assert payload["tag"] == "EvidenceNonexpansive"
    assert len(payload["witness_chain"]) == 2


def test_scan_csv_columns(tmp_path):
    out = tmp_path / "scan.csv"
    r = run_cli("scan", "--builtin", "fixed_point", "--k", "1",
                "--height", "1", "--out", str(out))
    assert r.returncode == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "V,dim,verdict,t,r,window,millis"
    assert len(lines) == 5  # header + 4 height-1 directions
    assert all(line.split(",")[2] == "Certified" for line in lines[1:])


def test_config_file_and_unknown_field(tmp_path):
    good = tmp_path / "cfg.json"
    good.write_text(json.dumps({"D": 1, "t_max": 1}))
    assert run_cli("norm", "[0,0|2]", "--config", str(good)).returncode == 0
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"bogus": 1}))
    assert run_cli("norm", "[0,0|2]", "--config", str(bad)).returncode == 2


def _payload_sha(payload):
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def test_verify_suite_deterministic():
    rows1, payload1 = _verify_suite(7)
    rows2, payload2 = _verify_suite(7)
    assert _payload_sha(payload1) == _payload_sha(payload2)
    assert all(ok for _, ok in rows1)
    assert rows1 == rows2


def test_verify_subprocess_identical():
    r1 = run_cli("verify", "--seed", "3")
    r2 = run_cli("verify", "--seed", "3")
    assert r1.returncode == 0
    assert r1.stdout == r2.stdout
    assert "payload sha256:" in r1.stdout

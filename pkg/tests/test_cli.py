from __future__ import annotations

import json
from pathlib import Path

import pytest

from fibercalc.catalog import bryan_donagi_x
from fibercalc.cli import EXIT_INPUT, EXIT_OK, EXIT_REFUSED, main, run_command
from fibercalc.serialize import emit_fibration

DATA = Path(__file__).resolve().parent.parent / "data"


@pytest.fixture
def cat(tmp_path):
    return str(tmp_path / "catalog")


def run(*argv):
    return run_command(list(argv))


def test_invariants_text_and_json():
    r = run("invariants", str(DATA / "q3_9_m5.fib"))
    assert r.status == EXIT_OK
    assert "H_1: Z^23 + Z_5" in r.stdout and "signature: 0" in r.stdout
    r = run("invariants", str(DATA / "q3_9_m5.fib"), "--json")
    doc = json.loads(r.stdout)
    assert doc["report"]["euler"] == 64 and doc["report"]["h1"] == "Z^23 + Z_5"


def test_json_flag_position_and_determinism():
    a = run("--json", "invariants", str(DATA / "e1.fib"))
    b = run("invariants", str(DATA / "e1.fib"), "--json")
    assert a.stdout == b.stdout
    assert json.loads(a.stdout)["report"]["signature"] == -8


def test_certify_exit_codes():
    assert run("certify", str(DATA / "q2_2_m3.fib")).status == EXIT_OK
    r = run("certify", str(DATA / "p_3_9.fib"))
    assert r.status == EXIT_REFUSED and "premise failed: b1 odd" in r.stdout
    r = run("build-block", "--family", "Q", "--g", "1", "--h", "3", "--m", "4")
    assert r.status == EXIT_OK
    assert main(["certify", "Q4-1-3"]) == EXIT_REFUSED


def test_check_and_invalid_input(tmp_path):
    assert run("check", str(DATA / "p_3_9.fib")).status == EXIT_OK
    truncated = tmp_path / "t.fib"
    truncated.write_text((DATA / "e1.fib").read_text()[:100])
    r = run("invariants", str(truncated))
    assert r.status == EXIT_INPUT
    assert "parse error at line" in r.stderr and "column" in r.stderr


def test_schema_errors_name_the_field(tmp_path):
    doc = json.loads((DATA / "q2_2_m3.fib").read_text())
    doc["handles"][0]["alpha"][0]["class"] = ["1", "0", "0"]
    bad = tmp_path / "bad.fib"
    bad.write_text(json.dumps(doc))
    r = run("check", str(bad))
    assert r.status == EXIT_INPUT and "handles[0].alpha[0]" in r.stderr
    doc = json.loads((DATA / "e1.fib").read_text())
    doc["vanishing_cycles"] = []
    bad.write_text(json.dumps(doc))
    r = run("check", str(bad))
    assert r.status == EXIT_INPUT and "non-empty critical locus required" in r.stderr


def test_invalid_relation_is_input_error(tmp_path):
    doc = json.loads((DATA / "e1.fib").read_text())
    doc["vanishing_cycles"] = doc["vanishing_cycles"][:10]
    bad = tmp_path / "bad.fib"
    bad.write_text(json.dumps(doc))
    r = run("check", str(bad))
    assert r.status == EXIT_INPUT and "invalid factorization" in r.stderr


def test_build_block_output_is_deterministic(tmp_path):
    out = tmp_path / "q.fib"
    run("build-block", "--family", "Q", "--g", "3", "--h", "9", "--m", "5", "-o", str(out))
    assert out.read_bytes() == (DATA / "q3_9_m5.fib").read_bytes()
    r1 = run("build-block", "--family", "R", "--g", "2", "--h", "1", "--m", "3")
    r2 = run("build-block", "--family", "R", "--g", "2", "--h", "1", "--m", "3")
    assert r1.stdout == r2.stdout
    bad = run("build-block", "--family", "R", "--g", "2", "--h", "1", "--m", "3", "--b", "0,1,0,0")
    assert bad.status == EXIT_INPUT


def test_stabilize_commands(tmp_path):
    out = tmp_path / "s.fib"
    r = run("stabilize", "horizontal", "--input", str(DATA / "p_3_9.fib"), "--partner-h", "1",
            "--m", "3", "-o", str(out), "--json")
    assert r.status == EXIT_OK
    doc = json.loads(r.stdout)
    assert doc["h1_after"] == "Z^25 + Z_3" and doc["cross_check"] is True
    assert run("invariants", str(out)).status == EXIT_OK
    r = run("stabilize", "vertical", "--input", "P-2-2", "--partner-g", "2", "--m", "4")
    assert r.status == EXIT_OK and "Z^11 + Z_4" in r.stdout


def test_stabilize_with_twist(tmp_path):
    twist = tmp_path / "tw.json"
    twist.write_text(json.dumps([[1, 1, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]))
    r = run("stabilize", "horizontal", "--input", "Q2-2-2", "--partner-h", "2", "--m", "3",
            "--twist", str(twist))
    assert r.status == EXIT_OK and "twist" in r.stdout
    twist.write_text(json.dumps([[2, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]))
    r = run("stabilize", "horizontal", "--input", "Q2-2-2", "--partner-h", "2", "--m", "3",
            "--twist", str(twist))
    assert r.status == EXIT_INPUT


def test_catalog_roundtrip(cat, tmp_path):
    assert run("--catalog", cat, "catalog", "add", "my-q", str(DATA / "q2_2_m3.fib")).status == EXIT_OK
    r = run("--catalog", cat, "catalog", "add", "my-q", str(DATA / "q2_2_m3.fib"))
    assert r.status == EXIT_INPUT and "exists" in r.stderr
    r = run("--catalog", cat, "catalog", "add", "E1", str(DATA / "e1.fib"))
    assert r.status == EXIT_INPUT
    r = run("catalog", "show", "my-q", "--catalog", cat)
    assert r.status == EXIT_OK and "Z^7 + Z_3" in r.stdout
    listing = run("--catalog", cat, "catalog", "list").stdout
    assert "my-q" in listing and "korkmaz-Y2" in listing
    assert run("--catalog", cat, "certify", "my-q").status == EXIT_OK
    assert run("--catalog", cat, "catalog", "show", "nope").status == EXIT_INPUT


def test_builtin_korkmaz_and_bryan_donagi(cat):
    r = run("--catalog", cat, "--json", "catalog", "show", "korkmaz-Y2")
    rep = json.loads(r.stdout)["report"]
    assert rep["h1"] == "Z^2" and rep["signature"] == -4
    r = run("--catalog", cat, "--json", "catalog", "show", "bryan-donagi-X2")
    doc = json.loads(r.stdout)
    assert doc["report"]["signature"] == 16
    fib = doc["fibration"]
    assert (fib["fiber_genus"], fib["base_genus"]) == (25, 2)
    c = bryan_donagi_x(2, companion=True)
    assert (c.fiber_genus, c.base_genus) == (9, 4)


def test_family_command(cat):
    r = run("--catalog", cat, "family", "--mode", "iii", "--g", "2", "--h", "1", "--count", "3")
    assert r.status == EXIT_OK
    r = run("--catalog", cat, "family", "--mode", "i", "--g", "4", "--h", "9", "--count", "2")
    assert r.status == EXIT_INPUT and "signature" in r.stderr
    r = run("--catalog", cat, "family", "--mode", "ii", "--n", "2", "--h", "2")
    assert r.status == EXIT_INPUT


def test_usage_errors_exit_two():
    assert run("invariants").status == EXIT_INPUT
    assert run("nonsense").status == EXIT_INPUT
    assert run("build-block", "--family", "Q", "--g", "x", "--h", "1").status == EXIT_INPUT


def test_emitted_file_reads_back(tmp_path):
    p = tmp_path / "x.fib"
    p.write_text(emit_fibration(bryan_donagi_x(3)))
    r = run("invariants", str(p))
    assert r.status == EXIT_OK and f"signature: {8 * (3**3 - 3) // 3}" in r.stdout

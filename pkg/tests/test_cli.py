import json
import subprocess
import sys

import pytest

from trex.cli import main
from trex.designs import DesignFamily, verify_design
from trex.trevisan import toy_params

DESK = str(2.0**-14)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_no_arguments_prints_usage(capsys):
    code, _, err = run(capsys)
    assert code == 1 and "usage" in err


@pytest.mark.parametrize("argv", [["bogus"], ["plan", "--n", "x"], ["design", "--m", "4"],
                                  ["design", "--m", "4", "--l", "2", "--r", "3"],
                                  ["rac", "--experiment", "avgcase", "--n", "2"]])
def test_usage_errors(capsys, argv):
    assert run(capsys, *argv)[0] == 1


def test_plan_infeasible(capsys):
    code, out, _ = run(capsys, "plan", "--n", "1048576", "--k", "1048576", "--b", "1024",
                       "--eps", "0.1")
    assert code == 2
    assert json.loads(out)["feasible"] is False


def test_design_output_verifies(capsys, tmp_path):
    path = tmp_path / "d.json"
    code, out, _ = run(capsys, "design", "--m", "16", "--l", "8", "--r", "4", "--out", str(path))
    assert code == 0
    d = DesignFamily.from_dict(json.loads(out))
    assert verify_design(d)
    assert sorted(json.loads(out)) == ["l", "r", "sets", "t"]
    assert DesignFamily.from_dict(json.loads(path.read_text())) == d


def test_plan_extract_roundtrip(capsys, tmp_path):
    params = tmp_path / "p.json"
    code, _, _ = run(capsys, "plan", "--n", "16", "--k", "16", "--b", "1", "--eps", "0.5",
                     "--mult", "16", "--c-field", DESK, "--out", str(params))
    assert code == 0
    source = tmp_path / "x.bin"
    source.write_bytes(b"\x34\x12")
    out_file = tmp_path / "z.bin"
    code, out, _ = run(capsys, "extract", "--in", str(source), "--seed", "ab" * 4,
                       "--params", str(params), "--out", str(out_file))
    assert code == 0
    report = json.loads(out)
    assert len(report["output"]) == report["m"] == 2
    # a seed file works the same as its hex
    seed_file = tmp_path / "y.bin"
    seed_file.write_bytes(bytes.fromhex("ab" * 4))
    code, out2, _ = run(capsys, "extract", "--in", str(source), "--seed", str(seed_file),
                        "--params", str(params), "--local")
    assert json.loads(out2)["output"] == report["output"]
    # short seed
    assert run(capsys, "extract", "--in", str(source), "--seed", "ab",
               "--params", str(params))[0] == 1


def test_extract_with_separate_design(capsys, tmp_path):
    p = toy_params()
    params = tmp_path / "p.json"
    params.write_text(p.to_json())
    design = tmp_path / "d.json"
    design.write_text(p.design.to_json())
    source = tmp_path / "x.bin"
    source.write_bytes(b"\xff\x00")
    code, _, _ = run(capsys, "extract", "--in", str(source), "--seed", "00" * 3,
                     "--params", str(params), "--design", str(design))
    assert code == 0


def test_encode_and_encode_bit(capsys, tmp_path):
    source = tmp_path / "x.bin"
    source.write_bytes(b"\x0b")
    word = tmp_path / "c.bin"
    code, out, _ = run(capsys, "encode", "--n", "4", "--delta", "0.25", "--c-field", DESK,
                       "--in", str(source), "--out", str(word))
    assert code == 0
    nbar = json.loads(out)["params"]["nbar"]
    data = word.read_bytes()
    assert len(data) * 8 == nbar
    for j in (0, 1, 17, nbar - 1):
        code, out, _ = run(capsys, "encode-bit", "--n", "4", "--delta", "0.25",
                           "--c-field", DESK, "--in", str(source), "--j", str(j))
        assert json.loads(out)["bit"] == (data[j // 8] >> (j % 8)) & 1
    assert run(capsys, "encode-bit", "--n", "4", "--delta", "0.25", "--c-field", DESK,
               "--in", str(source), "--j", str(nbar))[0] == 1


def test_verify_reports(capsys):
    code, out, _ = run(capsys, "verify", "--extractor", "hash", "--n", "4", "--k", "2")
    report = json.loads(out)
    assert code == 0 and report["passed"] and report["mode"] == "exhaustive"
    code, out, _ = run(capsys, "verify", "--extractor", "bitselect", "--n", "4", "--k", "1",
                       "--eps", "0.01")
    assert code == 3
    code, out, _ = run(capsys, "verify", "--extractor", "trevisan", "--n", "4", "--k", "2",
                       "--b", "1")
    assert code == 0 and "storage" in json.loads(out)


def test_field_table(capsys):
    code, out, _ = run(capsys, "field-table", "--max-s", "3")
    assert code == 0
    assert out.splitlines() == ["s=1 modulus=0b10", "s=2 modulus=0b111", "s=3 modulus=0b1011"]


def test_rac_and_reconstruct(capsys):
    code, out, _ = run(capsys, "rac", "--experiment", "avgcase", "--n", "30", "--trials", "100")
    assert code == 0 and json.loads(out)["average_success"] == "2/3"
    code, out, _ = run(capsys, "reconstruct", "--trials", "1", "--rng-seed", "5")
    assert code == 0 and json.loads(out)["successes"] == 1


def test_threads(capsys, monkeypatch):
    assert run(capsys, "field-table", "--max-s", "2", "--threads", "0")[0] == 1
    monkeypatch.setenv("TREX_THREADS", "many")
    assert run(capsys, "field-table", "--max-s", "2")[0] == 1
    monkeypatch.setenv("TREX_THREADS", "2")
    assert run(capsys, "field-table", "--max-s", "2")[0] == 0


def test_bench(capsys):
    code, out, _ = run(capsys, "bench", "--m", "8", "--l", "6", "--reps", "3")
    assert code == 0 and json.loads(out)["design_valid"]


def test_module_entry_point_is_reproducible():
    cmd = [sys.executable, "-m", "trex", "rac", "--experiment", "regev", "--trials", "500",
           "--rng-seed", "11"]
    a = subprocess.run(cmd, capture_output=True, check=True).stdout
    b = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert a == b and json.loads(a)["rng_seed"] == 11

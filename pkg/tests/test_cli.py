import json
import subprocess
import sys

import pytest

from ceef.cli import main
from ceef.formula import parse_json


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_generate_latex_inline(capsys):
    code, out, _ = run(capsys, "generate", "--m", "4", "--inline")
    assert code == 0
    assert out.startswith("C_4 = \\tr(A^4) - 2 ")


def test_generate_json_to_file(tmp_path, capsys):
    path = tmp_path / "c8.json"
    code, out, _ = run(capsys, "generate", "--m", "8", "--format", "json", "--out", str(path))
    assert code == 0 and out == ""
    f = parse_json(path.read_text())
    assert f.m == 8 and len(f.terms) == 44


def test_generate_text(capsys):
    code, out, _ = run(capsys, "generate", "--m", "6", "--format", "text")
    assert code == 0 and out.startswith("# C_6: 10 terms")


@pytest.mark.parametrize("m", ["2", "13"])
def test_order_out_of_range(capsys, m):
    with pytest.raises(SystemExit) as exc:
        main(["generate", "--m", m])
    assert exc.value.code == 2


def test_catalog(capsys):
    code, out, _ = run(capsys, "catalog", "--m", "3")
    assert code == 0
    rows = [ln for ln in out.splitlines() if not ln.startswith(("#", "  k"))]
    assert len(rows) == 1 and rows[0].split()[:5] == ["3", "1", "1", "1", "+1"]
    code, out, _ = run(capsys, "catalog", "--m", "4", "--format", "json")
    assert [c["a"] for c in json.loads(out)["classes"]] == [1, -2, 1]


def test_validate_passes(capsys):
    code, out, _ = run(capsys, "validate", "--m", "3..6", "--trials", "3")
    assert code == 0
    assert out.count("PASS") == 4


def test_validate_skips_over_budget(capsys):
    code, out, err = run(capsys, "validate", "--m", "8", "--n", "20")
    assert code == 0 and "skipped" in err and out == ""


def test_validate_bad_range(capsys):
    code, _, err = run(capsys, "validate", "--m", "2..4")
    assert code == 2 and "outside" in err


def test_bench(capsys):
    code, out, _ = run(capsys, "bench", "--m", "4", "--sizes", "10,20", "--repeats", "1")
    assert code == 0 and "growth exponent" in out


def test_detect_rejects_single_rep(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["detect", "--reps", "1"])
    assert exc.value.code == 2


def test_detect_json(capsys):
    code, out, _ = run(capsys, "detect", "--n", "15", "--orders", "3,4", "--reps", "3", "--json")
    assert code == 0
    doc = json.loads(out)
    assert [r["m"] for r in doc["results"]] == [3, 4]


def test_eval_matrix_file(tmp_path, capsys):
    p = tmp_path / "k5.txt"
    p.write_text("5 integer\n" + "\n".join(" ".join("0" if i == j else "1" for j in range(5)) for i in range(5)))
    code, out, _ = run(capsys, "eval", "--m", "5", "--matrix", str(p), "--brute")
    assert code == 0
    assert out.split() == ["120", "120"]


def test_eval_missing_file(capsys, tmp_path):
    code, _, err = run(capsys, "eval", "--m", "4", "--matrix", str(tmp_path / "none.txt"))
    assert code == 2 and "error" in err


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "ceef", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and "ceef" in out.stdout

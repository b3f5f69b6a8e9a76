import json
import subprocess
import sys

import pytest

from bunched.calculus import Derivation, check_derivation, is_regimented
from bunched.cli import main

from proofs import LBI_PROOFS


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_decide_provable(capsys, tmp_path):
    path = tmp_path / "proof.json"
    code, out, _ = run(capsys, "decide", "p , (p -* q) |- q", "--emit-proof", str(path))
    assert code == 0 and out.startswith("provable")
    d = Derivation.from_json(json.loads(path.read_text()))
    assert check_derivation("dlbi", d) and is_regimented("dlbi", d)


def test_decide_unprovable_and_json(capsys):
    code, out, _ = run(capsys, "decide", "p |- p * p", "--json", "--stats")
    data = json.loads(out)
    assert code == 1 and data["verdict"] == "unprovable"
    assert data["stats"]["bounds"] == [3, 1, 2]


def test_decide_abort(capsys):
    code, out, _ = run(capsys, "decide", "p * q |- q * p", "--max-nodes", "1")
    assert code == 2 and out.strip() == "abort"


def test_parse_error_exit_code(capsys):
    code, _, err = run(capsys, "decide", "p |- (p")
    assert code == 3 and "parse error" in err and "7" in err


def test_bad_bounds(capsys):
    code, _, err = run(capsys, "decide", "p |- p", "--bounds", "1,2")
    assert code == 3 and "--bounds" in err


def test_exactly_one_input(capsys, tmp_path):
    f = tmp_path / "s.txt"
    f.write_text("p |- p\n")
    assert run(capsys, "decide", "p |- p", "--file", str(f))[0] == 3
    assert run(capsys, "decide", "--file", str(f))[0] == 0
    assert run(capsys, "decide")[0] == 3


def test_normalize(capsys):
    code, out, _ = run(capsys, "normalize", "(p , (q ; o+)) ; (r ; (ox ; r))", "--json")
    data = json.loads(out)
    assert code == 0 and data["normal"] == "ox ; r ; (p , q)"
    assert len(data["steps"]) == 2 and data["steps"][0].startswith(("contract@", "drop-o+@"))


def test_measure(capsys):
    code, out, _ = run(capsys, "measure", "(p , (q ; o+)) ; (r ; (r ; ox))", "--json")
    assert code == 0 and json.loads(out) == {"mu": 1, "omega": 1, "delta": 1}
    code, out, _ = run(capsys, "measure", "p , q |- p * q")
    assert out.strip() == "mu=0 omega=2 delta=2"


def test_check(capsys, tmp_path):
    path = tmp_path / "lbi.json"
    path.write_text(LBI_PROOFS["modus-ponens"].dumps())
    code, out, _ = run(capsys, "check", "--file", str(path))
    assert code == 0 and out.strip() == "valid"
    code, out, _ = run(capsys, "check", "--file", str(path), "--system", "dlbi")
    assert code == 1 and out.startswith("invalid")


def test_check_regimented(capsys, tmp_path):
    path = tmp_path / "p.json"
    run(capsys, "decide", "p ; (p -> q) |- q", "--emit-proof", str(path))
    code, out, _ = run(capsys, "check", str(path), "--system", "dlbi", "--regimented")
    assert code == 0 and out.split() == ["valid", "regimented"]


def test_check_malformed(capsys):
    assert run(capsys, "check", "not json or a file")[0] == 3


def test_space(capsys):
    code, out, _ = run(capsys, "space", "p |- p", "--bounds", "0,0,0", "--list")
    assert code == 0 and set(out.split("\n")) >= {"p |- p", "o+ |- p", "ox |- p"}
    code, out, _ = run(capsys, "space", "p |- p", "--bounds", "0,0,0", "--count")
    assert int(out) == len([x for x in run(capsys, "space", "p |- p", "--bounds", "0,0,0",
                                            "--list")[1].split("\n") if x])


@pytest.mark.parametrize("stage, system", [
    ("slbi", "slbi"), ("regimented", "slbi+"), ("dlbi-rad", "dlbi-rad"), ("dlbi", "dlbi")])
def test_transform_stages(capsys, tmp_path, stage, system):
    src = tmp_path / "in.json"
    src.write_text(LBI_PROOFS["wand-weaken"].dumps())
    out_path = tmp_path / "out.json"
    code, out, _ = run(capsys, "transform", "--file", str(src), "--to", stage,
                       "--emit-proof", str(out_path))
    assert code == 0
    d = Derivation.from_json(json.loads(out_path.read_text()))
    assert check_derivation(system, d)


def test_transform_labels(capsys, tmp_path):
    src = tmp_path / "in.json"
    src.write_text(LBI_PROOFS["top-unit"].dumps())
    code, out, _ = run(capsys, "transform", "--file", str(src), "--labels", "--json")
    data = json.loads(out)
    assert code == 0 and data["valid"] and "labels" in data["proof"]


def test_transform_rejects_invalid(capsys):
    bad = json.dumps({"sequent": "p |- q", "rule": "Id", "params": {}, "children": []})
    assert run(capsys, "transform", bad)[0] == 3


def test_plot(capsys, tmp_path):
    pytest.importorskip("matplotlib")
    png = tmp_path / "m.png"
    code, _, _ = run(capsys, "decide", "p * q |- q * p", "--plot", str(png), "--json")
    assert code == 0 and png.stat().st_size > 0


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "bunched", "decide", "p |- p"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.startswith("provable")

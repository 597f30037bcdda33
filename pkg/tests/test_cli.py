import json
import subprocess
import sys

import pytest

from conftest import R_TEXT, X_TEXT
from rearrange.cli import main
from rearrange.system import builtin, serialize_system

X_INV = """domain
  t.1
  t.2.1
  t.2.2
range
  t.1.1
  t.1.2
  t.2
sigma
  t.1 -> t.1.1
  t.2.1 -> t.1.2
  t.2.2 -> t.2
"""


@pytest.fixture
def files(tmp_path):
    paths = {}
    for name, text in [("x", X_TEXT), ("r", R_TEXT), ("xinv", X_INV), ("xr", X_TEXT + "---\n" + R_TEXT)]:
        p = tmp_path / f"{name}.gpd"
        p.write_text(text)
        paths[name] = str(p)
    p = tmp_path / "airplane.rs.txt"
    p.write_text(serialize_system(builtin("airplane")))
    paths["airplane"] = str(p)
    return paths


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_validate_file(capsys, files):
    code, out, _ = run(capsys, "validate", "--system", files["airplane"])
    assert code == 0 and out.startswith("expanding: yes")


def test_order(capsys, files):
    assert run(capsys, "order", "--system", "circle_T", "--element", files["r"])[1] == "periodic, order 2\n"
    assert run(capsys, "order", "--system", "circle_T", "--element", files["x"])[1] == "non-periodic\n"


def test_compose_to_identity(capsys, files):
    code, out, _ = run(capsys, "compose", "--system", "circle_T", "--left", files["x"], "--right", files["xinv"])
    assert code == 0
    assert out == "domain\n  t\nrange\n  t\nsigma\n  t -> t\n"


def test_reduce_and_canonical(capsys, files):
    assert run(capsys, "reduce", "--system", "circle_T", "--element", files["x"])[1] == X_TEXT
    out = run(capsys, "canonical", "--system", "circle_T", "--element", files["x"])[1]
    assert out.startswith(X_TEXT) and "imbalance 1 1" in out


def test_wandering_json(capsys, files):
    code, out, _ = run(capsys, "wandering", "--system", "circle_T", "--element", files["x"],
                       "--max-power", "5", "--format", "json")
    doc = json.loads(out)
    assert code == 0 and doc["result"]["verified"]
    assert doc["result"]["certificate"]["f"] == "t.2.1"


def test_witness(capsys):
    code, out, _ = run(capsys, "witness", "--system", "circle_T", "--cells", "t.1", "--target", "t.2", "--budget", "2")
    assert code == 0 and out == R_TEXT
    code, out, _ = run(capsys, "witness", "--system", "circle_T", "--cells", "t.1", "--target", "t.2", "--budget", "0")
    assert code == 1 and out.startswith("not found")


def test_minimality_and_nig(capsys, files):
    out = run(capsys, "minimality", "--system", "circle_T", "--elements", files["xr"], "--depth", "2")[1]
    assert "full coverage: yes" in out
    code, out, _ = run(capsys, "nig-demo", "--system", "circle_T", "--elements", files["xr"], "--point", "t:(1.2)")
    assert code == 0 and out.endswith("passed: yes\n")


def test_expand_dot_enumerate(capsys):
    out = run(capsys, "expand", "--system", "circle_T", "--cells", "t.1.2")[1]
    assert "  t.1.1\n  t.1.2\n  t.2\n" in out
    assert run(capsys, "dot", "--system", "airplane", "--depth", "1")[1].startswith("digraph")
    doc = json.loads(run(capsys, "enumerate", "--system", "circle_T", "--budget", "2", "--format", "json")[1])
    assert doc["result"]["count"] == 10


def test_seeded_output_is_reproducible(capsys):
    args = ["enumerate", "--system", "airplane", "--budget", "3", "--sample", "5", "--seed", "7"]
    assert run(capsys, *args)[1] == run(capsys, *args)[1]


def test_out_flag(capsys, files, tmp_path):
    target = tmp_path / "o.txt"
    run(capsys, "order", "--system", "circle_T", "--element", files["r"], "--out", str(target))
    assert target.read_text() == "periodic, order 2\n"


def test_exit_codes(capsys, files):
    code, _, err = run(capsys, "order", "--system", "circle_T")
    assert code == 2 and "requires --element" in err
    code, _, err = run(capsys, "order", "--system", "no_such_file", "--element", files["x"])
    assert code == 1 and err
    with pytest.raises(SystemExit) as e:
        main(["frobnicate", "--system", "circle_T"])
    assert e.value.code == 2
    with pytest.raises(SystemExit) as e:
        main(["order", "--system", "circle_T", "--bogus", "1"])
    assert e.value.code == 2


def test_console_script_entry(files):
    proc = subprocess.run(
        [sys.executable, "-m", "rearrange.cli", "validate", "--system", "circle_T"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0 and proc.stdout.startswith("expanding: yes")

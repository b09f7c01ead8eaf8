import csv
import io
import json

import pytest

from heightlab.cli import main, run_command
from heightlab.report import ExperimentManifest, digest, emit_report, load_manifest


def test_empty_reports_are_valid():
    assert json.loads(emit_report({"rows": []}, "json")) == {"rows": []}
    assert emit_report({"rows": []}, "csv") == b""
    assert emit_report({"rows": []}, "csv", ["a", "b"]) == b"a,b\n"
    assert emit_report({}, "text") == b""
    with pytest.raises(ValueError):
        emit_report({}, "xml")


def test_csv_uses_union_of_keys():
    out = emit_report({"rows": [{"a": 1}, {"a": 2, "b": True}]}, "csv").decode()
    assert list(csv.reader(io.StringIO(out))) == [["a", "b"], ["1", ""], ["2", "true"]]


def test_manifest_round_trip(tmp_path):
    man = ExperimentManifest("height", {"argv": ["height"]}, output_digest=digest(b"x"))
    path = tmp_path / "m.json"
    man.write(path)
    back = load_manifest(path)
    assert back == man
    with pytest.raises(ValueError):
        ExperimentManifest.from_dict({"inputs": {}})


def test_height_json_and_exit_zero():
    code, data = run_command(["height", "--curve", "37a", "--point", "0;0"])
    assert code == 0
    row = json.loads(data)["rows"][0]
    assert abs(float(row["value"]) - 0.0511114082399688 / 2) < 1e-12


def test_survey_csv_header():
    code, data = run_command(["survey", "--curve", "0,0,0,-1,0", "--field", "Q(i)", "--box", "2", "--format", "csv"])
    assert code == 0
    assert data.decode().splitlines()[0] == "point,field,height,radius,bound,pass"


@pytest.mark.parametrize(
    "argv",
    [
        ["height", "--curve", "1,2,3"],
        ["height", "--curve", "nosuchlabel", "--point", "0;0"],
        ["height", "--curve", "37a", "--point", "1;1"],
        ["bogus"],
        ["survey", "--curve", "0,0,0,-1,0", "--field", "Q(i)", "--box", "10000"],
        ["local-heights", "--curve", "37a", "--point", "0;0", "--prime", "37", "--m", "12"],
    ],
)
def test_usage_errors_exit_two(argv):
    code, data = run_command(argv)
    assert code == 2 and data.startswith(b"usage error")


def test_off_curve_message_names_residue():
    _, data = run_command(["height", "--curve", "37a", "--point", "1;1"])
    assert b"residue" in data


def test_failed_check_exits_one():
    code, data = run_command(["bound", "--curve", "cm1728", "--prime", "5"])
    assert code == 1
    assert "error" in json.loads(data)


def test_precision_env(monkeypatch):
    monkeypatch.setenv("HEIGHTLAB_PREC", "abc")
    assert run_command(["constants", "--curve", "37a"])[0] == 2
    monkeypatch.setenv("HEIGHTLAB_PREC", "128")
    code, a = run_command(["constants", "--curve", "37a"])
    code2, b = run_command(["constants", "--curve", "37a", "--prec", "128"])
    assert code == code2 == 0 and a == b


def test_out_manifest_and_replay(tmp_path, capsys):
    out, man = tmp_path / "r.json", tmp_path / "m.json"
    argv = ["height", "--curve", "37a", "--point", "0;0", "--out", str(out), "--manifest", str(man)]
    assert main(argv) == 0
    assert capsys.readouterr().out == ""
    manifest = load_manifest(man)
    assert manifest.output_digest == digest(out.read_bytes())
    code, data = run_command(["replay", str(man)])
    assert code == 0 and data == out.read_bytes()
    # tampered digest: the replay reports a mismatch
    raw = json.loads(man.read_text())
    raw["output_digest"] = "0" * 64
    man.write_text(json.dumps(raw))
    assert run_command(["replay", str(man)])[0] == 1
    assert run_command(["replay", str(tmp_path / "missing.json")])[0] == 2


@pytest.mark.parametrize("fmt", ["json", "csv", "text"])
def test_formats_are_deterministic(fmt):
    argv = ["local-heights", "--curve", "37a", "--point", "2;-3", "--format", fmt]
    a, b = run_command(argv), run_command(argv)
    assert a == b and a[0] == 0 and a[1]

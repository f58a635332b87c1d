import json
import subprocess
import sys

import pytest

from replicasym.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, *argv, "--format", "json")
    return code, json.loads(out)


def test_evaluate_a_3tau_w3(capsys):
    code, d = run_json(capsys, "evaluate", "--witness", "a_3tau", "--state", "w3")
    assert code == 0
    assert d["residual"]["exact"] == "0" and d["zero"] is True


def test_evaluate_aas_ghz3(capsys):
    code, d = run_json(capsys, "evaluate", "--witness", "aas", "--state", "ghz3")
    assert code == 0 and d["residual"]["exact"] == "1/162"
    assert abs(d["residual"]["float"] - 1 / 162) < 1e-15
    assert set(d["stats"]) == {"enumerated", "pruned", "surviving", "blocks"}


def test_evaluate_schmidt_rank(capsys):
    code, d = run_json(capsys, "evaluate", "--witness", "schmidt_rank", "--rank", "3", "--state", "schmidt:1/3,1/3,1/3")
    assert code == 0 and d["residual"]["exact"] == "1/27"


def test_evaluate_text_output(capsys):
    code, out, _ = run(capsys, "evaluate", "--witness", "aas", "--state", "ghz3")
    assert code == 0
    assert "residual  1/162" in out and "zero      false" in out


@pytest.mark.parametrize(
    "src, dst, witness, kind, code",
    [
        ("w", "ghz", "a_tau", "INEQUIVALENT", 0),
        ("chi3", "ghz3", "aas", "INEQUIVALENT", 0),
        ("ghz3", "w3", "aas", "INCONCLUSIVE", 1),
        ("chi3", "biseparable:1/3,1/3,1/3", "aas", "OBSTRUCTION", 0),
    ],
)
def test_classify_examples(capsys, src, dst, witness, kind, code):
    rc, d = run_json(capsys, "classify", "--from", src, "--to", dst, "--witness", witness)
    assert rc == code
    assert d["kind"] == kind
    assert {"kind", "witness", "m", "residuals", "ranks", "exact", "annotations"} <= set(d)


def test_classify_joint(capsys):
    rc, d = run_json(capsys, "classify", "--from", "ghz3", "--to", "w3", "--witness", "aas", "--witness", "a_3tau")
    assert rc == 0 and d["kind"] == "INEQUIVALENT"


def test_reproduce_default_and_json(capsys):
    rc, d = run_json(capsys, "reproduce")
    assert rc == 0 and d["passed"]
    ids = [r["id"] for r in d["rows"]]
    assert not any(i.startswith("6.p5") for i in ids)
    assert "runtime_s" not in d["rows"][0]
    rc, out, _ = run(capsys, "reproduce")
    assert rc == 0 and "FAIL" not in out.split("annotations:")[0]


def test_reproduce_include_n5(capsys):
    rc, d = run_json(capsys, "reproduce", "--include-n5", "--trials", "2")
    assert rc == 0
    ids = [r["id"] for r in d["rows"]]
    assert "6.p5.chi5" in ids and "6.p5.ghz5" in ids


def test_output_is_deterministic(capsys):
    first = run(capsys, "classify", "--from", "w", "--to", "ghz", "--witness", "a_tau", "--format", "json")
    second = run(capsys, "classify", "--from", "w", "--to", "ghz", "--witness", "a_tau", "--format", "json")
    assert first == second
    a = run(capsys, "evaluate", "--witness", "a_3tau", "--state", "chi3")
    b = run(capsys, "evaluate", "--witness", "a_3tau", "--state", "chi3")
    assert a == b


def test_threads_do_not_change_residual(capsys):
    _, one = run_json(capsys, "evaluate", "--witness", "a_3tau", "--state", "chi3")
    _, two = run_json(capsys, "evaluate", "--witness", "a_3tau", "--state", "chi3", "--threads", "2")
    assert one["residual"] == two["residual"]


def test_bad_flags_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["evaluate", "--witness", "aas"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["evaluate", "--witness", "aas", "--state", "ghz3", "--engine", "gpu"])
    assert exc.value.code == 2
    code, _, err = run(capsys, "evaluate", "--witness", "nope", "--state", "ghz3")
    assert code == 2 and "unknown witness" in err
    code, _, err = run(capsys, "evaluate", "--witness", "aas", "--state", "schmidt:0.5,0.5")
    assert code == 2
    code, _, _ = run(capsys, "evaluate", "--witness", "aas", "--state", "ghz3", "--replicas", "4")
    assert code == 2
    code, _, _ = run(capsys, "evaluate", "--witness", "schmidt_rank", "--state", "bell")
    assert code == 2


def test_resource_cap_exit_3(capsys):
    code, _, err = run(capsys, "evaluate", "--witness", "a_3tau", "--state", "chi3", "--cap", "10")
    assert code == 3 and "cap" in err


def test_json_files_and_overlap(capsys, tmp_path):
    state = tmp_path / "pair.json"
    state.write_text(json.dumps({"dims": [2, 2], "terms": [{"ket": [1, 2], "amp": 1}, {"ket": [2, 1], "amp": -1}],
                                 "normalize": True}))
    wit = tmp_path / "w.json"
    wit.write_text(json.dumps({"factors": [{"subsystem": 1, "replicas": [1, 2], "kind": "pminus"}]}))
    code, d = run_json(capsys, "evaluate", "--witness", str(wit), "--state", str(state))
    assert code == 0 and d["residual"]["exact"] == "1/4"
    bad = tmp_path / "overlap.json"
    bad.write_text(json.dumps({"factors": [
        {"subsystem": 1, "replicas": [1, 2], "kind": "sym"},
        {"subsystem": 1, "replicas": [2, 3], "kind": "antisym"}]}))
    code, _, err = run(capsys, "evaluate", "--witness", str(bad), "--state", "ghz3")
    assert code == 2 and "overlap" in err
    code, d = run_json(capsys, "evaluate", "--witness", str(bad), "--state", "ghz3", "--engine", "reference")
    assert code == 0 and d["engine"] == "reference"


def test_other_commands(capsys):
    code, d = run_json(capsys, "tangle", "--state", "ghz")
    assert code == 0 and d["tangle"] == "1"
    code, d = run_json(capsys, "ranks", "--state", "biseparable:1/2,1/3,1/6")
    assert d["ranks"] == [3, 3, 1]
    code, d = run_json(capsys, "commutes", "--witness", "a_tau", "--state", "ghz", "--trials", "3", "--seed", "5")
    assert code == 0 and d["commutes"] is True
    code, d = run_json(capsys, "crosscheck", "--witness", "aas", "--state", "chi3plus")
    assert code == 0 and d["agree"] and d["canonical"]["exact"] == "1/324"


def test_state_names(capsys):
    for name in ("bell", "ghz", "ghz:4,2", "w:4", "aharonov", "aharonov_plus", "chi3+", "product:1,2,1", "ghz5"):
        code, _, err = run(capsys, "ranks", "--state", name)
        assert code == 0, (name, err)
    code, d = run_json(capsys, "ranks", "--state", "ghz", "--parties", "4", "--levels", "3")
    assert d["ranks"] == [3, 3, 3, 3]
    code, d = run_json(capsys, "ranks", "--state", "biseparable", "--lambdas", "1/2,1/2", "--phi-dim", "2",
                       "--phi-index", "2")
    assert d["ranks"] == [2, 2, 1]


def test_console_script_entry_point():
    out = subprocess.run([sys.executable, "-m", "replicasym", "evaluate", "--witness", "aas", "--state", "ghz3",
                          "--format", "json"], capture_output=True, text=True, check=True)
    assert json.loads(out.stdout)["residual"]["exact"] == "1/162"

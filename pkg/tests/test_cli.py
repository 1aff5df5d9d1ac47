import io
import json

import pytest

from startflow.cli import main, parse_args

from .conftest import CORPUS

VALID = CORPUS.valid_dir
INVALID = CORPUS.invalid_dir
EVAL = CORPUS.eval_dir


@pytest.fixture(autouse=True)
def _no_user_config(monkeypatch):
    monkeypatch.delenv("STARTFLOW_CONFIG", raising=False)


def run(capsys, *argv):
    status = main([str(arg) for arg in argv])
    out, err = capsys.readouterr()
    return status, out, err


def test_check_clean(capsys):
    status, out, _ = run(capsys, "check", VALID / "clean.sfw")
    assert status == 0
    assert out == "0 defects\n"


def test_check_defects_and_thresholds(capsys):
    path = VALID / "defects8.sfw"
    status, out, _ = run(capsys, "check", path)
    assert status == 1
    assert out.endswith("8 defects, mean severity 2.63\n")
    assert run(capsys, "check", path, "--fail-on", "4")[0] == 1
    assert run(capsys, "check", path, "--fail-on", "4", "--disable", "R8")[0] == 0
    assert run(capsys, "check", path, "--fail-on", "4", "--disable", "R8", "--severity", "R2=4")[0] == 1


def test_check_json(capsys):
    status, out, _ = run(capsys, "check", VALID / "defects8.sfw", "--json", "--jobs", "3")
    assert status == 1
    assert out == CORPUS.golden("defects8", "check.json").read_text(encoding="utf-8")


def test_check_reports_parse_errors(capsys):
    path = INVALID / "broken.sfw"
    status, out, _ = run(capsys, "check", path)
    assert status == 2
    assert out.splitlines() == [
        f"{path}:3:45 E-SYNTAX unexpected 'one'",
        f"{path}:6:18 E-SYNTAX unexpected 'submit'",
    ]


def test_check_structure_errors(capsys):
    status, out, _ = run(capsys, "check", INVALID / "ghost.sfw")
    assert status == 2
    assert out.startswith("ERROR E-REF F1/ghost")


def test_missing_file(capsys):
    status, _, err = run(capsys, "check", VALID / "nope.sfw")
    assert status == 3
    assert "nope.sfw" in err


def test_non_utf8_source_exits_with_3(capsys, tmp_path):
    path = tmp_path / "bad.sfw"
    path.write_bytes(b'project "\xff\xfe"\n')
    for command in ("check", "fmt", "graph", "metrics"):
        status, _, err = run(capsys, command, path)
        assert status == 3
        assert "E-ENCODING" in err


def test_bad_usage_exits_with_3(capsys):
    with pytest.raises(SystemExit) as excinfo:
        parse_args(["check", "x.sfw", "--severity", "R9=2"])
    assert excinfo.value.code == 3
    with pytest.raises(SystemExit) as excinfo:
        parse_args(["frobnicate"])
    assert excinfo.value.code == 3


def test_fmt(capsys, corpus_copy):
    assert run(capsys, "fmt", "--check", CORPUS.golden("caa", "fmt.sfw"))[0] == 0
    status, _, err = run(capsys, "fmt", "--check", VALID / "caa.sfw")
    assert status == 1
    assert "不是规范格式" in err
    status, out, _ = run(capsys, "fmt", VALID / "clean.sfw")
    assert out == CORPUS.golden("clean", "fmt.sfw").read_text(encoding="utf-8")

    target = corpus_copy.valid_dir / "caa.sfw"
    assert run(capsys, "fmt", "--write", target)[0] == 0
    assert target.read_text(encoding="utf-8") == CORPUS.golden("caa", "fmt.sfw").read_text(encoding="utf-8")


def test_graph(capsys, tmp_path):
    status, out, _ = run(capsys, "graph", VALID / "caa.sfw", "--feature", "groups")
    assert status == 0
    assert "cluster_groups" in out
    output = tmp_path / "caa.dot"
    assert run(capsys, "graph", VALID / "caa.sfw", "-o", output)[0] == 0
    assert output.read_text(encoding="utf-8").startswith("digraph")
    assert run(capsys, "graph", VALID / "caa.sfw", "--feature", "nope")[0] == 3


def test_graph_refuses_structure_errors(capsys):
    status, out, _ = run(capsys, "graph", INVALID / "ghost.sfw")
    assert status == 2
    assert out.startswith("ERROR E-REF F1/ghost")
    assert "digraph" not in out


def test_repeated_runs_are_byte_identical(capsys):
    for argv in (
        ("eval", EVAL / "forms.csv", "--json"),
        ("tam", EVAL / "tam.csv", "--json"),
        ("graph", VALID / "caa.sfw"),
    ):
        first = run(capsys, *argv)
        second = run(capsys, *argv)
        assert first[0] == 0
        assert first[:2] == second[:2]


def test_metrics(capsys):
    path = VALID / "caa.sfw"
    assert run(capsys, "metrics", path, "--task", "add-certificate")[1] == "5\n"
    assert run(capsys, "metrics", path, "--feature", "request", "--to", "cert-sent")[1] == "3\n"
    status, out, _ = run(capsys, "metrics", path, "--feature", "request", "--from", "cert-error", "--to", "home")
    assert (status, out) == (0, "3\n")
    status, out, _ = run(capsys, "metrics", path, "--json")
    assert json.loads(out) == json.loads(CORPUS.golden("caa", "metrics.json").read_text(encoding="utf-8"))


def test_metrics_errors(capsys):
    path = VALID / "caa.sfw"
    assert run(capsys, "metrics", path, "--to", "home")[0] == 3
    assert run(capsys, "metrics", path, "--task", "nope")[0] == 3
    assert run(capsys, "metrics", path, "--feature", "request", "--to", "nowhere")[0] == 3
    assert run(capsys, "metrics", INVALID / "ghost.sfw")[0] == 2


def test_eval_text(capsys):
    status, out, _ = run(capsys, "eval", EVAL / "forms.csv", "--group", "control", "--top", "2")
    assert status == 0
    assert out.startswith(
        "group control\n"
        "  total discrepancies: 51\n"
        "  false positives: 9\n"
        "  real defects: 42\n"
        "  unique defects: 18\n"
        "  duplicates: 24\n"
        "  mean severity: 2.52\n"
        "  heuristics:\n"
        "    User control and freedom: 10\n"
        "    Match between system and real world: 9\n"
        "  locations:\n"
    )


def test_eval_json_and_unknown_group(capsys):
    status, out, _ = run(capsys, "eval", EVAL / "forms.csv", "--json")
    assert status == 0
    assert out == CORPUS.golden("forms", "eval.json").read_text(encoding="utf-8")
    status, _, err = run(capsys, "eval", EVAL / "forms.csv", "--group", "nobody")
    assert status == 2
    assert "E-EMPTY-GROUP" in err


def test_tam(capsys):
    status, out, _ = run(capsys, "tam", EVAL / "tam.csv", "--group", "experimental", "--json")
    assert status == 0
    assert json.loads(out)["constructs"] == {"PU": 4.5, "PEOU": 4.06, "PE": 4.5, "BI": 4.75}
    status, out, _ = run(capsys, "tam", EVAL / "tam.csv")
    assert "group control (4 respondents)\n  PU: 4.42\n" in out


def test_wizard_requires_answers_without_terminal(capsys, monkeypatch, corpus_copy):
    monkeypatch.setattr("sys.stdin", io.StringIO())
    status, _, err = run(capsys, "wizard", corpus_copy.valid_dir / "clean.sfw")
    assert status == 3
    assert "--answers" in err


def test_wizard_with_scripted_answers(capsys, corpus_copy, tmp_path):
    answers = tmp_path / "answers.json"
    answers.write_text(json.dumps({"F1.step2": ["yes", "no"], "F1.R7": "no"}), encoding="utf-8")
    project = corpus_copy.valid_dir / "clean.sfw"
    status, out, _ = run(capsys, "wizard", project, "--answers", answers)
    assert status == 0
    assert out.splitlines()[-1] == "wizard paused: step 2, round 2, pending 1, resolved 0"
    assert (corpus_copy.valid_dir / "clean.wizard.json").exists()

    answers.write_text("{}", encoding="utf-8")
    status, out, _ = run(capsys, "wizard", project, "--answers", answers)
    assert out.splitlines()[-1] == "wizard completed: step 3, round 2, pending 0, resolved 1"


def test_corpus_command(capsys, corpus_copy):
    status, out, _ = run(capsys, "corpus", "--root", corpus_copy.root)
    assert status == 0
    assert out.endswith("golden file(s) match\n")
    (corpus_copy.valid_dir / "clean.sfw").write_text('project "changed"\n', encoding="utf-8")
    assert run(capsys, "corpus", "--root", corpus_copy.root)[0] == 1


def test_bad_config_exits_with_3(capsys, tmp_path):
    config = tmp_path / "bad.json"
    config.write_text('{"severity": {"R2": 9}}', encoding="utf-8")
    status, _, err = run(capsys, "-c", config, "check", VALID / "clean.sfw")
    assert status == 3
    assert "E-CONFIG" in err


def test_config_file_overrides_project_settings(capsys, tmp_path):
    config = tmp_path / "startflow.json"
    config.write_text('{"severity": {"R2": 4}, "check": {"fail_on": 4}}', encoding="utf-8")
    path = VALID / "rules" / "r2-fail.sfw"
    assert run(capsys, "check", path)[0] == 0
    status, out, _ = run(capsys, "check", path, "-c", config)
    assert status == 1
    assert out.startswith("CATASTROPHIC R2")
    assert run(capsys, "check", path, "-c", config, "--severity", "R2=2")[0] == 0

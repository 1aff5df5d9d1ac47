from dataclasses import replace
from fractions import Fraction

import pytest

from startflow.config import RULE_IDS, LintConfig
from startflow.dsl import parse
from startflow.lint import RULES, lint_feature, lint_project
from startflow.model import TriggerText
from startflow.report import render_text

from .conftest import CLEAN_SOURCE

BRANCHING = """\
story S1 as "user" want "finish" prio 1
screen start "Start" entry {
  button go "Continue"
  button alt "Elsewhere"
}
screen done "Done" feedback {
  button again "Start over"
}
screen other "Other" {
  button x "Back home"
}
feature F1 for S1 {
  use start done other
  connect start.go -> done
  connect start.alt -> other
  connect done.again -> start back
  connect other.x -> start back
}
"""


def _rules(report):
    return [defect.rule for defect in report.defects]


@pytest.mark.parametrize("rule", RULE_IDS)
def test_failing_fixture_triggers_exactly_its_rule(rule, load):
    report = lint_project(load(f"{rule.lower()}-fail"))
    assert _rules(report) == [rule]
    expected_errors = ["E-CONN-SRC"] if rule == "R8" else []
    assert [error.code for error in report.structure_errors] == expected_errors
    assert report.blocking_errors == []


@pytest.mark.parametrize("rule", RULE_IDS)
def test_passing_fixture_is_clean(rule, load):
    report = lint_project(load(f"{rule.lower()}-pass"))
    assert report.defects == ()
    assert report.structure_errors == ()


def test_one_defect_per_rule(load):
    report = lint_project(load("defects8"))
    assert _rules(report) == list(RULE_IDS)
    assert [defect.feature for defect in report.defects] == [f"F{i}" for i in range(1, 9)]
    assert report.mean_severity == Fraction(21, 8)
    assert report.summary()["mean_severity"] == 2.63
    assert report.max_severity() == 4
    assert report.count_at_or_above(3) == 4


def test_clean_and_case_study_have_no_defects(load):
    for name in ("clean", "caa"):
        report = lint_project(load(name))
        assert report.defects == ()
        assert report.structure_errors == ()


def test_missing_way_back_in_case_study(load):
    report = lint_project(load("caa-nav-drift"))
    assert _rules(report) == ["R7"]
    assert report.defects[0].screen == "group-detail"


def test_strict_feedback_flags_every_plain_terminal():
    project = parse(BRANCHING)
    assert lint_project(project).defects == ()
    strict = lint_project(project, LintConfig(strict_feedback=True))
    assert [(d.rule, d.screen) for d in strict.defects] == [("R2", "other")]


def test_severity_override_and_disable(load):
    project = load("r2-fail")
    raised = lint_project(project, LintConfig(severity={"R2": 4}))
    assert [d.severity for d in raised.defects] == [4]
    assert lint_project(project, LintConfig(disabled=frozenset({"R2"}))).defects == ()


def test_label_length_and_blocklist(clean_project):
    longer = lint_project(clean_project, LintConfig(min_label_length=20))
    assert [(d.rule, d.element) for d in longer.defects] == [("R3", "again"), ("R3", "go")]
    blocked = lint_project(clean_project, LintConfig().merged({"blocklist": ["Continue"]}))
    assert [(d.rule, d.screen, d.element) for d in blocked.defects] == [("R3", "start", "go")]


def test_project_lint_statements_apply():
    project = parse("lint severity R2 1\n" + CLEAN_SOURCE.replace(" feedback {", " {"))
    assert [(d.rule, d.severity) for d in lint_project(project).defects] == [("R2", 1)]


def test_blocked_feature_keeps_element_rules():
    project = parse(CLEAN_SOURCE.replace("use start done", "use start done ghost"))
    report = lint_project(project)
    assert report.defects == ()
    assert [error.code for error in report.blocking_errors] == ["E-REF"]

    source = CLEAN_SOURCE.replace("use start done", "use start done ghost").replace(
        '  button go "Continue"\n',
        '  field mail "E-mail" required unspecified\n  button go "x"\n',
    )
    report = lint_project(parse(source))
    assert [error.code for error in report.blocking_errors] == ["E-REF"]
    assert [(d.rule, d.screen, d.element) for d in report.defects] == [
        ("R3", "start", "go"),
        ("R5", "start", "mail"),
    ]


def test_lint_feature_without_graph_rules(load):
    project = load("r2-fail")
    feature = project.features[0]
    assert _rules(lint_project(project)) == ["R2"]
    assert lint_feature(feature, project, graph_rules=False) == []


def test_disabling_a_rule_removes_only_its_defects(load):
    project = load("defects8")
    full = lint_project(project).defects
    for rule in RULE_IDS:
        config = project.config.merged({"disabled": [rule]})
        assert lint_project(project, config).defects == tuple(d for d in full if d.rule != rule)


def _with_extra_trigger(project, screen_id):
    extra = TriggerText("extra-action", "Extra action")
    screens = tuple(
        replace(screen, elements=screen.elements + (extra,)) if screen.id == screen_id else screen
        for screen in project.screens
    )
    return replace(project, screens=screens)


@pytest.mark.parametrize("name", ["defects8", "r1-fail", "caa-nav-drift", "clean"])
def test_adding_a_trigger_never_adds_missing_trigger_defects(name, load):
    project = load(name)

    def missing(p):
        return {(d.feature, d.screen) for d in lint_project(p).defects if d.rule == "R1"}

    before = missing(project)
    for screen in project.screens:
        assert missing(_with_extra_trigger(project, screen.id)) <= before


def test_parallel_lint_matches_sequential(load):
    project = load("defects8")
    assert lint_project(project, jobs=4) == lint_project(project, jobs=1)


def test_lint_feature_returns_sorted_defects(load):
    project = load("defects8")
    defects = lint_feature(project.feature("F8"), project)
    assert [(d.rule, d.screen, d.element) for d in defects] == [("R8", "f8-done", "msg")]


def test_every_rule_is_registered():
    assert tuple(RULES) == RULE_IDS
    assert all(rule.question.endswith("?") for rule in RULES.values())


def test_render_text(load):
    report = lint_project(load("r2-fail"))
    assert render_text(report) == (
        "MINOR R2 [Visibility of system status] F1/done: "
        "no screen at the end of the flow gives feedback that the task is complete\n"
        "1 defect, mean severity 2.00\n"
    )
    assert render_text(lint_project(load("clean"))) == "0 defects\n"


def test_way_back_on_a_dense_flow():
    names = [f"s{i}" for i in range(12)]
    lines = ['story S1 as "user" want "wander" prio 1']
    for index, name in enumerate(names):
        tag = " entry" if index == 0 else ""
        buttons = "".join(f'  button to-{other} "Open {other}"\n' for other in names[1:] if other != name)
        lines.append(f'screen {name} "{name}"{tag} {{\n{buttons}}}')
    connects = "".join(
        f"  connect {name}.to-{other} -> {other}\n" for name in names for other in names[1:] if other != name
    )
    lines.append(f"feature F1 for S1 {{\n  use {' '.join(names)}\n{connects}}}")
    project = parse("\n".join(lines) + "\n")
    report = lint_project(project)
    assert report.structure_errors == ()
    assert "R7" not in _rules(report)

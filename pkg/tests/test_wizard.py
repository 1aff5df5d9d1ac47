import io
import json

import pytest
from rich.console import Console

from startflow.config import RULE_IDS
from startflow.errors import ConfigError, UsageError
from startflow.state import WizardStep
from startflow.wizard import (
    STEP1_QUESTIONS,
    STEP2_QUESTIONS,
    ScriptedAnswers,
    Wizard,
    WizardSession,
    feature_order,
)


class RecordingAnswers(ScriptedAnswers):
    """Scripted answers that remember every key asked and can stop on one."""

    def __init__(self, mapping=None, interrupt_on=None):
        super().__init__(mapping or {})
        self.asked = []
        self.interrupt_on = interrupt_on

    def _next(self, key):
        if key == self.interrupt_on:
            raise KeyboardInterrupt
        self.asked.append(key)
        return super()._next(key)


@pytest.fixture
def make_wizard(clean_project, tmp_path):
    def _make(answers):
        return Wizard(
            clean_project,
            tmp_path / "demo.sfw",
            answers,
            console=Console(file=io.StringIO(), width=120),
        )

    return _make


def test_question_banks():
    assert len(STEP1_QUESTIONS) == 6
    assert len(STEP2_QUESTIONS) == 7


def test_all_yes_completes_in_one_round(make_wizard, tmp_path):
    answers = RecordingAnswers()
    result = make_wizard(answers).run()
    assert not result.paused
    session = result.session
    assert session.completed and session.round == 1
    assert session.pending == [] and session.resolved == []
    assert answers.asked == (
        [f"step1.q{i}" for i in range(1, 7)] + ["F1.step2"] + [f"F1.{rule}" for rule in RULE_IDS]
    )
    saved = json.loads((tmp_path / "demo.wizard.json").read_text(encoding="utf-8"))
    assert saved["completed"] is True


def test_refinement_sends_session_back_to_build(make_wizard):
    answers = RecordingAnswers({"F1.R2": "no: add a confirmation screen"})
    session = make_wizard(answers).run().session
    assert session.completed
    assert session.round == 2
    assert [item.key for item in session.resolved] == ["F1.R2"]
    assert session.resolved[0].note == "add a confirmation screen"
    # round two revisits the flow and re-asks only the pending question
    assert answers.asked[-2:] == ["F1.step2", "F1.R2"]


def test_each_rejected_question_becomes_pending(make_wizard):
    rejected = ["F1.R1", "F1.R3", "F1.R5"]
    mapping = {key: "no" for key in rejected}
    mapping["F1.step2"] = ["yes", "no"]
    result = make_wizard(RecordingAnswers(mapping)).run()
    assert result.paused
    session = result.session
    assert session.round == 2
    assert session.current_step is WizardStep.BUILD
    assert session.pending_keys() == rejected


def test_unfinished_flow_pauses_and_resumes(make_wizard):
    first = make_wizard(RecordingAnswers({"F1.step2": "no"})).run()
    assert first.paused
    assert first.session.current_step is WizardStep.BUILD

    answers = RecordingAnswers()
    second = make_wizard(answers).run()
    assert second.session.completed
    assert answers.asked[0] == "F1.step2"
    assert not any(key.startswith("step1.") for key in answers.asked)


def test_interrupt_saves_progress(make_wizard):
    first = make_wizard(RecordingAnswers(interrupt_on="F1.R4")).run()
    assert first.paused
    assert first.session.current_step is WizardStep.VERIFY

    answers = RecordingAnswers()
    second = make_wizard(answers).run()
    assert second.session.completed
    assert answers.asked == [f"F1.{rule}" for rule in RULE_IDS[3:]]


def test_reset_starts_over(make_wizard):
    make_wizard(RecordingAnswers()).run()
    answers = RecordingAnswers()
    result = make_wizard(answers).run(reset=True)
    assert result.session.completed
    assert answers.asked[0] == "step1.q1"


def test_bad_scripted_answers():
    with pytest.raises(UsageError):
        ScriptedAnswers({"F1.R1": 3})
    with pytest.raises(UsageError):
        ScriptedAnswers({"F1.R1": "maybe"}).confirm("F1.R1", "?")


def test_corrupt_session_file(make_wizard, tmp_path):
    (tmp_path / "demo.wizard.json").write_text('{"step": 9}', encoding="utf-8")
    with pytest.raises(ConfigError):
        make_wizard(RecordingAnswers()).run()


def test_session_round_trip():
    session = WizardSession(project="demo.sfw", step=3, round=2)
    session.record("F1.R1", "no", "missing back button")
    assert WizardSession.from_dict(session.to_dict()) == session


def test_features_follow_story_priority(load):
    caa = load("caa")
    assert [feature.id for feature in feature_order(caa)] == ["request", "groups", "certificates"]

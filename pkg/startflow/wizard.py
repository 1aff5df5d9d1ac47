"""Interactive Step 1-3 walkthrough with a resumable session file.

The session moves 1 -> 2 -> 3. A Step-3 round that leaves refinements pending
sends the session back to Step 2 for another round, and the next Step 3 asks
only the pending questions again. Every answer is written to the sidecar file
as soon as it is given, so an interrupted run resumes where it stopped.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Protocol, Sequence, Union

from rich.console import Console
from rich.prompt import Confirm, Prompt
from rich.table import Table

from .config import RULE_IDS, LintConfig
from .errors import ConfigError, UsageError
from .lint import RULES, lint_feature
from .logging import get_stage_logger
from .metrics import actions_to_feedback
from .model import Feature, Project, prioritize_stories
from .paths import wizard_session_path
from .state import WizardStep

STEP1_QUESTIONS = (
    "Have we selected the features we want to create in the wireflow? Is there any other "
    "feature that could be used at this time?",
    "Of the selected features, which is the most important? And, the next one?",
    "In the first contact with the application, what tasks will the user be able to perform?",
    "For users who already have experience with the application, what tasks will they be able "
    "to perform?",
    "What market demand will the application meet? In what way?",
    "Are there competitors in the market? What tasks will be similar? What will be innovative "
    "about the application?",
)

STEP2_QUESTIONS = (
    "How many screens does it take for the user to execute this feature from start to finish?",
    "What are the necessary elements on each screen for the user to perform this feature?",
    "Which other screen will the trigger on one screen take the user to?",
    "If the user enters information incorrectly, what will happen to the flow of feature in "
    "the application?",
    "If the user wants to return to a previous screen, is it possible?",
    "Are there ways for the user to perform this feature with fewer clicks?",
    "What will happen to the application flow when the user completes the feature?",
)

SESSION_VERSION = 1


def step1_key(index: int) -> str:
    return f"step1.q{index}"


def step2_key(feature_id: str) -> str:
    return f"{feature_id}.step2"


def step3_key(feature_id: str, rule_id: str) -> str:
    return f"{feature_id}.{rule_id}"


@dataclass
class Refinement:
    feature: str
    question: str
    note: str = ""

    @property
    def key(self) -> str:
        return step3_key(self.feature, self.question)


@dataclass
class WizardSession:
    project: str
    step: int = int(WizardStep.ORGANIZE)
    round: int = 1
    completed: bool = False
    pending: List[Refinement] = field(default_factory=list)
    resolved: List[Refinement] = field(default_factory=list)
    answers: List[Dict] = field(default_factory=list)
    version: int = SESSION_VERSION

    @property
    def current_step(self) -> WizardStep:
        return WizardStep(self.step)

    def pending_keys(self) -> List[str]:
        return [item.key for item in self.pending]

    def answered(self, key: str, *, accepted_only: bool = False) -> bool:
        for entry in self.answers:
            if entry["round"] != self.round or entry["step"] != self.step or entry["key"] != key:
                continue
            if not accepted_only or entry["answer"] == "yes":
                return True
        return False

    def record(self, key: str, answer: str, note: str = "") -> None:
        entry = {"round": self.round, "step": self.step, "key": key, "answer": answer}
        if note:
            entry["note"] = note
        self.answers.append(entry)

    def to_dict(self) -> Dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict) -> "WizardSession":
        try:
            step = int(data.get("step", 1))
            WizardStep(step)
            return cls(
                project=str(data["project"]),
                step=step,
                round=int(data.get("round", 1)),
                completed=bool(data.get("completed", False)),
                pending=[Refinement(**item) for item in data.get("pending", [])],
                resolved=[Refinement(**item) for item in data.get("resolved", [])],
                answers=list(data.get("answers", [])),
                version=int(data.get("version", SESSION_VERSION)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"wizard session is corrupt: {exc}") from exc

    @classmethod
    def load(cls, path: Path) -> Optional["WizardSession"]:
        if not path.exists():
            return None
        try:
            with open(path, encoding="utf-8") as f:
                data = json.load(f)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"wizard session {path} is not valid JSON: {exc.msg}") from exc
        return cls.from_dict(data)

    def save(self, path: Path) -> None:
        tmp = path.with_name(path.name + ".tmp")
        tmp.write_text(json.dumps(self.to_dict(), ensure_ascii=False, indent=2) + "\n", encoding="utf-8")
        tmp.replace(path)


class AnswerSource(Protocol):
    def confirm(self, key: str, prompt: str, default: bool = True) -> tuple[bool, str]: ...

    def text(self, key: str, prompt: str) -> str: ...


class ScriptedAnswers:
    """Answers from a JSON mapping of question key to answer(s).

    A list is consumed one entry per ask; a plain string answers once. Keys
    without (remaining) answers are answered "yes". A "no" may carry a note as
    ``"no: <note>"``.
    """

    def __init__(self, mapping: Dict[str, Union[str, Sequence[str]]]) -> None:
        self._queues: Dict[str, List[str]] = {}
        for key, value in mapping.items():
            if isinstance(value, str):
                self._queues[key] = [value]
            elif isinstance(value, list) and all(isinstance(item, str) for item in value):
                self._queues[key] = list(value)
            else:
                raise UsageError(f"answer for '{key}' must be a string or a list of strings")

    @classmethod
    def from_file(cls, path: Path) -> "ScriptedAnswers":
        try:
            with open(path, encoding="utf-8") as f:
                data = json.load(f)
        except json.JSONDecodeError as exc:
            raise UsageError(f"answers file {path} is not valid JSON: {exc.msg}") from exc
        if not isinstance(data, dict):
            raise UsageError(f"answers file {path} must hold a JSON object")
        return cls(data)

    def _next(self, key: str) -> str:
        queue = self._queues.get(key)
        if queue:
            return queue.pop(0)
        return "yes"

    def confirm(self, key: str, prompt: str, default: bool = True) -> tuple[bool, str]:
        raw = self._next(key).strip()
        verdict, _, note = raw.partition(":")
        verdict = verdict.strip().lower()
        if verdict not in ("yes", "no"):
            raise UsageError(f"answer for '{key}' must be 'yes' or 'no', got {raw!r}")
        return verdict == "yes", note.strip()

    def text(self, key: str, prompt: str) -> str:
        return self._next(key)


class ConsoleAnswers:
    def __init__(self, console: Console) -> None:
        self.console = console

    def confirm(self, key: str, prompt: str, default: bool = True) -> tuple[bool, str]:
        accepted = Confirm.ask(prompt, console=self.console, default=default)
        note = ""
        if not accepted:
            note = Prompt.ask("需要怎样改进？", console=self.console, default="")
        return accepted, note

    def text(self, key: str, prompt: str) -> str:
        return Prompt.ask(prompt, console=self.console, default="")


@dataclass
class WizardResult:
    session: WizardSession
    paused: bool = False


def feature_order(project: Project) -> List[Feature]:
    """Features following their stories' priority (declaration order breaks ties)."""
    rank = {story.id: index for index, story in enumerate(prioritize_stories(project.stories))}
    features = list(project.features)
    return sorted(features, key=lambda feature: rank.get(feature.story, len(rank)))


class Wizard:
    def __init__(
        self,
        project: Project,
        project_path: Path,
        answers: Optional[AnswerSource] = None,
        *,
        console: Optional[Console] = None,
        lint_config: Optional[LintConfig] = None,
        session_path: Optional[Path] = None,
    ) -> None:
        self.project = project
        self.project_path = project_path
        self.console = console or Console()
        self.answers = answers if answers is not None else ConsoleAnswers(self.console)
        self.lint_config = lint_config or project.config
        self.session_path = session_path or wizard_session_path(project_path)
        self.logger = get_stage_logger("wizard")

    def load_session(self, reset: bool = False) -> WizardSession:
        if reset and self.session_path.exists():
            self.session_path.unlink()
            self.logger.info("已重置向导会话 %s", self.session_path)
        session = WizardSession.load(self.session_path)
        if session is None:
            session = WizardSession(project=self.project_path.name)
            self._save(session)
        else:
            self.logger.info("恢复向导会话：第 %s 轮，%s", session.round, session.current_step)
        return session

    def _save(self, session: WizardSession) -> None:
        session.save(self.session_path)

    def run(self, reset: bool = False) -> WizardResult:
        session = self.load_session(reset)
        try:
            while not session.completed:
                step = session.current_step
                if step is WizardStep.ORGANIZE:
                    self._step_organize(session)
                elif step is WizardStep.BUILD:
                    if not self._step_build(session):
                        self.console.print("[yellow]会话已暂停，完成 wireflow 后重新运行即可继续。[/yellow]")
                        return WizardResult(session, paused=True)
                else:
                    self._step_verify(session)
        except KeyboardInterrupt:
            self._save(session)
            self.console.print("\n[yellow]向导已中断，进度已保存。[/yellow]")
            return WizardResult(session, paused=True)
        self.console.print(
            f"[green]全部问题均已得到肯定回答（共 {session.round} 轮，解决 {len(session.resolved)} 项改进）。[/green]"
        )
        return WizardResult(session)

    def _advance(self, session: WizardSession, step: WizardStep) -> None:
        session.step = int(step)
        self._save(session)
        self.logger.info("向导进入 %s（第 %s 轮）", step, session.round)

    def _step_organize(self, session: WizardSession) -> None:
        self.console.rule(str(WizardStep.ORGANIZE))
        table = Table("优先级", "故事", "角色", "目标")
        for story in prioritize_stories(self.project.stories):
            table.add_row(str(story.priority), story.id, story.role, story.want)
        self.console.print(table)
        for index, question in enumerate(STEP1_QUESTIONS, start=1):
            key = step1_key(index)
            if session.answered(key):
                continue
            answer = self.answers.text(key, question)
            session.record(key, "noted", answer)
            self._save(session)
        self._advance(session, WizardStep.BUILD)

    def _features_for_round(self, session: WizardSession) -> List[Feature]:
        features = feature_order(self.project)
        if session.round == 1:
            return features
        pending = {item.feature for item in session.pending}
        return [feature for feature in features if feature.id in pending]

    def _step_build(self, session: WizardSession) -> bool:
        self.console.rule(f"{WizardStep.BUILD}（第 {session.round} 轮）")
        for feature in self._features_for_round(session):
            key = step2_key(feature.id)
            if session.answered(key, accepted_only=True):
                continue
            self._show_feature(feature, session)
            accepted, note = self.answers.confirm(key, f"功能 {feature.id} 的 wireflow 是否已完成？")
            session.record(key, "yes" if accepted else "no", note)
            self._save(session)
            if not accepted:
                self.logger.info("功能 %s 的 wireflow 尚未完成，暂停会话", feature.id)
                return False
        self._advance(session, WizardStep.VERIFY)
        return True

    def _show_feature(self, feature: Feature, session: WizardSession) -> None:
        story = self.project.story(feature.story)
        if story is not None:
            benefit = f", so that {story.why}" if story.why else ""
            self.console.print(f"[bold]{feature.id}[/bold]: As a {story.role}, I want {story.want}{benefit}")
        steps = actions_to_feedback(feature, self.project)
        self.console.print(
            f"  屏幕 {len(feature.screens)} 个，连线 {len(feature.connectors)} 条，"
            f"入口到反馈最少 {steps if steps is not None else '-'} 步"
        )
        for item in session.pending:
            if item.feature == feature.id:
                self.console.print(f"  [yellow]待改进 {item.question}[/yellow] {item.note}")
        for question in STEP2_QUESTIONS:
            self.console.print(f"  - {question}")

    def _questions_for_round(self, session: WizardSession) -> List[tuple[Feature, str]]:
        if session.round == 1:
            return [(feature, rule) for feature in feature_order(self.project) for rule in RULE_IDS]
        features = {feature.id: feature for feature in self.project.features}
        return [(features[item.feature], item.question) for item in list(session.pending) if item.feature in features]

    def _step_verify(self, session: WizardSession) -> None:
        self.console.rule(f"{WizardStep.VERIFY}（第 {session.round} 轮）")
        findings: Dict[str, List] = {}
        for feature, rule_id in self._questions_for_round(session):
            key = step3_key(feature.id, rule_id)
            if session.answered(key):
                continue
            if feature.id not in findings:
                findings[feature.id] = lint_feature(feature, self.project, self.lint_config)
            rule = RULES[rule_id]
            hits = [defect for defect in findings[feature.id] if defect.rule == rule_id]
            self.console.print(f"[bold]{key}[/bold] [{rule.heuristic}] {rule.description}")
            if hits:
                self.console.print(f"  [red]自动检查发现 {len(hits)} 个问题[/red]: " + "; ".join(d.message for d in hits))
            # 自动检查有命中时，交互缺省回答为“否”
            accepted, note = self.answers.confirm(key, rule.question, default=not hits)
            session.record(key, "yes" if accepted else "no", note)
            self._apply_answer(session, feature.id, rule_id, accepted, note)
            self._save(session)
        if session.pending:
            session.round += 1
            self.console.print(f"[yellow]{len(session.pending)} 项需要改进，返回步骤二。[/yellow]")
            self._advance(session, WizardStep.BUILD)
        else:
            session.completed = True
            self._save(session)
            self.logger.info("向导完成，共 %s 轮", session.round)

    def _apply_answer(self, session: WizardSession, feature_id: str, rule_id: str, accepted: bool, note: str) -> None:
        key = step3_key(feature_id, rule_id)
        existing = next((item for item in session.pending if item.key == key), None)
        if accepted:
            if existing is not None:
                session.pending.remove(existing)
                session.resolved.append(existing)
            return
        if existing is None:
            session.pending.append(Refinement(feature_id, rule_id, note))
        elif note:
            existing.note = note

"""Wireflow domain model and structural validation.

A :class:`Project` holds user stories, screens (wireframes made of layout
elements, input fields and triggers) and features (the screens and connectors
that make up one user flow). Every value is immutable once built.
"""

from __future__ import annotations

import enum
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Iterator, List, Optional, Tuple, Union

from .config import LintConfig
from .errors import SourceSpan

ID_PATTERN = re.compile(r"[A-Za-z_](?:[A-Za-z0-9_]|-(?!>))*")


def is_identifier(value: str) -> bool:
    return bool(value) and ID_PATTERN.fullmatch(value) is not None


class Tag(enum.Enum):
    ENTRY = "entry"
    FEEDBACK = "feedback"
    ERROR = "error"

    def __str__(self) -> str:
        return self.value


class Required(enum.Enum):
    YES = "yes"
    NO = "no"
    UNSPECIFIED = "unspecified"

    def __str__(self) -> str:
        return self.value


class ConnectorKind(enum.Enum):
    NORMAL = "normal"
    ERROR = "error"
    BACK = "back"

    def __str__(self) -> str:
        return self.value


def _span_field():
    return field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class UserStory:
    id: str
    role: str
    want: str
    why: Optional[str] = None
    priority: int = 1
    span: Optional[SourceSpan] = _span_field()


@dataclass(frozen=True)
class Layout:
    id: str
    kind: str
    label: Optional[str] = None
    span: Optional[SourceSpan] = _span_field()


@dataclass(frozen=True)
class InputField:
    id: str
    label: str
    required: Required = Required.UNSPECIFIED
    span: Optional[SourceSpan] = _span_field()


@dataclass(frozen=True)
class TriggerText:
    id: str
    label: str
    submits: bool = False
    span: Optional[SourceSpan] = _span_field()


@dataclass(frozen=True)
class TriggerIcon:
    id: str
    icon: str
    alt: Optional[str] = None
    submits: bool = False
    span: Optional[SourceSpan] = _span_field()


Element = Union[Layout, InputField, TriggerText, TriggerIcon]
Trigger = Union[TriggerText, TriggerIcon]


def is_trigger(element: Element | None) -> bool:
    return isinstance(element, (TriggerText, TriggerIcon))


def trigger_label(element: Element) -> str:
    """Text a user reads on a trigger (icon alt text falls back to the icon name)."""
    if isinstance(element, TriggerText):
        return element.label
    if isinstance(element, TriggerIcon):
        return element.alt or element.icon
    return element.id


@dataclass(frozen=True)
class Screen:
    id: str
    title: str
    elements: Tuple[Element, ...] = ()
    tags: frozenset = frozenset()
    span: Optional[SourceSpan] = _span_field()

    def element(self, element_id: str) -> Optional[Element]:
        for element in self.elements:
            if element.id == element_id:
                return element
        return None

    @property
    def triggers(self) -> Tuple[Trigger, ...]:
        return tuple(e for e in self.elements if is_trigger(e))

    @property
    def input_fields(self) -> Tuple[InputField, ...]:
        return tuple(e for e in self.elements if isinstance(e, InputField))

    def has_tag(self, tag: Tag) -> bool:
        return tag in self.tags


@dataclass(frozen=True)
class SourceRef:
    screen: str
    element: str

    def __str__(self) -> str:
        return f"{self.screen}.{self.element}"


@dataclass(frozen=True)
class Connector:
    id: str
    source: SourceRef
    target: str
    kind: ConnectorKind = ConnectorKind.NORMAL
    span: Optional[SourceSpan] = _span_field()


@dataclass(frozen=True)
class TaskPath:
    """A concrete walk through a feature: one (screen, trigger) pair per action."""

    name: str
    steps: Tuple[SourceRef, ...] = ()
    end: Optional[str] = None
    span: Optional[SourceSpan] = _span_field()

    @property
    def start(self) -> Optional[str]:
        if self.steps:
            return self.steps[0].screen
        return self.end


@dataclass(frozen=True)
class Feature:
    id: str
    story: str
    screens: Tuple[str, ...] = ()
    connectors: Tuple[Connector, ...] = ()
    tasks: Tuple[TaskPath, ...] = ()
    span: Optional[SourceSpan] = _span_field()


@dataclass(frozen=True)
class Project:
    name: str = ""
    stories: Tuple[UserStory, ...] = ()
    features: Tuple[Feature, ...] = ()
    screens: Tuple[Screen, ...] = ()
    config: LintConfig = field(default_factory=LintConfig)

    def screen(self, screen_id: str) -> Optional[Screen]:
        for screen in self.screens:
            if screen.id == screen_id:
                return screen
        return None

    def feature(self, feature_id: str) -> Optional[Feature]:
        for feature in self.features:
            if feature.id == feature_id:
                return feature
        return None

    def story(self, story_id: str) -> Optional[UserStory]:
        for story in self.stories:
            if story.id == story_id:
                return story
        return None


@dataclass(frozen=True)
class StructureError:
    code: str
    message: str
    feature: Optional[str] = None
    connector: Optional[str] = None
    screen: Optional[str] = None
    element: Optional[str] = None
    story: Optional[str] = None
    span: Optional[SourceSpan] = field(default=None, compare=False)

    @property
    def location(self) -> str:
        if self.connector:
            parts = [self.feature, self.connector]
        else:
            parts = [self.feature, self.screen, self.element]
        located = [part for part in parts if part]
        if located:
            return "/".join(located)
        return self.story or "project"

    @property
    def blocking(self) -> bool:
        # E-CONN-SRC 同时由 R8 报告，不阻断后续分析
        return self.code != "E-CONN-SRC"

    def sort_key(self) -> tuple:
        return (
            self.feature or "",
            self.connector or "",
            self.code,
            self.screen or "",
            self.element or "",
            self.message,
        )

    def to_dict(self) -> dict:
        return {
            "code": self.code,
            "location": self.location,
            "message": self.message,
        }

    def __str__(self) -> str:
        return f"{self.code} {self.location}: {self.message}"


def validate_structure(project: Project) -> List[StructureError]:
    """Return every structural violation in ``project``; empty means valid."""
    errors = list(_iter_structure_errors(project))
    return sorted(errors, key=StructureError.sort_key)


def _duplicates(values: Iterable[str]) -> List[str]:
    counts = Counter(values)
    return sorted(value for value, count in counts.items() if count > 1)


def _iter_structure_errors(project: Project) -> Iterator[StructureError]:
    for story in project.stories:
        if not is_identifier(story.id):
            yield StructureError("E-ID", f"malformed story id {story.id!r}", story=story.id, span=story.span)
        if not story.role.strip():
            yield StructureError("E-STORY", "story role is empty", story=story.id, span=story.span)
        if not story.want.strip():
            yield StructureError("E-STORY", "story goal is empty", story=story.id, span=story.span)
        if story.priority < 1:
            yield StructureError(
                "E-STORY",
                f"story priority must be at least 1, got {story.priority}",
                story=story.id,
                span=story.span,
            )
    for story_id in _duplicates(story.id for story in project.stories):
        yield StructureError("E-DUP", f"duplicate story id {story_id!r}", story=story_id)

    screens = {screen.id: screen for screen in project.screens}
    for screen_id in _duplicates(screen.id for screen in project.screens):
        yield StructureError("E-DUP", f"duplicate screen id {screen_id!r}", screen=screen_id)
    for screen in project.screens:
        if not is_identifier(screen.id):
            yield StructureError("E-ID", f"malformed screen id {screen.id!r}", screen=screen.id, span=screen.span)
        for element in screen.elements:
            if not is_identifier(element.id):
                yield StructureError(
                    "E-ID",
                    f"malformed element id {element.id!r}",
                    screen=screen.id,
                    element=element.id,
                    span=element.span,
                )
        for element_id in _duplicates(element.id for element in screen.elements):
            yield StructureError(
                "E-DUP",
                f"duplicate element id {element_id!r} on screen {screen.id!r}",
                screen=screen.id,
                element=element_id,
            )

    for feature_id in _duplicates(feature.id for feature in project.features):
        yield StructureError("E-DUP", f"duplicate feature id {feature_id!r}", feature=feature_id)
    for task_name in _duplicates(task.name for feature in project.features for task in feature.tasks):
        yield StructureError("E-DUP", f"duplicate task name {task_name!r}")

    story_ids = {story.id for story in project.stories}
    for feature in project.features:
        yield from _feature_errors(feature, story_ids, screens)


def _feature_errors(feature: Feature, story_ids: set, screens: dict) -> Iterator[StructureError]:
    fid = feature.id
    if not is_identifier(fid):
        yield StructureError("E-ID", f"malformed feature id {fid!r}", feature=fid, span=feature.span)
    if feature.story not in story_ids:
        yield StructureError("E-REF", f"feature refers to unknown story {feature.story!r}", feature=fid, span=feature.span)
    if not feature.screens:
        yield StructureError("E-EMPTY", "feature uses no screens", feature=fid, span=feature.span)
    for screen_id in _duplicates(feature.screens):
        yield StructureError("E-DUP", f"screen {screen_id!r} is used twice", feature=fid, screen=screen_id)
    members = set(feature.screens)
    for screen_id in feature.screens:
        if screen_id not in screens:
            yield StructureError("E-REF", f"feature uses unknown screen {screen_id!r}", feature=fid, screen=screen_id, span=feature.span)
    entries = [sid for sid in feature.screens if sid in screens and screens[sid].has_tag(Tag.ENTRY)]
    if len(entries) > 1:
        yield StructureError(
            "E-ENTRY",
            f"more than one entry screen: {', '.join(entries)}",
            feature=fid,
            span=feature.span,
        )

    for connector_id in _duplicates(connector.id for connector in feature.connectors):
        yield StructureError("E-DUP", f"duplicate connector id {connector_id!r}", feature=fid, connector=connector_id)
    for connector in feature.connectors:
        cid = connector.id
        if not is_identifier(cid):
            yield StructureError("E-ID", f"malformed connector id {cid!r}", feature=fid, connector=cid, span=connector.span)
        source = connector.source
        if source.screen not in members or source.screen not in screens:
            yield StructureError(
                "E-REF",
                f"connector {cid!r} starts on screen {source.screen!r} outside the feature",
                feature=fid,
                connector=cid,
                span=connector.span,
            )
        else:
            element = screens[source.screen].element(source.element)
            if element is None:
                yield StructureError(
                    "E-REF",
                    f"connector {cid!r} starts at unknown element {str(source)!r}",
                    feature=fid,
                    connector=cid,
                    span=connector.span,
                )
            elif not is_trigger(element):
                yield StructureError(
                    "E-CONN-SRC",
                    f"connector {cid!r} starts at non-trigger element {str(source)!r}",
                    feature=fid,
                    connector=cid,
                    span=connector.span,
                )
        if connector.target not in members or connector.target not in screens:
            yield StructureError(
                "E-REF",
                f"connector {cid!r} targets screen {connector.target!r} outside the feature",
                feature=fid,
                connector=cid,
                span=connector.span,
            )

    for task in feature.tasks:
        if not is_identifier(task.name):
            yield StructureError("E-ID", f"malformed task name {task.name!r}", feature=fid, span=task.span)
        for step in task.steps:
            screen = screens.get(step.screen) if step.screen in members else None
            if screen is None:
                yield StructureError(
                    "E-REF",
                    f"task {task.name!r} visits screen {step.screen!r} outside the feature",
                    feature=fid,
                    span=task.span,
                )
            elif not is_trigger(screen.element(step.element)):
                yield StructureError(
                    "E-REF",
                    f"task {task.name!r} activates {str(step)!r}, which is not a trigger",
                    feature=fid,
                    span=task.span,
                )
        if task.end is not None and task.end not in members:
            yield StructureError(
                "E-REF",
                f"task {task.name!r} ends on screen {task.end!r} outside the feature",
                feature=fid,
                span=task.span,
            )


def errors_touching(errors: Iterable[StructureError], feature: Feature) -> List[StructureError]:
    """Blocking errors that make analysing ``feature`` unsafe."""
    touched = []
    for error in errors:
        if not error.blocking:
            continue
        if error.feature == feature.id or (error.feature is None and error.screen in feature.screens):
            touched.append(error)
    return touched


def prioritize_stories(stories: Iterable[UserStory]) -> List[UserStory]:
    """Stories by ascending priority; ties keep declaration order."""
    return sorted(stories, key=lambda story: story.priority)

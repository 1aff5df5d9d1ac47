"""Canonical `.sfw` text for a project."""

from __future__ import annotations

from typing import Iterable, List

from ..config import DEFAULT_BLOCKLIST, DEFAULT_MIN_LABEL_LENGTH, LintConfig
from ..model import (
    Connector,
    ConnectorKind,
    Feature,
    InputField,
    Layout,
    Project,
    Screen,
    Tag,
    TaskPath,
    TriggerIcon,
    TriggerText,
    UserStory,
)
from .parser import default_connector_id

INDENT = "  "
_TAG_ORDER = (Tag.ENTRY, Tag.FEEDBACK, Tag.ERROR)


def quote(value: str) -> str:
    escaped = (
        value.replace("\\", "\\\\")
        .replace('"', '\\"')
        .replace("\n", "\\n")
        .replace("\t", "\\t")
    )
    return f'"{escaped}"'


def _lint_lines(config: LintConfig) -> List[str]:
    lines: List[str] = []
    if config.min_label_length != DEFAULT_MIN_LABEL_LENGTH:
        lines.append(f"lint min-label {config.min_label_length}")
    if config.blocklist != DEFAULT_BLOCKLIST:
        phrases = " ".join(quote(phrase) for phrase in sorted(config.blocklist))
        lines.append(f"lint blocklist {phrases}".rstrip())
    if config.strict_feedback:
        lines.append("lint strict-feedback")
    for rule in sorted(config.severity):
        lines.append(f"lint severity {rule} {config.severity[rule]}")
    for rule in sorted(config.disabled):
        lines.append(f"lint disable {rule}")
    return lines


def _story_line(story: UserStory) -> str:
    parts = ["story", story.id, "as", quote(story.role), "want", quote(story.want)]
    if story.why is not None:
        parts += ["why", quote(story.why)]
    parts += ["prio", str(story.priority)]
    return " ".join(parts)


def _element_line(element) -> str:
    if isinstance(element, Layout):
        line = f"layout {element.id} {element.kind}"
        if element.label is not None:
            line += f" {quote(element.label)}"
        return line
    if isinstance(element, InputField):
        return f"field {element.id} {quote(element.label)} required {element.required.value}"
    if isinstance(element, TriggerText):
        line = f"button {element.id} {quote(element.label)}"
        return line + " submits" if element.submits else line
    if isinstance(element, TriggerIcon):
        line = f"icon {element.id} {element.icon}"
        if element.alt is not None:
            line += f" alt {quote(element.alt)}"
        return line + " submits" if element.submits else line
    raise TypeError(f"not a screen element: {element!r}")


def _screen_block(screen: Screen) -> str:
    header = ["screen", screen.id]
    if screen.title != screen.id:
        header.append(quote(screen.title))
    header += [tag.value for tag in _TAG_ORDER if tag in screen.tags]
    lines = [" ".join(header) + " {"]
    lines += [INDENT + _element_line(element) for element in screen.elements]
    lines.append("}")
    return "\n".join(lines)


def _connector_line(connector: Connector, position: int) -> str:
    line = f"connect {connector.source} -> {connector.target}"
    if connector.kind is not ConnectorKind.NORMAL:
        line += f" {connector.kind.value}"
    if connector.id != default_connector_id(position):
        line += f" as {connector.id}"
    return line


def _task_line(task: TaskPath) -> str:
    steps = [str(step) for step in task.steps]
    if task.end is not None:
        steps.append(task.end)
    return f"task {task.name} : {' -> '.join(steps)}"


def _feature_block(feature: Feature) -> str:
    lines = [f"feature {feature.id} for {feature.story} {{"]
    if feature.screens:
        lines.append(f"{INDENT}use {' '.join(feature.screens)}")
    lines += [
        INDENT + _connector_line(connector, position)
        for position, connector in enumerate(feature.connectors, start=1)
    ]
    lines += [INDENT + _task_line(task) for task in feature.tasks]
    lines.append("}")
    return "\n".join(lines)


def _sections(project: Project) -> Iterable[str]:
    yield f"project {quote(project.name)}"
    lint = _lint_lines(project.config)
    if lint:
        yield "\n".join(lint)
    if project.stories:
        yield "\n".join(_story_line(story) for story in project.stories)
    for screen in project.screens:
        yield _screen_block(screen)
    for feature in project.features:
        yield _feature_block(feature)


def format_project(project: Project) -> str:
    """Canonical source text; ``parse(format_project(p)) == p``."""
    return "\n\n".join(_sections(project)) + "\n"

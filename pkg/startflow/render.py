from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional

from graphviz import Digraph

from .errors import UnknownFeatureError
from .logging import get_stage_logger
from .model import (
    ConnectorKind,
    Feature,
    InputField,
    Layout,
    Project,
    Required,
    Screen,
    Tag,
    TriggerIcon,
    TriggerText,
    trigger_label,
)

SHAPES = {Tag.ENTRY: "invhouse", Tag.FEEDBACK: "note", Tag.ERROR: "octagon"}
DEFAULT_SHAPE = "box"
EDGE_STYLES = {ConnectorKind.ERROR: "dashed", ConnectorKind.BACK: "dotted"}


@dataclass(frozen=True)
class DotDocument:
    text: str
    nodes: int
    edges: int

    def write(self, path: Path) -> None:
        path.write_text(self.text, encoding="utf-8")


def _literal(text: str) -> str:
    # 反斜杠在 DOT 标签中是转义符
    return text.replace("\\", "\\\\")


def _element_line(element) -> str:
    if isinstance(element, Layout):
        return f"{element.kind}: {element.label or element.id}"
    if isinstance(element, InputField):
        marker = " *" if element.required is Required.YES else ""
        return f"field: {element.label}{marker}"
    if isinstance(element, TriggerText):
        return f"button: {element.label}"
    if isinstance(element, TriggerIcon):
        return f"icon: {element.alt or element.icon}"
    return element.id


def node_label(screen: Screen) -> str:
    """Title followed by one line per element (DOT ``\\n`` line breaks)."""
    lines = [screen.title] + [_element_line(element) for element in screen.elements]
    return "\\n".join(_literal(line) for line in lines)


def node_shape(screen: Screen) -> str:
    for tag in (Tag.ENTRY, Tag.FEEDBACK, Tag.ERROR):
        if screen.has_tag(tag):
            return SHAPES[tag]
    return DEFAULT_SHAPE


def _scope(project: Project, feature_id: Optional[str]) -> List[Feature]:
    if feature_id is None:
        return sorted(project.features, key=lambda feature: feature.id)
    feature = project.feature(feature_id)
    if feature is None:
        raise UnknownFeatureError(f"no feature named '{feature_id}'")
    return [feature]


def to_dot(project: Project, feature_id: Optional[str] = None) -> DotDocument:
    """One cluster per feature; a shared screen is drawn in the first cluster (by id) using it.

    Without a feature filter, screens no feature uses are drawn outside every cluster.
    """
    features = _scope(project, feature_id)
    dot = Digraph(
        name=project.name or "startflow",
        graph_attr={"rankdir": "LR"},
        node_attr={"fontname": "Helvetica"},
        edge_attr={"fontname": "Helvetica"},
    )
    placed: Dict[str, str] = {}
    node_count = 0
    edge_count = 0
    for feature in features:
        with dot.subgraph(name=f"cluster_{feature.id}") as cluster:
            cluster.attr(label=_literal(feature.id))
            for screen_id in sorted(set(feature.screens)):
                screen = project.screen(screen_id)
                if screen is None or screen_id in placed:
                    continue
                placed[screen_id] = feature.id
                cluster.node(screen_id, label=node_label(screen), shape=node_shape(screen))
                node_count += 1
            for connector in sorted(feature.connectors, key=lambda c: c.id):
                source = project.screen(connector.source.screen)
                element = source.element(connector.source.element) if source else None
                label = trigger_label(element) if element is not None else connector.source.element
                attrs = {"label": _literal(label)}
                style = EDGE_STYLES.get(connector.kind)
                if style:
                    attrs["style"] = style
                cluster.edge(connector.source.screen, connector.target, **attrs)
                edge_count += 1
    if feature_id is None:
        # 未被任何功能使用的屏幕画在 cluster 之外
        for screen in sorted(project.screens, key=lambda s: s.id):
            if screen.id in placed:
                continue
            placed[screen.id] = ""
            dot.node(screen.id, label=node_label(screen), shape=node_shape(screen))
            node_count += 1
    get_stage_logger("render").info(
        "Rendered %s feature(s): %s node(s), %s edge(s)", len(features), node_count, edge_count
    )
    return DotDocument(text=dot.source, nodes=node_count, edges=edge_count)

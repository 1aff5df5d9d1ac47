"""Graph view of one feature's wireflow."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Optional, Tuple

import networkx as nx

from .errors import GraphError
from .logging import get_stage_logger
from .model import Connector, ConnectorKind, Feature, Project, Tag


@dataclass(frozen=True)
class FlowEdge:
    source: str
    trigger: str
    target: str
    kind: ConnectorKind
    connector: str

    @classmethod
    def from_connector(cls, connector: Connector) -> "FlowEdge":
        return cls(
            source=connector.source.screen,
            trigger=connector.source.element,
            target=connector.target,
            kind=connector.kind,
            connector=connector.id,
        )


@dataclass(frozen=True)
class FlowGraph:
    feature: str
    nodes: Tuple[str, ...]
    edges: Tuple[FlowEdge, ...]
    entry: str

    def __post_init__(self) -> None:
        if self.entry not in self.nodes:
            raise GraphError(f"entry screen {self.entry!r} is not part of feature {self.feature!r}")

    @cached_property
    def digraph(self) -> nx.MultiDiGraph:
        """All edges, keyed by connector id."""
        return self.to_networkx()

    def to_networkx(self, exclude_kinds: Iterable[ConnectorKind | str] = ()) -> nx.MultiDiGraph:
        excluded = {ConnectorKind(kind) for kind in exclude_kinds}
        graph = nx.MultiDiGraph()
        graph.add_nodes_from(self.nodes)
        for edge in self.edges:
            if edge.kind in excluded:
                continue
            graph.add_edge(
                edge.source,
                edge.target,
                key=edge.connector,
                trigger=edge.trigger,
                kind=edge.kind,
            )
        return graph

    def outgoing(self, screen: str) -> Tuple[FlowEdge, ...]:
        return tuple(edge for edge in self.edges if edge.source == screen)

    def edge_for(self, screen: str, trigger: str, target: Optional[str] = None) -> Optional[FlowEdge]:
        for edge in self.edges:
            if edge.source == screen and edge.trigger == trigger and (target is None or edge.target == target):
                return edge
        return None

    def reachable(self) -> set[str]:
        return {self.entry} | nx.descendants(self.digraph, self.entry)


def entry_screen(feature: Feature, project: Project) -> Optional[str]:
    """The screen tagged ``entry``, else the first declared screen."""
    for screen_id in feature.screens:
        screen = project.screen(screen_id)
        if screen is not None and screen.has_tag(Tag.ENTRY):
            return screen_id
    return feature.screens[0] if feature.screens else None


def build_graph(feature: Feature, project: Project) -> FlowGraph:
    if not feature.screens:
        raise GraphError(f"feature {feature.id!r} has no screens")
    nodes = tuple(dict.fromkeys(feature.screens))
    edges = tuple(FlowEdge.from_connector(connector) for connector in feature.connectors)
    graph = FlowGraph(feature=feature.id, nodes=nodes, edges=edges, entry=entry_screen(feature, project))
    get_stage_logger("metrics").debug("Built flow %s: %s screens, %s connectors", feature.id, len(nodes), len(edges))
    return graph

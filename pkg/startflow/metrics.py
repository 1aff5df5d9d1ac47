"""User-flow metrics: action counts, shortest paths and reachability."""

from __future__ import annotations

from typing import Dict, Iterable, List, Optional, Tuple

import networkx as nx

from .errors import BrokenPathError, UnknownFeatureError, UnknownScreenError, UnknownTaskError
from .flow import FlowGraph, build_graph
from .logging import get_stage_logger
from .model import ConnectorKind, Feature, Project, Tag, TaskPath


def _kinds(exclude_kinds: Iterable[ConnectorKind | str]) -> frozenset:
    return frozenset(ConnectorKind(kind) for kind in exclude_kinds)


def action_count(path: TaskPath, flow: FlowGraph) -> int:
    """Trigger activations in ``path``; every step must follow a declared connector."""
    start = path.start
    if start is not None and start != flow.entry:
        raise BrokenPathError(f"task '{path.name}' starts on '{start}', not on entry screen '{flow.entry}'")
    for index, step in enumerate(path.steps):
        following = path.steps[index + 1].screen if index + 1 < len(path.steps) else path.end
        if flow.edge_for(step.screen, step.element, following) is None:
            if following is None:
                raise BrokenPathError(f"task '{path.name}': trigger '{step}' has no connector")
            raise BrokenPathError(f"task '{path.name}': no connector from '{step}' to '{following}'")
    return len(path.steps)


def task_end(path: TaskPath, flow: FlowGraph) -> Optional[str]:
    """Screen the walk arrives at after its last action."""
    if path.end is not None:
        return path.end
    if not path.steps:
        return flow.entry
    last = path.steps[-1]
    edge = flow.edge_for(last.screen, last.element)
    return edge.target if edge is not None else None


def shortest_actions(
    flow: FlowGraph,
    source: str,
    target: str,
    exclude_kinds: Iterable[ConnectorKind | str] = (),
) -> Optional[int]:
    """Fewest actions from ``source`` to ``target``; ``None`` when unreachable."""
    for screen in (source, target):
        if screen not in flow.nodes:
            raise UnknownScreenError(f"screen '{screen}' is not part of feature '{flow.feature}'")
    excluded = _kinds(exclude_kinds)
    graph = flow.to_networkx(excluded) if excluded else flow.digraph
    try:
        return nx.shortest_path_length(graph, source, target)
    except nx.NetworkXNoPath:
        return None


def reachability(flow: FlowGraph) -> set[str]:
    """Screens the entry cannot reach."""
    return set(flow.nodes) - flow.reachable()


def find_task(project: Project, name: str) -> Tuple[Feature, TaskPath]:
    for feature in project.features:
        for task in feature.tasks:
            if task.name == name:
                return feature, task
    raise UnknownTaskError(f"no task named '{name}'")


def find_feature(project: Project, feature_id: str) -> Feature:
    feature = project.feature(feature_id)
    if feature is None:
        raise UnknownFeatureError(f"no feature named '{feature_id}'")
    return feature


def task_actions(project: Project, name: str) -> int:
    feature, task = find_task(project, name)
    return action_count(task, build_graph(feature, project))


def actions_to_feedback(
    feature: Feature,
    project: Project,
    flow: FlowGraph | None = None,
    exclude_kinds: Iterable[ConnectorKind | str] = (),
) -> Optional[int]:
    """Fewest actions from the entry to any ``feedback`` screen of the feature."""
    flow = flow or build_graph(feature, project)
    distances = []
    for screen_id in flow.nodes:
        screen = project.screen(screen_id)
        if screen is None or not screen.has_tag(Tag.FEEDBACK):
            continue
        distance = shortest_actions(flow, flow.entry, screen_id, exclude_kinds)
        if distance is not None:
            distances.append(distance)
    return min(distances, default=None)


def feature_metrics(
    feature: Feature,
    project: Project,
    exclude_kinds: Iterable[ConnectorKind | str] = (),
) -> Dict:
    flow = build_graph(feature, project)
    return {
        "feature": feature.id,
        "entry": flow.entry,
        "screens": len(flow.nodes),
        "connectors": len(flow.edges),
        "unreachable": sorted(reachability(flow)),
        "actions_to_feedback": actions_to_feedback(feature, project, flow, exclude_kinds),
    }


def task_metrics(
    feature: Feature,
    task: TaskPath,
    project: Project,
    exclude_kinds: Iterable[ConnectorKind | str] = (),
) -> Dict:
    flow = build_graph(feature, project)
    actions = action_count(task, flow)
    end = task_end(task, flow)
    shortest = shortest_actions(flow, flow.entry, end, exclude_kinds) if end is not None else None
    return {
        "feature": feature.id,
        "task": task.name,
        "actions": actions,
        "end": end,
        "shortest": shortest,
    }


def metrics_report(project: Project, exclude_kinds: Iterable[ConnectorKind | str] = ()) -> Dict:
    excluded = _kinds(exclude_kinds)
    logger = get_stage_logger("metrics")
    features: List[Dict] = []
    tasks: List[Dict] = []
    for feature in project.features:
        features.append(feature_metrics(feature, project, excluded))
        for task in feature.tasks:
            tasks.append(task_metrics(feature, task, project, excluded))
    logger.info("Computed metrics for %s feature(s), %s task(s)", len(features), len(tasks))
    return {
        "exclude_kinds": sorted(kind.value for kind in excluded),
        "features": features,
        "tasks": tasks,
    }

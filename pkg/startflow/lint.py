"""Step-3 questioning points as lint rules over feature flows.

Each rule answers one verification question mechanically. A rule yields
``(screen, element, message)`` findings; :func:`lint_feature` turns them into
:class:`Defect` records with the configured severity.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Dict, Iterable, Iterator, List, Optional, Tuple

import networkx as nx

from .config import DEFAULT_SEVERITIES, LintConfig
from .flow import FlowGraph, build_graph
from .logging import get_stage_logger
from .model import (
    ConnectorKind,
    Feature,
    InputField,
    Project,
    Required,
    Screen,
    Tag,
    TriggerIcon,
    TriggerText,
    errors_touching,
    is_trigger,
    validate_structure,
)
from .state import Severity

Finding = Tuple[str, Optional[str], str]


@dataclass(frozen=True)
class Rule:
    id: str
    heuristic: str
    question: str
    description: str
    default_severity: int
    check: Callable[["_FeatureView", LintConfig], Iterable[Finding]]
    # 依赖流程图（可达性、出边）的规则在结构错误下不能运行
    needs_graph: bool = True


@dataclass(frozen=True)
class Defect:
    rule: str
    heuristic: str
    severity: int
    feature: str
    screen: str
    element: Optional[str]
    message: str

    def __post_init__(self) -> None:
        if self.severity not in tuple(Severity):
            raise ValueError(f"severity out of range: {self.severity}")

    @property
    def location(self) -> str:
        parts = [self.feature, self.screen]
        if self.element:
            parts.append(self.element)
        return "/".join(parts)

    @property
    def level(self) -> Severity:
        return Severity(self.severity)

    def sort_key(self) -> tuple:
        return (self.feature, self.screen, self.rule, self.element or "", self.message)

    def to_dict(self) -> dict:
        return {
            "rule": self.rule,
            "heuristic": self.heuristic,
            "severity": self.severity,
            "feature": self.feature,
            "screen": self.screen,
            "element": self.element,
            "message": self.message,
        }


class _FeatureView:
    """Lookups shared by every rule while one feature is linted."""

    def __init__(self, feature: Feature, project: Project) -> None:
        self.feature = feature
        self.project = project
        screens = {}
        for screen_id in feature.screens:
            screen = project.screen(screen_id)
            if screen is not None and screen_id not in screens:
                screens[screen_id] = screen
        self.screens: Dict[str, Screen] = screens

    @cached_property
    def flow(self) -> FlowGraph:
        return build_graph(self.feature, self.project)

    @cached_property
    def reachable(self) -> set:
        return self.flow.reachable()

    def reachable_screens(self) -> Iterator[Screen]:
        for screen_id, screen in self.screens.items():
            if screen_id in self.reachable:
                yield screen

    def terminals(self) -> List[str]:
        """Reachable screens with no outgoing ``normal`` edge, in feature order."""
        has_normal_exit = {
            edge.source for edge in self.flow.edges if edge.kind is ConnectorKind.NORMAL
        }
        return [screen.id for screen in self.reachable_screens() if screen.id not in has_normal_exit]

    @cached_property
    def simple_graph(self) -> nx.DiGraph:
        return nx.DiGraph(self.flow.digraph)

    def on_entry_path(self, screen_id: str, targets: Iterable[str]) -> bool:
        """Whether one of ``targets`` lies on a simple path from the entry to ``screen_id``."""
        graph = self.simple_graph
        entry = self.flow.entry
        # 候选必须不经过 screen_id 就能从入口到达
        before = nx.descendants(nx.restricted_view(graph, [screen_id], []), entry) | {entry}
        candidates = set(targets) & nx.ancestors(graph, screen_id) & before
        if not candidates:
            return False
        # 简单路径的数量随屏幕数指数增长，命中一条即返回
        for path in nx.all_simple_paths(graph, entry, screen_id):
            if candidates.intersection(path[:-1]):
                return True
        return False


def _check_triggers_present(view: _FeatureView, config: LintConfig) -> Iterator[Finding]:
    for screen in view.reachable_screens():
        if not screen.triggers:
            yield screen.id, None, f"screen '{screen.id}' has no trigger for the user to activate"


def _check_completion_feedback(view: _FeatureView, config: LintConfig) -> Iterator[Finding]:
    terminals = view.terminals()
    feedback = [sid for sid in terminals if view.screens[sid].has_tag(Tag.FEEDBACK)]
    if config.strict_feedback:
        flagged = [
            sid
            for sid in terminals
            if sid not in feedback and not view.screens[sid].has_tag(Tag.ERROR)
        ]
        for sid in flagged:
            yield sid, None, f"flow ends on screen '{sid}' without feedback that the task is complete"
        if flagged or feedback:
            return
    elif feedback:
        return
    location = terminals[0] if terminals else view.flow.entry
    yield location, None, "no screen at the end of the flow gives feedback that the task is complete"


def _check_text_labels(view: _FeatureView, config: LintConfig) -> Iterator[Finding]:
    for screen in view.screens.values():
        for element in screen.elements:
            if not isinstance(element, TriggerText):
                continue
            label = element.label.strip()
            if not label:
                yield screen.id, element.id, f"trigger '{element.id}' has no text"
            elif len(label) < config.min_label_length:
                yield (
                    screen.id,
                    element.id,
                    f"label '{label}' is shorter than {config.min_label_length} characters",
                )
            elif label.lower() in config.blocklist:
                yield screen.id, element.id, f"label '{label}' does not describe the action it performs"


def _check_icon_triggers(view: _FeatureView, config: LintConfig) -> Iterator[Finding]:
    for screen in view.screens.values():
        for element in screen.elements:
            if not isinstance(element, TriggerIcon):
                continue
            if not element.icon.strip():
                yield screen.id, element.id, f"icon trigger '{element.id}' names no icon"
            elif element.alt is None or not element.alt.strip():
                yield screen.id, element.id, f"icon trigger '{element.id}' has no alt text"


def _check_mandatory_fields(view: _FeatureView, config: LintConfig) -> Iterator[Finding]:
    for screen in view.screens.values():
        for element in screen.elements:
            if isinstance(element, InputField) and element.required is Required.UNSPECIFIED:
                yield screen.id, element.id, f"field '{element.id}' does not say whether it is mandatory"


def _check_error_flows(view: _FeatureView, config: LintConfig) -> Iterator[Finding]:
    for screen in view.screens.values():
        if not screen.input_fields:
            continue
        outgoing = view.flow.outgoing(screen.id)
        links_to_error = any(
            edge.target in view.screens and view.screens[edge.target].has_tag(Tag.ERROR)
            for edge in outgoing
        )
        if links_to_error:
            continue
        for trigger in screen.triggers:
            if not trigger.submits:
                continue
            if any(edge.trigger == trigger.id and edge.kind is ConnectorKind.ERROR for edge in outgoing):
                continue
            yield screen.id, trigger.id, f"submitting '{trigger.id}' has no flow for input errors"


def _check_way_back(view: _FeatureView, config: LintConfig) -> Iterator[Finding]:
    for screen in view.reachable_screens():
        if screen.id == view.flow.entry:
            continue
        outgoing = view.flow.outgoing(screen.id)
        if any(edge.kind is ConnectorKind.BACK for edge in outgoing):
            continue
        if view.on_entry_path(screen.id, (edge.target for edge in outgoing)):
            continue
        yield screen.id, None, f"screen '{screen.id}' offers no way back to a previous screen"


def _check_connector_sources(view: _FeatureView, config: LintConfig) -> Iterator[Finding]:
    for connector in view.feature.connectors:
        screen = view.screens.get(connector.source.screen)
        if screen is None:
            continue
        element = screen.element(connector.source.element)
        if element is None or is_trigger(element):
            continue
        yield (
            screen.id,
            element.id,
            f"connector '{connector.id}' starts at '{element.id}', which is not a trigger",
        )


RULES: Dict[str, Rule] = {
    rule.id: rule
    for rule in (
        Rule(
            "R1",
            "Flexibility and efficiency of use",
            "Do all screens have at least one trigger for the user to activate?",
            "There must be at least one trigger (even if it is to return to the previous screen) "
            "so the user is not locked on the same screen forever",
            DEFAULT_SEVERITIES["R1"],
            _check_triggers_present,
        ),
        Rule(
            "R2",
            "Visibility of system status",
            "Towards the end of the feature, is there a screen that provides feedback indicating "
            "the completion of the task?",
            "There must be an indication to the user that the task they were performing has "
            "finished, providing clear feedback",
            DEFAULT_SEVERITIES["R2"],
            _check_completion_feedback,
        ),
        Rule(
            "R3",
            "Match between system and the real world",
            "Are triggers that have texts adequately described?",
            "Buttons with texts or hyperlinks present the correct text description, allowing the "
            "user to understand the action clicking the trigger will perform.",
            DEFAULT_SEVERITIES["R3"],
            _check_text_labels,
            needs_graph=False,
        ),
        Rule(
            "R4",
            "Match between system and the real world",
            "Are icon/image-based triggers adequately represented?",
            "Buttons with icons or images correctly display the icon that allows the user to "
            "understand the action clicking the trigger will perform",
            DEFAULT_SEVERITIES["R4"],
            _check_icon_triggers,
            needs_graph=False,
        ),
        Rule(
            "R5",
            "Error prevention",
            "If there are fields for data entry, are the mandatory fields marked?",
            "It is essential to define which fields are mandatory in possible product screens",
            DEFAULT_SEVERITIES["R5"],
            _check_mandatory_fields,
            needs_graph=False,
        ),
        Rule(
            "R6",
            "Help users recognize, diagnose, and recover from errors",
            "Does the interaction flow consider errors that users may make?",
            "Error screens must be created, and interaction with them must be well-defined. If "
            "necessary, an alternative flow must be created containing error screens based on "
            "triggers that activate these screens",
            DEFAULT_SEVERITIES["R6"],
            _check_error_flows,
        ),
        Rule(
            "R7",
            "Flexibility and efficiency of use",
            "Are there triggers for the user to undo an action or return to the previous screen?",
            "It is essential that the user has the control and freedom necessary to redo or undo "
            "actions and correct possible mistakes they may have made",
            DEFAULT_SEVERITIES["R7"],
            _check_way_back,
        ),
        Rule(
            "R8",
            "Consistency and standards",
            "Are all connectors starting from triggers?",
            "Only triggers can trigger a call to another screen, including alternative flow "
            "screens for errors",
            DEFAULT_SEVERITIES["R8"],
            _check_connector_sources,
            needs_graph=False,
        ),
    )
}


def lint_feature(
    feature: Feature,
    project: Project,
    config: LintConfig | None = None,
    graph_rules: bool = True,
) -> List[Defect]:
    """Run the enabled rules on one feature; sorted by (screen, rule, element).

    With ``graph_rules=False`` only the rules that read screens and connectors
    directly run, which is safe on a feature with structural errors.
    """
    config = config or project.config
    logger = get_stage_logger("lint")
    view = _FeatureView(feature, project)
    defects: List[Defect] = []
    for rule_id in config.enabled_rules:
        rule = RULES[rule_id]
        if rule.needs_graph and not graph_rules:
            continue
        severity = config.severity_for(rule_id)
        for screen_id, element_id, message in rule.check(view, config):
            defects.append(
                Defect(
                    rule=rule.id,
                    heuristic=rule.heuristic,
                    severity=severity,
                    feature=feature.id,
                    screen=screen_id,
                    element=element_id,
                    message=message,
                )
            )
    defects.sort(key=Defect.sort_key)
    logger.debug("Feature %s: %s defect(s)", feature.id, len(defects))
    return defects


def lint_project(project: Project, config: LintConfig | None = None, jobs: int = 1):
    """Validate and lint every feature; features may be linted on ``jobs`` threads."""
    from .report import DefectReport

    config = config or project.config
    logger = get_stage_logger("lint")
    structure_errors = validate_structure(project)
    plan: List[Tuple[Feature, bool]] = []
    for feature in project.features:
        blocking = errors_touching(structure_errors, feature)
        if blocking:
            logger.warning(
                "功能 %s 存在 %s 个结构错误 (%s)，跳过依赖流程图的规则",
                feature.id,
                len(blocking),
                ", ".join(sorted({error.code for error in blocking})),
            )
        plan.append((feature, not blocking))

    def run(item: Tuple[Feature, bool]) -> List[Defect]:
        feature, graph_rules = item
        return lint_feature(feature, project, config, graph_rules=graph_rules)

    if jobs > 1 and len(plan) > 1:
        with ThreadPoolExecutor(max_workers=jobs, thread_name_prefix="Lint") as pool:
            results = list(pool.map(run, plan))
    else:
        results = [run(item) for item in plan]

    defects = sorted((defect for result in results for defect in result), key=Defect.sort_key)
    logger.info("Linted %s feature(s): %s defect(s)", len(plan), len(defects))
    return DefectReport(defects=tuple(defects), structure_errors=tuple(structure_errors))

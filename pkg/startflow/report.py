"""Defect report assembly and rendering (JSON and grep-friendly text)."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .lint import Defect
from .model import StructureError
from .state import Severity
from .utils import decimal_json, dump_json, round_half_up


def _sorted_counts(counter: Counter) -> Dict[str, int]:
    return {key: counter[key] for key in sorted(counter)}


@dataclass(frozen=True)
class DefectReport:
    defects: Tuple[Defect, ...] = ()
    structure_errors: Tuple[StructureError, ...] = ()

    @property
    def blocking_errors(self) -> List[StructureError]:
        return [error for error in self.structure_errors if error.blocking]

    @property
    def mean_severity(self) -> Optional[Fraction]:
        if not self.defects:
            return None
        return Fraction(sum(defect.severity for defect in self.defects), len(self.defects))

    def max_severity(self) -> int:
        return max((defect.severity for defect in self.defects), default=0)

    def count_at_or_above(self, threshold: int) -> int:
        return sum(1 for defect in self.defects if defect.severity >= threshold)

    def summary(self) -> Dict:
        summary: Dict = {
            "defects": len(self.defects),
            "by_rule": _sorted_counts(Counter(defect.rule for defect in self.defects)),
            "by_heuristic": _sorted_counts(Counter(defect.heuristic for defect in self.defects)),
            "by_screen": _sorted_counts(Counter(defect.screen for defect in self.defects)),
        }
        mean = self.mean_severity
        if mean is not None:
            summary["mean_severity"] = decimal_json(mean)
        return summary

    def to_dict(self) -> Dict:
        return {
            "defects": [defect.to_dict() for defect in self.defects],
            "structure_errors": [error.to_dict() for error in self.structure_errors],
            "summary": self.summary(),
        }

    def to_json(self) -> str:
        return dump_json(self.to_dict())


def render_text(report: DefectReport) -> str:
    """One line per finding, then a count line."""
    lines: List[str] = [f"ERROR {error}" for error in report.structure_errors]
    for defect in report.defects:
        level = Severity(defect.severity).name
        lines.append(f"{level} {defect.rule} [{defect.heuristic}] {defect.location}: {defect.message}")
    count = len(report.defects)
    tail = f"{count} defect" if count == 1 else f"{count} defects"
    mean = report.mean_severity
    if mean is not None:
        tail += f", mean severity {round_half_up(mean)}"
    lines.append(tail)
    return "\n".join(lines) + "\n"

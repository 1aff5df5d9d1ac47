"""Golden-file regression over the bundled fixture corpus.

For each fixture, every golden file that exists next to it is regenerated in
memory and compared byte for byte. Missing goldens are not an error; with
``update=True`` existing goldens are rewritten instead of compared.
"""

from __future__ import annotations

import difflib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, List, Optional

from .config import LintConfig
from .dsl import format_project, parse_document, read_source
from .evalkit import load_defect_forms, load_tam_responses, summarize_all, summarize_tam_all
from .lint import lint_project
from .logging import get_stage_logger
from .metrics import metrics_report
from .paths import CorpusPaths, default_corpus_root
from .utils import dump_json


@dataclass
class GoldenResult:
    fixture: str
    kind: str
    ok: bool
    diff: str = ""


@dataclass
class CorpusReport:
    results: List[GoldenResult] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(result.ok for result in self.results)

    @property
    def failures(self) -> List[GoldenResult]:
        return [result for result in self.results if not result.ok]

    def render_text(self) -> str:
        lines = []
        for result in self.results:
            lines.append(f"{'PASS' if result.ok else 'FAIL'} {result.fixture} {result.kind}")
            if result.diff:
                lines.append(result.diff.rstrip("\n"))
        passed = len(self.results) - len(self.failures)
        lines.append(f"{passed}/{len(self.results)} golden file(s) match")
        return "\n".join(lines) + "\n"


def _diff(expected: str, actual: str, golden: Path) -> str:
    return "".join(
        difflib.unified_diff(
            expected.splitlines(keepends=True),
            actual.splitlines(keepends=True),
            fromfile=str(golden),
            tofile=f"{golden} (actual)",
        )
    )


def render_errors(path: Path) -> str:
    """Parse diagnostics of a document, or its blocking structural errors."""
    result = parse_document(read_source(path))
    if not result.ok:
        lines = [str(error) for error in result.errors]
    else:
        report = lint_project(result.project)
        lines = [str(error) for error in report.blocking_errors]
    return "".join(line + "\n" for line in lines)


class _Runner:
    def __init__(self, paths: CorpusPaths, update: bool) -> None:
        self.paths = paths
        self.update = update
        self.report = CorpusReport()
        self.logger = get_stage_logger("corpus")

    def compare(self, stem: str, kind: str, produce: Callable[[], str]) -> None:
        golden = self.paths.golden(stem, kind)
        if not golden.exists():
            return
        actual = produce()
        if self.update:
            golden.write_text(actual, encoding="utf-8", newline="\n")
            self.logger.info("更新金标准文件 %s", golden)
            self.report.results.append(GoldenResult(stem, kind, True))
            return
        expected = golden.read_text(encoding="utf-8")
        if expected == actual:
            self.report.results.append(GoldenResult(stem, kind, True))
            return
        self.logger.warning("金标准文件不一致: %s", golden)
        self.report.results.append(GoldenResult(stem, kind, False, _diff(expected, actual, golden)))

    def valid(self, path: Path) -> None:
        stem = path.stem
        result = parse_document(read_source(path))
        if not result.ok:
            detail = "\n".join(str(error) for error in result.errors)
            self.report.results.append(GoldenResult(stem, "parse", False, detail + "\n"))
            return
        project = result.project
        config: LintConfig = project.config
        self.compare(stem, "fmt.sfw", lambda: format_project(project))
        self.compare(stem, "check.json", lambda: lint_project(project, config).to_json())
        self.compare(stem, "metrics.json", lambda: dump_json(metrics_report(project)))

    def invalid(self, path: Path) -> None:
        self.compare(path.stem, "errors.txt", lambda: render_errors(path))

    def dataset(self, path: Path) -> None:
        stem = path.stem
        self.compare(
            stem,
            "eval.json",
            lambda: dump_json([summary.to_dict() for summary in summarize_all(load_defect_forms(path))]),
        )
        self.compare(
            stem,
            "tam.json",
            lambda: dump_json([summary.to_dict() for summary in summarize_tam_all(load_tam_responses(path))]),
        )


def verify_corpus(root: Optional[Path] = None, update: bool = False) -> CorpusReport:
    """Regenerate every golden output of the corpus under ``root`` and diff it."""
    paths = CorpusPaths(root or default_corpus_root())
    runner = _Runner(paths, update)
    for path in paths.valid_documents():
        runner.valid(path)
    for path in paths.invalid_documents():
        runner.invalid(path)
    for path in paths.eval_datasets():
        runner.dataset(path)
    runner.logger.info(
        "语料校验完成：%s 项，失败 %s 项", len(runner.report.results), len(runner.report.failures)
    )
    return runner.report

from __future__ import annotations

import shutil
from pathlib import Path

import pytest

from startflow.dsl import parse, parse_file
from startflow.paths import CorpusPaths, default_corpus_root

CORPUS = CorpusPaths(default_corpus_root())

CLEAN_SOURCE = """\
project "demo"

story S1 as "user" want "finish the task" prio 1

screen start "Start" entry {
  button go "Continue"
}

screen done "Done" feedback {
  layout msg text "All set"
  button again "Start over"
}

feature F1 for S1 {
  use start done
  connect start.go -> done
  connect done.again -> start back
}
"""


@pytest.fixture
def corpus() -> CorpusPaths:
    return CORPUS


@pytest.fixture
def load():
    def _load(name: str):
        path = CORPUS.valid_dir / f"{name}.sfw"
        if not path.exists():
            path = CORPUS.rules_dir / f"{name}.sfw"
        return parse_file(path)

    return _load


@pytest.fixture
def clean_project():
    return parse(CLEAN_SOURCE)


@pytest.fixture
def corpus_copy(tmp_path: Path) -> CorpusPaths:
    """Writable copy of the fixture corpus."""
    root = tmp_path / "fixtures"
    shutil.copytree(CORPUS.root, root)
    return CorpusPaths(root)

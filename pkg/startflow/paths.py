from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

WIZARD_SUFFIX = ".wizard.json"


def wizard_session_path(project_path: Path) -> Path:
    """Sidecar next to the project file: ``caa.sfw`` -> ``caa.wizard.json``."""
    return project_path.with_name(f"{project_path.stem}{WIZARD_SUFFIX}")


@dataclass
class CorpusPaths:
    root: Path

    @property
    def valid_dir(self) -> Path:
        return self.root / "valid"

    @property
    def rules_dir(self) -> Path:
        return self.valid_dir / "rules"

    @property
    def invalid_dir(self) -> Path:
        return self.root / "invalid"

    @property
    def golden_dir(self) -> Path:
        return self.root / "golden"

    @property
    def eval_dir(self) -> Path:
        return self.root / "eval"

    def golden(self, stem: str, kind: str) -> Path:
        return self.golden_dir / f"{stem}.{kind}"

    def valid_documents(self) -> list[Path]:
        return sorted(self.valid_dir.rglob("*.sfw"))

    def invalid_documents(self) -> list[Path]:
        return sorted(self.invalid_dir.glob("*.sfw"))

    def eval_datasets(self) -> list[Path]:
        return sorted(self.eval_dir.glob("*.csv"))


def default_corpus_root() -> Path:
    return Path(__file__).resolve().parent.parent / "fixtures"

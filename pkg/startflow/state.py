from __future__ import annotations

import enum


class ExitStatus(enum.IntEnum):
    CLEAN = 0
    DEFECTS = 1
    INVALID = 2
    USAGE = 3

    def __str__(self) -> str:
        return self.name.lower()


class WizardStep(enum.IntEnum):
    ORGANIZE = 1
    BUILD = 2
    VERIFY = 3

    @property
    def label(self) -> str:
        return _STEP_LABELS[self]

    def __str__(self) -> str:
        return self.label


_STEP_LABELS = {
    WizardStep.ORGANIZE: "步骤一：整理功能与用户故事",
    WizardStep.BUILD: "步骤二：构建 wireflow",
    WizardStep.VERIFY: "步骤三：启发式检查",
}


class Severity(enum.IntEnum):
    COSMETIC = 1
    MINOR = 2
    MAJOR = 3
    CATASTROPHIC = 4

    @property
    def description(self) -> str:
        return _SEVERITY_DESCRIPTIONS[self]

    def __str__(self) -> str:
        return self.name


_SEVERITY_DESCRIPTIONS = {
    Severity.COSMETIC: "Low-priority defect that does not obstruct functionality.",
    Severity.MINOR: "Small defect with moderate impact on the user experience.",
    Severity.MAJOR: "Serious defect whose correction is a high priority.",
    Severity.CATASTROPHIC: "Critical defect that must be fixed for the interface to be usable.",
}

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, FrozenSet, Mapping, Optional

from .errors import ConfigError

CONFIG_ENV = "STARTFLOW_CONFIG"

RULE_IDS = ("R1", "R2", "R3", "R4", "R5", "R6", "R7", "R8")

# 缺省严重度：导航死路与错误连线阻碍使用（Major/Catastrophic），文案问题为 Minor
DEFAULT_SEVERITIES: Dict[str, int] = {
    "R1": 3,
    "R2": 2,
    "R3": 2,
    "R4": 2,
    "R5": 2,
    "R6": 3,
    "R7": 3,
    "R8": 4,
}
DEFAULT_BLOCKLIST: FrozenSet[str] = frozenset({"click here", "button", "link", "ok?"})
DEFAULT_MIN_LABEL_LENGTH = 2

EDGE_KINDS = ("normal", "error", "back")


def _ensure_path(path_like: str, base: Path) -> Path:
    """Resolve a user supplied path relative to the config file directory."""
    path = Path(path_like)
    if not path.is_absolute():
        path = (base / path).resolve()
    return path


def _check_rule(rule: str) -> str:
    if rule not in RULE_IDS:
        raise ConfigError(f"unknown rule id {rule!r}")
    return rule


def _check_severity(rule: str, value) -> int:
    try:
        severity = int(value)
    except (TypeError, ValueError):
        raise ConfigError(f"severity for {rule} is not an integer: {value!r}") from None
    if not 1 <= severity <= 4:
        raise ConfigError(f"severity for {rule} must be within 1..4, got {severity}")
    return severity


@dataclass
class LoggerConfig:
    path: Optional[Path] = None
    level: str = "WARNING"

    @classmethod
    def from_dict(cls, data: Dict, base: Path) -> "LoggerConfig":
        data = data or {}
        log_path = data.get("log_path")
        return cls(
            path=_ensure_path(log_path, base) if log_path else None,
            level=data.get("log_level", "WARNING"),
        )


@dataclass(frozen=True)
class LintConfig:
    severity: Dict[str, int] = field(default_factory=dict)
    blocklist: FrozenSet[str] = DEFAULT_BLOCKLIST
    min_label_length: int = DEFAULT_MIN_LABEL_LENGTH
    disabled: FrozenSet[str] = frozenset()
    strict_feedback: bool = False

    def __post_init__(self) -> None:
        for rule, value in self.severity.items():
            _check_rule(rule)
            _check_severity(rule, value)
        for rule in self.disabled:
            _check_rule(rule)
        if self.min_label_length < 0:
            raise ConfigError("min_label_length must not be negative")

    def severity_for(self, rule: str) -> int:
        return self.severity.get(rule, DEFAULT_SEVERITIES[rule])

    @property
    def enabled_rules(self) -> tuple[str, ...]:
        return tuple(rule for rule in RULE_IDS if rule not in self.disabled)

    @classmethod
    def from_dict(cls, data: Mapping | None) -> "LintConfig":
        return cls().merged(data or {})

    def merged(self, data: Mapping) -> "LintConfig":
        """Overlay the keys present in ``data`` (LintConfig serialization)."""
        changes: Dict = {}
        if "severity" in data:
            severity = dict(self.severity)
            for rule, value in (data["severity"] or {}).items():
                severity[_check_rule(str(rule))] = _check_severity(rule, value)
            changes["severity"] = severity
        if "blocklist" in data:
            changes["blocklist"] = frozenset(
                str(phrase).strip().lower() for phrase in data["blocklist"] or []
            )
        if "min_label_length" in data:
            try:
                changes["min_label_length"] = int(data["min_label_length"])
            except (TypeError, ValueError):
                raise ConfigError(
                    f"min_label_length is not an integer: {data['min_label_length']!r}"
                ) from None
        if "disabled" in data:
            changes["disabled"] = self.disabled | frozenset(
                _check_rule(str(rule)) for rule in data["disabled"] or []
            )
        if "strict_feedback" in data:
            changes["strict_feedback"] = bool(data["strict_feedback"])
        return replace(self, **changes) if changes else self

    def to_dict(self) -> Dict:
        return {
            "severity": {rule: self.severity[rule] for rule in sorted(self.severity)},
            "blocklist": sorted(self.blocklist),
            "min_label_length": self.min_label_length,
            "disabled": sorted(self.disabled),
            "strict_feedback": self.strict_feedback,
        }


@dataclass
class MetricsConfig:
    exclude_edge_kinds: FrozenSet[str] = frozenset()

    @classmethod
    def from_dict(cls, data: Dict) -> "MetricsConfig":
        data = data or {}
        kinds = frozenset(data.get("exclude_edge_kinds", []) or [])
        unknown = kinds - set(EDGE_KINDS)
        if unknown:
            raise ConfigError(f"unknown edge kinds: {', '.join(sorted(unknown))}")
        return cls(exclude_edge_kinds=kinds)


@dataclass
class CheckConfig:
    fail_on: int = 3

    @classmethod
    def from_dict(cls, data: Dict) -> "CheckConfig":
        data = data or {}
        return cls(fail_on=_check_severity("fail_on", data.get("fail_on", 3)))


@dataclass
class AppConfig:
    logger: LoggerConfig
    lint_overrides: Dict
    metrics: MetricsConfig
    check: CheckConfig
    config_path: Optional[Path] = None

    def lint_config(self, base: LintConfig | None = None) -> LintConfig:
        """Project-level lint settings overlaid with the config file."""
        return (base or LintConfig()).merged(self.lint_overrides)


_LINT_KEYS = ("severity", "blocklist", "min_label_length", "disabled", "strict_feedback")


def resolve_config_path(path: str | Path | None) -> Optional[Path]:
    if path:
        return Path(path).resolve()
    env_value = os.environ.get(CONFIG_ENV)
    if env_value:
        return Path(env_value).resolve()
    return None


def load_config(path: Path | None) -> AppConfig:
    if path is None:
        return AppConfig(
            logger=LoggerConfig(),
            lint_overrides={},
            metrics=MetricsConfig(),
            check=CheckConfig(),
        )
    try:
        with open(path, encoding="utf-8") as f:
            raw_config = json.load(f)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    except UnicodeDecodeError:
        raise ConfigError(f"config {path} is not valid UTF-8") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc.msg}") from exc
    if not isinstance(raw_config, dict):
        raise ConfigError(f"config {path} must be a JSON object")
    base_dir = path.parent
    lint_overrides = {key: raw_config[key] for key in _LINT_KEYS if key in raw_config}
    # 提前校验，避免到 lint 阶段才报错
    LintConfig().merged(lint_overrides)
    return AppConfig(
        logger=LoggerConfig.from_dict(raw_config.get("logger", {}), base_dir),
        lint_overrides=lint_overrides,
        metrics=MetricsConfig.from_dict(raw_config.get("metrics", {})),
        check=CheckConfig.from_dict(raw_config.get("check", {})),
        config_path=path,
    )

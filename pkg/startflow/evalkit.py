"""Aggregation of heuristic-evaluation defect forms and TAM questionnaires.

Both inputs are CSV files with a header row. Duplicate matching and
false-positive status are analyst decisions recorded in the input
(``dedup_key`` and ``is_false_positive``); nothing here infers them.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import pandas as pd

from .errors import EvalError
from .logging import get_stage_logger
from .utils import decimal_json

FORM_COLUMNS = (
    "evaluator",
    "group",
    "location",
    "heuristic",
    "severity",
    "justification",
    "is_false_positive",
    "dedup_key",
)
HEURISTIC_SEPARATOR = ";"

QUESTIONS = tuple(f"Q{number}" for number in range(1, 12))
TAM_COLUMNS = ("respondent", "group") + QUESTIONS
CONSTRUCTS: Dict[str, Tuple[str, ...]] = {
    "PU": ("Q1", "Q2", "Q3"),
    "PEOU": ("Q4", "Q5", "Q6", "Q7"),
    "PE": ("Q8", "Q9", "Q10"),
    "BI": ("Q11",),
}
TAM_QUESTIONS: Dict[str, str] = {
    "Q1": "Using paper prototyping improves development performance.",
    "Q2": "Using paper prototyping increases productivity.",
    "Q3": "Using paper prototyping improves effectiveness in development.",
    "Q4": "I found the interaction with paper prototyping clear and understandable.",
    "Q5": "Using paper prototyping does not require much mental effort.",
    "Q6": "I find paper prototyping easy to use.",
    "Q7": "I find it easy to use paper prototyping to achieve what I want.",
    "Q8": "I find using paper prototyping enjoyable.",
    "Q9": "The process of using paper prototyping is pleasant.",
    "Q10": "I had fun using paper prototyping.",
    "Q11": "Assuming I have knowledge of paper prototyping and an appropriate use case, "
    "I intend to use it again.",
}

_TRUE = {"true", "yes", "1", "y"}
_FALSE = {"false", "no", "0", "n", ""}


def parse_bool(value: str) -> bool:
    text = (value or "").strip().lower()
    if text in _TRUE:
        return True
    if text in _FALSE:
        return False
    raise ValueError(value)


def _ranked(counts: pd.Series) -> Dict[str, int]:
    """Counts ordered by frequency, then name."""
    pairs = ((str(key), int(count)) for key, count in counts.items())
    return dict(sorted(pairs, key=lambda item: (-item[1], item[0])))


@dataclass(frozen=True)
class DefectForm:
    evaluator: str
    group: str
    location: str
    heuristic: str
    severity: int
    justification: str = ""
    is_false_positive: bool = False
    dedup_key: str = ""

    def __post_init__(self) -> None:
        if not 1 <= self.severity <= 4:
            raise EvalError(f"severity must be within 1..4, got {self.severity}", "E-BAD-SEVERITY")
        if not self.dedup_key.strip():
            raise EvalError("dedup_key must not be empty", "E-BAD-ROW")

    @property
    def heuristics(self) -> Tuple[str, ...]:
        parts = (part.strip() for part in self.heuristic.split(HEURISTIC_SEPARATOR))
        return tuple(part for part in parts if part)


@dataclass(frozen=True)
class EvalSummary:
    group: str
    total_discrepancies: int = 0
    false_positives: int = 0
    real_defects: int = 0
    unique_defects: int = 0
    duplicates: int = 0
    per_heuristic: Dict[str, int] = field(default_factory=dict)
    per_location: Dict[str, int] = field(default_factory=dict)
    discrepancies_per_location: Dict[str, int] = field(default_factory=dict)
    severity_total: int = 0

    @property
    def mean_severity(self) -> Optional[Fraction]:
        if not self.real_defects:
            return None
        return Fraction(self.severity_total, self.real_defects)

    def to_dict(self) -> Dict:
        mean = self.mean_severity
        return {
            "group": self.group,
            "total_discrepancies": self.total_discrepancies,
            "false_positives": self.false_positives,
            "real_defects": self.real_defects,
            "unique_defects": self.unique_defects,
            "duplicates": self.duplicates,
            "mean_severity": decimal_json(mean) if mean is not None else None,
            "per_heuristic": dict(self.per_heuristic),
            "per_location": dict(self.per_location),
            "discrepancies_per_location": dict(self.discrepancies_per_location),
        }


def _row_value(row: Mapping, column: str, line: int) -> str:
    value = row.get(column)
    if not isinstance(value, str):
        raise EvalError(f"row {line}: missing column '{column}'", "E-BAD-ROW")
    return value.strip()


def forms_from_rows(rows: Iterable[Mapping[str, str]]) -> List[DefectForm]:
    """Build forms from CSV dict rows; ``line`` numbers count the header as line 1."""
    forms: List[DefectForm] = []
    for line, row in enumerate(rows, start=2):
        severity_text = _row_value(row, "severity", line)
        try:
            severity = int(severity_text)
        except ValueError:
            raise EvalError(f"row {line}: severity '{severity_text}' is not an integer", "E-BAD-SEVERITY") from None
        if not 1 <= severity <= 4:
            raise EvalError(f"row {line}: severity {severity} is outside 1..4", "E-BAD-SEVERITY")
        flag = _row_value(row, "is_false_positive", line)
        try:
            is_false_positive = parse_bool(flag)
        except ValueError:
            raise EvalError(f"row {line}: is_false_positive '{flag}' is not a boolean", "E-BAD-ROW") from None
        dedup_key = _row_value(row, "dedup_key", line)
        if not dedup_key:
            raise EvalError(f"row {line}: dedup_key is empty", "E-BAD-ROW")
        forms.append(
            DefectForm(
                evaluator=_row_value(row, "evaluator", line),
                group=_row_value(row, "group", line),
                location=_row_value(row, "location", line),
                heuristic=_row_value(row, "heuristic", line),
                severity=severity,
                justification=_row_value(row, "justification", line),
                is_false_positive=is_false_positive,
                dedup_key=dedup_key,
            )
        )
    return forms


def read_table(path: Path, expected: Sequence[str]) -> pd.DataFrame:
    """Read a CSV as text cells; blank cells stay empty strings."""
    try:
        df = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
    except pd.errors.EmptyDataError:
        df = pd.DataFrame()
    except pd.errors.ParserError as exc:
        raise EvalError(f"{path}: malformed CSV: {exc}", "E-BAD-ROW") from None
    except UnicodeDecodeError:
        raise EvalError(f"{path}: not valid UTF-8", "E-BAD-ROW") from None
    if not isinstance(df.index, pd.RangeIndex):
        # 首行字段多于表头时 pandas 会把多出的列当作索引
        raise EvalError(f"{path}: a row has more fields than the header", "E-BAD-ROW")
    df.columns = [str(column).strip() for column in df.columns]
    missing = [column for column in expected if column not in df.columns]
    if missing:
        raise EvalError(f"{path}: missing column(s) {', '.join(missing)}", "E-BAD-ROW")
    return df


def load_defect_forms(path: Path) -> List[DefectForm]:
    df = read_table(path, FORM_COLUMNS)
    forms = forms_from_rows(df.to_dict("records"))
    get_stage_logger("eval").info("Loaded %s defect form row(s) from %s", len(forms), path)
    return forms


def forms_frame(forms: Iterable[DefectForm]) -> pd.DataFrame:
    """One row per form plus a ``heuristics`` column holding the split list."""
    records = [dict(asdict(form), heuristics=list(form.heuristics)) for form in forms]
    return pd.DataFrame.from_records(records, columns=list(FORM_COLUMNS) + ["heuristics"])


def _summarize_frame(rows: pd.DataFrame, group: str) -> EvalSummary:
    real = rows[~rows["is_false_positive"].astype(bool)]
    duplicates = int(real["dedup_key"].duplicated().sum())
    heuristics = real["heuristics"].explode().dropna()
    return EvalSummary(
        group=group,
        total_discrepancies=len(rows),
        false_positives=len(rows) - len(real),
        real_defects=len(real),
        unique_defects=len(real) - duplicates,
        duplicates=duplicates,
        per_heuristic=_ranked(heuristics.value_counts()),
        per_location=_ranked(real["location"].value_counts()),
        discrepancies_per_location=_ranked(rows["location"].value_counts()),
        severity_total=int(real["severity"].astype(int).sum()),
    )


def summarize_defects(forms: Iterable[DefectForm], group: str) -> EvalSummary:
    frame = forms_frame(forms)
    return _summarize_frame(frame[frame["group"] == group], group)


def summarize_all(forms: Iterable[DefectForm]) -> List[EvalSummary]:
    frame = forms_frame(forms)
    return [_summarize_frame(rows, str(group)) for group, rows in frame.groupby("group", sort=True)]


def top_heuristics(summary: EvalSummary, n: int = 5) -> List[Tuple[str, int]]:
    return list(summary.per_heuristic.items())[: max(n, 0)]


@dataclass(frozen=True)
class TamResponse:
    respondent: str
    group: str
    answers: Tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.answers) != len(QUESTIONS):
            raise EvalError(
                f"respondent {self.respondent}: expected {len(QUESTIONS)} answers, got {len(self.answers)}",
                "E-BAD-ANSWER",
            )
        for question, answer in zip(QUESTIONS, self.answers):
            if not 1 <= answer <= 5:
                raise EvalError(
                    f"respondent {self.respondent}: {question}={answer} is outside 1..5", "E-BAD-ANSWER"
                )


@dataclass(frozen=True)
class TamSummary:
    group: str
    respondents: int
    question_means: Dict[str, Fraction]
    construct_means: Dict[str, Fraction]

    def to_dict(self) -> Dict:
        return {
            "group": self.group,
            "respondents": self.respondents,
            "questions": {question: decimal_json(mean) for question, mean in self.question_means.items()},
            "constructs": {name: decimal_json(mean) for name, mean in self.construct_means.items()},
        }


def responses_from_rows(rows: Iterable[Mapping[str, str]]) -> List[TamResponse]:
    responses: List[TamResponse] = []
    for line, row in enumerate(rows, start=2):
        answers = []
        for question in QUESTIONS:
            text = _row_value(row, question, line)
            try:
                answers.append(int(text))
            except ValueError:
                raise EvalError(f"row {line}: {question} '{text}' is not an integer", "E-BAD-ANSWER") from None
        responses.append(
            TamResponse(
                respondent=_row_value(row, "respondent", line),
                group=_row_value(row, "group", line),
                answers=tuple(answers),
            )
        )
    return responses


def load_tam_responses(path: Path) -> List[TamResponse]:
    df = read_table(path, TAM_COLUMNS)
    responses = responses_from_rows(df.to_dict("records"))
    get_stage_logger("eval").info("Loaded %s TAM response(s) from %s", len(responses), path)
    return responses


def answers_frame(responses: Iterable[TamResponse]) -> pd.DataFrame:
    records = [dict(zip(QUESTIONS, response.answers), group=response.group) for response in responses]
    return pd.DataFrame.from_records(records, columns=["group", *QUESTIONS])


def _summarize_answers(rows: pd.DataFrame, group: str) -> TamSummary:
    totals = rows[list(QUESTIONS)].astype(int).sum()
    question_means = {question: Fraction(int(totals[question]), len(rows)) for question in QUESTIONS}
    construct_means = {
        name: sum((question_means[question] for question in questions), Fraction(0)) / len(questions)
        for name, questions in CONSTRUCTS.items()
    }
    return TamSummary(
        group=group,
        respondents=len(rows),
        question_means=question_means,
        construct_means=construct_means,
    )


def summarize_tam(responses: Iterable[TamResponse], group: str) -> TamSummary:
    """Exact means per question, then per construct (mean of question means)."""
    frame = answers_frame(responses)
    rows = frame[frame["group"] == group]
    if rows.empty:
        raise EvalError(f"no TAM responses for group '{group}'", "E-EMPTY-GROUP")
    return _summarize_answers(rows, group)


def summarize_tam_all(responses: Iterable[TamResponse]) -> List[TamSummary]:
    frame = answers_frame(responses)
    return [_summarize_answers(rows, str(group)) for group, rows in frame.groupby("group", sort=True)]

import random
from fractions import Fraction

import pytest

from startflow.errors import EvalError
from startflow.evalkit import (
    FORM_COLUMNS,
    QUESTIONS,
    DefectForm,
    TamResponse,
    forms_from_rows,
    load_defect_forms,
    load_tam_responses,
    responses_from_rows,
    summarize_all,
    summarize_defects,
    summarize_tam,
    top_heuristics,
)


@pytest.fixture
def forms(corpus):
    return load_defect_forms(corpus.eval_dir / "forms.csv")


@pytest.fixture
def responses(corpus):
    return load_tam_responses(corpus.eval_dir / "tam.csv")


def _row(**values):
    row = {
        "evaluator": "E1",
        "group": "control",
        "location": "Login",
        "heuristic": "Error prevention",
        "severity": "2",
        "justification": "",
        "is_false_positive": "false",
        "dedup_key": "K1",
    }
    row.update(values)
    return row


def test_control_group_counts(forms):
    control = summarize_defects(forms, "control")
    assert (
        control.total_discrepancies,
        control.false_positives,
        control.real_defects,
        control.unique_defects,
        control.duplicates,
    ) == (51, 9, 42, 18, 24)
    assert control.mean_severity == Fraction(control.severity_total, 42)
    assert control.to_dict()["mean_severity"] == 2.52
    assert top_heuristics(control, 1) == [("User control and freedom", 10)]


def test_experimental_group_counts(forms):
    experimental = summarize_defects(forms, "experimental")
    assert (
        experimental.total_discrepancies,
        experimental.false_positives,
        experimental.real_defects,
        experimental.unique_defects,
        experimental.duplicates,
    ) == (42, 4, 38, 14, 24)
    assert experimental.to_dict()["mean_severity"] == 2.68
    assert experimental.per_location["General"] == 5
    assert list(experimental.per_heuristic)[0] == "Consistency and standardization"


def test_groups_are_sorted(forms):
    assert [summary.group for summary in summarize_all(forms)] == ["control", "experimental"]


def test_unknown_group_is_empty(forms):
    summary = summarize_defects(forms, "nobody")
    assert summary.total_discrepancies == 0
    assert summary.mean_severity is None
    assert summary.to_dict()["mean_severity"] is None


def test_heuristic_lists_are_split():
    forms = forms_from_rows([_row(heuristic="Error prevention; Visibility of system status")])
    summary = summarize_defects(forms, "control")
    assert summary.per_heuristic == {"Error prevention": 1, "Visibility of system status": 1}
    assert summary.real_defects == 1


def test_false_positives_count_per_location_but_not_as_defects():
    forms = forms_from_rows([_row(), _row(dedup_key="FP-1", is_false_positive="yes", severity="1")])
    summary = summarize_defects(forms, "control")
    assert summary.per_location == {"Login": 1}
    assert summary.discrepancies_per_location == {"Login": 2}
    assert summary.mean_severity == 2


@pytest.mark.parametrize("severity", ["0", "5", "high"])
def test_bad_severity(severity):
    with pytest.raises(EvalError) as excinfo:
        forms_from_rows([_row(severity=severity)])
    assert excinfo.value.code == "E-BAD-SEVERITY"


@pytest.mark.parametrize(
    "changes",
    [{"dedup_key": " "}, {"is_false_positive": "maybe"}, {"location": None}],
)
def test_bad_rows(changes):
    with pytest.raises(EvalError) as excinfo:
        forms_from_rows([_row(**changes)])
    assert excinfo.value.code == "E-BAD-ROW"


def test_missing_header_column(tmp_path):
    path = tmp_path / "forms.csv"
    path.write_text(",".join(FORM_COLUMNS[:-1]) + "\n", encoding="utf-8")
    with pytest.raises(EvalError, match="dedup_key"):
        load_defect_forms(path)


@pytest.mark.parametrize(
    "lines",
    [
        ["E1,control,Login,Error prevention,2,,false,K1,extra"],
        ["E1,control,Login,Error prevention,2,,false,K1", "E2,control,Login,Error prevention,2,,false,K2,extra"],
        ["E1,control,Login"],
    ],
)
def test_ragged_csv_rows(tmp_path, lines):
    path = tmp_path / "forms.csv"
    path.write_text("\n".join([",".join(FORM_COLUMNS), *lines]) + "\n", encoding="utf-8")
    with pytest.raises(EvalError) as excinfo:
        load_defect_forms(path)
    assert excinfo.value.code == "E-BAD-ROW"


def test_blank_cells_stay_text(tmp_path):
    path = tmp_path / "forms.csv"
    path.write_text(
        ",".join(FORM_COLUMNS) + "\nE1,control,NA,Error prevention,2,,,K1\n",
        encoding="utf-8",
    )
    (form,) = load_defect_forms(path)
    assert form.location == "NA"
    assert form.justification == ""
    assert form.is_false_positive is False


def test_empty_file_reports_missing_columns(tmp_path):
    path = tmp_path / "tam.csv"
    path.write_text("", encoding="utf-8")
    with pytest.raises(EvalError, match="respondent"):
        load_tam_responses(path)


def test_no_forms_no_groups():
    assert summarize_all([]) == []


def test_counting_identities_hold_on_random_data():
    rng = random.Random(1234)
    for _ in range(1000):
        forms = [
            DefectForm(
                evaluator=f"E{rng.randint(1, 4)}",
                group=rng.choice(["a", "b"]),
                location=rng.choice(["Login", "Menu", "General"]),
                heuristic=";".join(rng.sample(["H1", "H2", "H3"], rng.randint(1, 2))),
                severity=rng.randint(1, 4),
                is_false_positive=rng.random() < 0.2,
                dedup_key=f"K{rng.randint(1, 6)}",
            )
            for _ in range(rng.randint(0, 30))
        ]
        for summary in summarize_all(forms):
            real = [f for f in forms if f.group == summary.group and not f.is_false_positive]
            assert summary.total_discrepancies == summary.false_positives + summary.real_defects
            assert summary.real_defects == summary.unique_defects + summary.duplicates
            assert summary.unique_defects == len({f.dedup_key for f in real})
            assert sum(summary.per_location.values()) == summary.real_defects
            assert sum(summary.discrepancies_per_location.values()) == summary.total_discrepancies
            assert sum(summary.per_heuristic.values()) == sum(len(f.heuristics) for f in real)
            if summary.real_defects:
                assert summary.mean_severity * summary.real_defects == sum(f.severity for f in real)
            counts = list(summary.per_location.values())
            assert counts == sorted(counts, reverse=True)


def test_tam_construct_means(responses):
    control = summarize_tam(responses, "control")
    experimental = summarize_tam(responses, "experimental")
    assert control.construct_means["PU"] == Fraction(53, 12)
    assert control.construct_means["PEOU"] == Fraction(67, 16)
    assert experimental.construct_means["PEOU"] == Fraction(65, 16)
    assert experimental.construct_means["BI"] == Fraction(19, 4)
    assert control.to_dict()["constructs"] == {"PU": 4.42, "PEOU": 4.19, "PE": 4.25, "BI": 4.0}
    assert experimental.to_dict()["constructs"] == {"PU": 4.5, "PEOU": 4.06, "PE": 4.5, "BI": 4.75}
    for summary in (control, experimental):
        for name, mean in summary.construct_means.items():
            assert abs(float(mean) - summary.to_dict()["constructs"][name]) < 0.005 + 1e-9


def test_neutral_answers_average_to_three():
    rows = [dict({"respondent": f"R{i}", "group": "g"}, **{q: "3" for q in QUESTIONS}) for i in range(3)]
    summary = summarize_tam(responses_from_rows(rows), "g")
    assert set(summary.construct_means.values()) == {Fraction(3)}
    assert summary.respondents == 3


def test_bad_tam_answers():
    with pytest.raises(EvalError) as excinfo:
        TamResponse("R1", "g", (3,) * 10 + (6,))
    assert excinfo.value.code == "E-BAD-ANSWER"
    with pytest.raises(EvalError) as excinfo:
        TamResponse("R1", "g", (3,) * 10)
    assert excinfo.value.code == "E-BAD-ANSWER"


def test_empty_tam_group(responses):
    with pytest.raises(EvalError) as excinfo:
        summarize_tam(responses, "nobody")
    assert excinfo.value.code == "E-EMPTY-GROUP"

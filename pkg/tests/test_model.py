from startflow.dsl import parse
from startflow.model import errors_touching, prioritize_stories, validate_structure

from .conftest import CLEAN_SOURCE

HEADER = (
    'story S1 as "user" want "finish" prio 1\n'
    'screen a entry {\n  button go "Go"\n  layout note text "Hi"\n}\n'
    'screen b {\n  button back "Back"\n}\n'
)


def _codes(text):
    return [(error.code, error.location) for error in validate_structure(parse(text))]


def test_clean_project_has_no_structure_errors(clean_project):
    assert validate_structure(clean_project) == []


def test_duplicate_ids():
    text = HEADER + 'screen b { button back "Back" }\nfeature F for S1 {\n  use a b\n  connect a.go -> b as c\n  connect b.back -> a as c\n}\n'
    assert _codes(text) == [("E-DUP", "b"), ("E-DUP", "F/c")]


def test_unknown_story_and_screen():
    text = HEADER + "feature F for S9 {\n  use a nowhere\n}\n"
    assert _codes(text) == [
        ("E-REF", "F"),
        ("E-REF", "F/nowhere"),
    ]


def test_connector_outside_feature():
    text = HEADER + "feature F for S1 {\n  use a\n  connect a.go -> b\n}\n"
    assert _codes(text) == [("E-REF", "F/c1")]


def test_two_entry_screens():
    text = HEADER + 'screen c entry { button go "Go" }\nfeature F for S1 {\n  use a c\n}\n'
    assert _codes(text) == [("E-ENTRY", "F")]


def test_task_must_activate_triggers():
    text = HEADER + "feature F for S1 {\n  use a b\n  connect a.go -> b\n  task t : a.note -> b\n}\n"
    errors = validate_structure(parse(text))
    assert [error.code for error in errors] == ["E-REF"]
    assert "not a trigger" in errors[0].message


def test_non_trigger_connector_is_not_blocking():
    text = HEADER + "feature F for S1 {\n  use a b\n  connect a.note -> b\n}\n"
    project = parse(text)
    errors = validate_structure(project)
    assert [error.code for error in errors] == ["E-CONN-SRC"]
    assert not errors[0].blocking
    assert errors_touching(errors, project.feature("F")) == []


def test_errors_touching_scopes_to_feature():
    text = HEADER + (
        'screen b { button back "Back" }\n'
        "feature F for S1 {\n  use a b\n}\n"
        "feature G for S1 {\n  use a\n  connect a.go -> zz\n}\n"
    )
    project = parse(text)
    errors = validate_structure(project)
    touching_f = errors_touching(errors, project.feature("F"))
    touching_g = errors_touching(errors, project.feature("G"))
    assert [error.code for error in touching_f] == ["E-DUP"]
    assert [(error.code, error.location) for error in touching_g] == [("E-REF", "G/c1")]


def test_error_rendering():
    text = CLEAN_SOURCE.replace("use start done", "use start done ghost")
    (error,) = validate_structure(parse(text))
    assert str(error) == "E-REF F1/ghost: feature uses unknown screen 'ghost'"
    assert error.to_dict() == {
        "code": "E-REF",
        "location": "F1/ghost",
        "message": "feature uses unknown screen 'ghost'",
    }


def test_stories_sorted_by_priority_keeping_ties():
    project = parse(
        'story A as "u" want "a" prio 2\nstory B as "u" want "b" prio 1\nstory C as "u" want "c" prio 2\n'
    )
    assert [story.id for story in prioritize_stories(project.stories)] == ["B", "A", "C"]


def test_no_stories_sorts_to_nothing():
    assert prioritize_stories([]) == []

"""Parsing, typechecking, and elaboration of model files."""
import pytest

from ftrepair.core import StateCapExceeded, UsageError
from ftrepair.dsl import (
    ParseError,
    elaborate,
    evaluate_predicate,
    load_model,
    parse_model,
    pretty_print,
)

TOGGLE = """
model toggle {
    var x: 0..2;
    var up: bool;

    invariant: x <= 1;

    program     { up && x < 2 && x' == x + 1 && up' == up;
                  !up && x > 0 && x' == x - 1 && up' == up; }
    environment { x' == x && up' != up; }
    bad         { x == 2 && x' == 2; }
    restricted  { }
    faults      { x < 2 && x' == x + 1 && up' == up; }

    k: 2;
}
"""


def test_parse_and_elaborate():
    model = elaborate(parse_model(TOGGLE))
    assert model.space.count == 6
    assert model.k == 2
    # row major, first variable slowest: state = 2*x + up
    assert model.invariant.members == (0, 1, 2, 3)
    # program: up states may climb, non-up states may descend
    assert (1, 3) in model.delta_p and (3, 5) in model.delta_p
    assert (2, 0) in model.delta_p and (4, 2) in model.delta_p
    assert len(model.delta_p) == 4
    # environment toggles up
    assert (0, 1) in model.delta_e and (1, 0) in model.delta_e
    assert len(model.delta_e) == 6
    # bad: x stays at 2
    assert sorted(model.delta_b.pairs()) == [(4, 4), (4, 5), (5, 4), (5, 5)]
    assert len(model.faults) == 4


def test_unprimed_variables_unconstrained():
    text = TOGGLE.replace("x' == x && up' != up;", "up' != up;")
    model = elaborate(parse_model(text))
    # x is now free in the environment step
    assert len(model.delta_e) == 18


def test_pretty_print_roundtrip():
    spec = parse_model(TOGGLE)
    again = parse_model(pretty_print(spec))
    assert elaborate(again).delta_p == elaborate(spec).delta_p
    assert pretty_print(again) == pretty_print(spec)


def test_evaluate_predicate():
    spec = parse_model(TOGGLE)
    model = elaborate(spec)
    pred = evaluate_predicate(spec, model.space, "x == 2 && up")
    assert pred.members == (5,)


def test_state_labels_follow_declarations():
    model = elaborate(parse_model(TOGGLE))
    assert "x=0" in model.space.label(0)
    assert "x=2" in model.space.label(5)


@pytest.mark.parametrize(
    "mutation, fragment",
    [
        (("invariant: x <= 1;", "invariant: x' <= 1;"), "primed"),
        (("x <= 1", "x <= up"), "int"),
        (("x == 2 && x' == 2;", "y == 2;"), "unknown variable"),
        (("k: 2;", "k: 1;"), "k must be greater"),
        (("var x: 0..2;", "var x: 2..0;"), "empty domain"),
    ],
)
def test_rejections(mutation, fragment):
    old, new = mutation
    with pytest.raises((ParseError, UsageError), match=fragment):
        parse_model(TOGGLE.replace(old, new))


def test_parse_error_carries_position():
    with pytest.raises(ParseError) as err:
        parse_model("model m {\n  var @: 0..1;\n}")
    assert err.value.line == 2


def test_comments_and_operator_zoo():
    text = """
    model ops { // header comment
        var a: bool;
        var b: bool;
        invariant: (a => b) || (a xor b) || (a ^ b) || !(a && b);
        program { a' == a && b' == b; }
        environment {}
        bad {}
        restricted {}
        faults {}
        k: 3;
    }
    """
    model = elaborate(parse_model(text))
    assert model.k == 3
    assert len(model.delta_p) == 4


def test_section_order_is_fixed():
    swapped = """
    model m {
        var a: bool;
        invariant: true;
        environment {}
        program {}
        bad {}
        restricted {}
        faults {}
        k: 2;
    }
    """
    with pytest.raises(ParseError):
        parse_model(swapped)


def test_state_cap(monkeypatch, tmp_path):
    monkeypatch.setenv("FTREPAIR_STATE_CAP", "4")
    path = tmp_path / "toggle.model"
    path.write_text(TOGGLE)
    with pytest.raises(StateCapExceeded):
        load_model(str(path))
    monkeypatch.delenv("FTREPAIR_STATE_CAP")
    assert load_model(str(path)).space.count == 6

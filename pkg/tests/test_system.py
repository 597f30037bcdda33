import pytest

from oracles import stays_degree_one
from rearrange.system import (
    BUILTIN_NAMES,
    INIT,
    TERM,
    EndState,
    ParseError,
    SystemDefinitionError,
    builtin,
    extreme_ends,
    extreme_vertices,
    format_address,
    parse_address,
    parse_system,
    serialize_system,
    validate_expanding,
)

BAD_RULE = """system bad
base
  vertex a b
  edge t a b c0
replacement c0
  vertex vi m vt
  init vi
  term vt
  edge 1 vi m c0
  edge 2 m vt c0
  edge 3 vi vt c0
"""


@pytest.mark.parametrize("name", BUILTIN_NAMES)
def test_round_trip_is_byte_exact(name):
    text = serialize_system(builtin(name))
    again = parse_system(text)
    assert serialize_system(again) == text
    assert again == builtin(name)


@pytest.mark.parametrize("name", BUILTIN_NAMES)
def test_builtins_are_expanding(name):
    assert validate_expanding(builtin(name)) == []


def test_unknown_builtin():
    with pytest.raises(KeyError):
        builtin("basilica")


def test_airplane_base_edges():
    a = builtin("airplane")
    colors = {e.id: e.color for e in a.base.edges}
    assert colors == {"L": "blue", "R": "blue", "T": "red", "B": "red"}
    assert a.rule("red").graph.edge("b").color == "blue"
    assert [e.id for e in a.rule("blue").graph.edges] == ["e", "f", "g", "h"]


def test_cantor_rule_is_disconnected():
    g = builtin("cantor_V").rule("c0").graph
    assert len(g.vertices) == 4 and len(g.edges) == 2
    touched = {v for e in g.edges for v in (e.src, e.dst)}
    assert touched == set(g.vertices)
    assert not ({g.edges[0].src, g.edges[0].dst} & {g.edges[1].src, g.edges[1].dst})


def test_double_circle_has_two_loops():
    b = builtin("double_circle").base
    assert all(e.src == e.dst for e in b.edges)
    assert len({e.src for e in b.edges}) == 2


def test_validate_reports_init_term_edge():
    report = validate_expanding(parse_system(BAD_RULE))
    assert any("initial and terminal connected" in r for r in report)


def test_validate_reports_small_rule():
    text = BAD_RULE.replace("  vertex vi m vt\n", "  vertex vi vt\n")
    text = text.replace("  edge 1 vi m c0\n  edge 2 m vt c0\n  edge 3 vi vt c0\n", "  edge 1 vi vt c0\n")
    report = validate_expanding(parse_system(text))
    assert any("too few vertices" in r for r in report)
    assert any("too few edges" in r for r in report)


def test_missing_rule():
    text = serialize_system(builtin("circle_T")).replace("edge t x0 x0 c0", "edge t x0 x0 c9")
    with pytest.raises(SystemDefinitionError, match="missing rule"):
        parse_system(text)


@pytest.mark.parametrize(
    "bad, lineno",
    [
        ("system s\nbase\n  vertex a\n  edge t a b c0\n", 4),
        ("system s\nbase\n  vertex a a\n", 3),
        ("system s\nbase\n  frobnicate\n", 3),
    ],
)
def test_parse_errors_carry_line_numbers(bad, lineno):
    with pytest.raises(ParseError) as err:
        parse_system(bad)
    assert err.value.lineno == lineno


def test_address_text_round_trip():
    a = parse_address("t.2.1")
    assert a == ("t", "2", "1")
    assert format_address(a) == "t.2.1"


def test_extreme_ends_match_hand_fixpoint():
    assert extreme_ends(builtin("interval_F")) == {EndState("c0", INIT), EndState("c0", TERM)}
    assert EndState("blue", TERM) in extreme_ends(builtin("airplane"))


@pytest.mark.parametrize("name", BUILTIN_NAMES)
def test_extreme_vertices_agree_with_substitution(name):
    sys = builtin(name)
    expected = [v for v in sys.base.vertices if stays_degree_one(sys, v, 4)]
    assert extreme_vertices(sys) == expected


def test_circle_vertex_is_not_extreme():
    assert extreme_vertices(builtin("circle_T")) == []

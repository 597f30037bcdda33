import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import A
from oracles import child_ids, substituted_graph
from rearrange.expansion import (
    BOUNDARY,
    CLOSED,
    INTERIOR,
    OUTSIDE,
    CellUnion,
    Expansion,
    LassoPoint,
    all_expansions,
    cells_touch,
    common_refinement,
    covers,
    expand,
    expansion_containing,
    expansion_graph,
    full_expansion,
    interiors_disjoint,
    is_proper,
    normalize_addresses,
    parse_point,
    point_eq,
    point_in_cell,
    point_key,
)
from rearrange.system import BUILTIN_NAMES, builtin


def count_caret_sets(sys, budget):
    """Number of expansions with at most ``budget`` carets, by direct recursion over leaves."""

    def rec(carets, frontier, budget):
        # frontier: leaves not yet decided, in a fixed order
        if not frontier:
            return 1
        leaf, rest = frontier[0], frontier[1:]
        total = rec(carets, rest, budget)
        if budget:
            kids = [leaf + (k,) for k in child_ids(sys, leaf)]
            total += rec(carets | {leaf}, kids + rest, budget - 1)
        return total

    return rec(frozenset(), [(e.id,) for e in sys.base.edges], budget)


@pytest.mark.parametrize("name", BUILTIN_NAMES)
def test_expansion_counts_match_recursion(name):
    sys = builtin(name)
    for k in range(4):
        assert len(all_expansions(sys, k)) == count_caret_sets(sys, k)


def test_frozen_expansion_counts():
    # monochromatic two-edge rules give partial sums of Catalan numbers
    assert [len(all_expansions(builtin("circle_T"), k)) for k in range(5)] == [1, 2, 4, 9, 23]
    assert [len(all_expansions(builtin("double_circle"), k)) for k in range(5)] == [1, 3, 8, 22, 64]
    assert [len(all_expansions(builtin("airplane"), k)) for k in range(4)] == [1, 5, 25, 137]


@pytest.mark.parametrize("name", BUILTIN_NAMES)
def test_expansion_graph_vertex_counts(name):
    sys = builtin(name)
    for E in all_expansions(sys, 3):
        _, n = substituted_graph(sys, E.carets)
        assert len(expansion_graph(sys, E).vertices) == n


def test_circle_expansion_graphs_are_cycles():
    sys = builtin("circle_T")
    for E in all_expansions(sys, 4):
        g = expansion_graph(sys, E)
        assert len(g.vertices) == len(g.edges) and g.is_connected()


def test_leaves_in_forest_order(circle):
    E = Expansion.from_leaves(circle, [A("t.1"), A("t.2.1"), A("t.2.2")])
    assert E.leaves == (A("t.1"), A("t.2.1"), A("t.2.2"))
    assert E.carets == {A("t"), A("t.2")}


def test_expand_and_refine(circle):
    E = expand(Expansion.base(circle), A("t"))
    assert E.leaves == (A("t.1"), A("t.2"))
    with pytest.raises(ValueError):
        expand(E, A("t"))
    F = common_refinement(expand(E, A("t.1")), expand(E, A("t.2")))
    assert len(F) == 3
    assert full_expansion(circle, 2).leaves == (A("t.1.1"), A("t.1.2"), A("t.2.1"), A("t.2.2"))


def test_from_leaves_rejects_non_partition(circle):
    with pytest.raises(ValueError):
        Expansion.from_leaves(circle, [A("t.1"), A("t.2.1")])


def test_expansion_containing(circle):
    E = expansion_containing(circle, [A("t.1.2")])
    assert E.leaves == (A("t.1.1"), A("t.1.2"), A("t.2"))


def test_normalize_drops_descendants():
    assert normalize_addresses([A("t.1.2"), A("t.2"), A("t.1")]) == (A("t.1"), A("t.2"))
    u = CellUnion.of("t.2", "t.1.2", "t.1.2.1")
    assert u.addresses == (A("t.1.2"), A("t.2"))
    assert u.kind == CLOSED
    with pytest.raises(ValueError):
        CellUnion.of("t", kind="open")


addresses = st.lists(st.sampled_from("12"), max_size=5).map(lambda s: ("t",) + tuple(s))


@settings(max_examples=200, deadline=None)
@given(st.lists(addresses, max_size=8))
def test_normalize_is_idempotent_and_antichain(addrs):
    n = normalize_addresses(addrs)
    assert normalize_addresses(n) == n
    for a in n:
        for b in n:
            assert a == b or interiors_disjoint(a, b)
    # every input lies below some kept address
    assert all(any(a[: len(k)] == k for k in n) for a in addrs)


def test_covers_and_proper(circle):
    assert covers(circle, [A("t.1"), A("t.2.1"), A("t.2.2")], A("t"))
    assert not is_proper(circle, [A("t.1"), A("t.2")])
    assert is_proper(circle, [A("t.1"), A("t.2.1")])
    assert not is_proper(circle, [A("t")])


def test_cells_touch():
    c = builtin("circle_T")
    assert cells_touch(c, A("t.1"), A("t.2"))
    assert cells_touch(c, A("t.1.1"), A("t.2.2"))  # both contain the base vertex
    assert not cells_touch(c, A("t.1.1"), A("t.2.1"))
    v = builtin("cantor_V")
    assert not cells_touch(v, A("t.1"), A("t.2"))


def test_lasso_canonical_form():
    p = LassoPoint(A("t.1.2.1.2"), ("1", "2", "1", "2"))
    assert p == parse_point("t:(1.2)")
    assert str(p) == "t:(1.2)"
    assert p.unroll(4) == A("t.1.2.1")
    with pytest.raises(ValueError):
        parse_point("t.1")


def test_gluing_points(circle):
    left, right = parse_point("t:(1)"), parse_point("t:(2)")
    assert point_eq(circle, left, right)
    assert point_eq(circle, parse_point("t.1:(2)"), parse_point("t.2:(1)"))
    assert not point_eq(circle, parse_point("t:(1.2)"), parse_point("t:(2.1)"))
    assert point_key(circle, left) == point_key(circle, right)


def test_point_in_cell_circle(circle):
    v = parse_point("t:(1)")
    assert point_in_cell(circle, v, A("t.1")) == BOUNDARY
    assert point_in_cell(circle, v, A("t.2")) == BOUNDARY
    assert point_in_cell(circle, v, A("t.1.2")) == OUTSIDE
    assert point_in_cell(circle, v, A("t")) == INTERIOR
    p = parse_point("t:(1.2)")
    assert point_in_cell(circle, p, A("t.1.2")) == INTERIOR
    assert point_in_cell(circle, p, A("t.2")) == OUTSIDE


def test_point_in_cell_extremes():
    f = builtin("interval_F")
    assert point_in_cell(f, parse_point("t:(1)"), A("t.1")) == INTERIOR
    assert point_in_cell(f, parse_point("t.1:(2)"), A("t.1")) == BOUNDARY


def test_midpoint_is_interior_of_parent(circle):
    assert point_in_cell(circle, parse_point("t.1:(2)"), A("t")) == INTERIOR

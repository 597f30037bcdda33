"""Rearrangement groups of expanding replacement systems."""

from .system import (
    ReplacementSystem,
    builtin,
    extreme_ends,
    format_address,
    parse_address,
    parse_system,
    serialize_system,
    validate_expanding,
)
from .expansion import (
    CellUnion,
    Expansion,
    LassoPoint,
    common_refinement,
    expand,
    expansion_graph,
    full_expansion,
    interiors_disjoint,
    parse_point,
    point_eq,
    point_in_cell,
)
from .diagram import (
    GraphPairDiagram,
    Rearrangement,
    apply_cell,
    apply_point,
    compose,
    conjugate,
    enumerate_elements,
    identity,
    invert,
    make_diagram,
    power,
    reduce,
)

__version__ = "0.1.0"

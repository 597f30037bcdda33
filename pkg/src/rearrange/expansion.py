"""Expansions as caret forests, expansion graphs, cell unions and lasso points."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator

from .system import (
    INIT,
    TERM,
    Address,
    EndState,
    ReplacementSystem,
    VertexId,
    format_address,
    parse_address,
)

INTERIOR = "interior"
BOUNDARY = "boundary-only"
OUTSIDE = "outside"


def is_prefix(a: Address, b: Address) -> bool:
    """True iff ``a`` is a (non-strict) prefix of ``b``."""
    return len(a) <= len(b) and b[: len(a)] == a


def interiors_disjoint(a: Address, b: Address) -> bool:
    """Cells C(a) and C(b) have disjoint interiors iff neither address is a prefix of the other."""
    return not (is_prefix(a, b) or is_prefix(b, a))


@dataclass(frozen=True)
class Expansion:
    """An expansion, stored as the set of expanded nodes (carets) of its forest."""

    system: ReplacementSystem = field(compare=False, hash=False, repr=False)
    carets: frozenset[Address]

    def __post_init__(self):
        roots = {(e.id,) for e in self.system.base.edges}
        for c in self.carets:
            if len(c) > 1 and c[:-1] not in self.carets:
                raise ValueError(f"caret {format_address(c)} has no parent caret")
            if len(c) == 1 and c not in roots:
                raise ValueError(f"{format_address(c)} is not a base edge")
            if len(c) > 1 and not self.system.is_address(c):
                raise ValueError(f"invalid address {format_address(c)}")

    @classmethod
    def base(cls, sys: ReplacementSystem) -> Expansion:
        return cls(sys, frozenset())

    @classmethod
    def from_leaves(cls, sys: ReplacementSystem, leaves: Iterable[Address]) -> Expansion:
        leaves = [tuple(l) for l in leaves]
        carets = frozenset(l[:k] for l in leaves for k in range(1, len(l)))
        e = cls(sys, carets)
        if sorted(e.leaves) != sorted(set(leaves)) or len(set(leaves)) != len(leaves):
            raise ValueError("leaves do not form a complete antichain")
        return e

    @cached_property
    def leaves(self) -> tuple[Address, ...]:
        """Leaves in forest (depth-first, rule) order."""
        out = []
        stack = [(e.id,) for e in reversed(self.system.base.edges)]
        while stack:
            a = stack.pop()
            if a in self.carets:
                stack.extend(reversed(self.system.children(a)))
            else:
                out.append(a)
        return tuple(out)

    @cached_property
    def leaf_set(self) -> frozenset[Address]:
        return frozenset(self.leaves)

    @cached_property
    def nodes(self) -> frozenset[Address]:
        return self.carets | self.leaf_set

    def leaf_prefix(self, a: Address) -> Address | None:
        """The leaf that is a prefix of ``a``, if any."""
        for k in range(1, len(a) + 1):
            if a[:k] in self.leaf_set:
                return a[:k]
        return None

    def leaves_below(self, a: Address) -> list[Address]:
        return [l for l in self.leaves if is_prefix(a, l)]

    def expand(self, leaf: Address) -> Expansion:
        return expand(self, leaf)

    def __len__(self):
        return len(self.carets)

    def __str__(self):
        return "{" + ", ".join(format_address(l) for l in self.leaves) + "}"


def expand(E: Expansion, leaf: Address) -> Expansion:
    """Simple expansion at ``leaf``."""
    leaf = tuple(leaf)
    if leaf not in E.leaf_set:
        raise ValueError(f"{format_address(leaf)} is not a leaf")
    return Expansion(E.system, E.carets | {leaf})


def expansion_containing(sys: ReplacementSystem, nodes: Iterable[Address]) -> Expansion:
    """Smallest expansion having every address in ``nodes`` as a node."""
    carets = set()
    for a in nodes:
        sys.check_address(a)
        carets.update(a[:k] for k in range(1, len(a)))
    return Expansion(sys, frozenset(carets))


def full_expansion(sys: ReplacementSystem, n: int) -> Expansion:
    if n < 0:
        raise ValueError("n must be non-negative")
    E = Expansion.base(sys)
    for _ in range(n):
        E = Expansion(sys, E.carets | E.leaf_set)
    return E


def common_refinement(E1: Expansion, E2: Expansion) -> Expansion:
    return Expansion(E1.system, E1.carets | E2.carets)


def all_expansions(sys: ReplacementSystem, max_carets: int) -> list[Expansion]:
    """Every expansion with at most ``max_carets`` carets, sorted by size then carets."""
    key = ("all_expansions", max_carets)
    if key in sys._cache:
        return sys._cache[key]
    seen = {frozenset()}
    layer = [frozenset()]
    for _ in range(max_carets):
        nxt = []
        for carets in layer:
            for leaf in Expansion(sys, carets).leaves:
                c = carets | {leaf}
                if c not in seen:
                    seen.add(c)
                    nxt.append(c)
        layer = nxt
    out = sorted((Expansion(sys, c) for c in seen), key=lambda e: (len(e.carets), sorted(e.carets)))
    sys._cache[key] = out
    return out


# --- expansion graphs ---------------------------------------------------------------

@dataclass(frozen=True)
class GraphEdge:
    address: Address
    src: VertexId
    dst: VertexId
    color: str


@dataclass(frozen=True)
class ExpansionGraph:
    vertices: tuple[VertexId, ...]
    edges: tuple[GraphEdge, ...]

    def is_connected(self) -> bool:
        if not self.vertices:
            return True
        adj: dict[VertexId, set] = {v: set() for v in self.vertices}
        for e in self.edges:
            adj[e.src].add(e.dst)
            adj[e.dst].add(e.src)
        seen = {self.vertices[0]}
        todo = [self.vertices[0]]
        while todo:
            for w in adj[todo.pop()]:
                if w not in seen:
                    seen.add(w)
                    todo.append(w)
        return len(seen) == len(self.vertices)


def expansion_graph(sys: ReplacementSystem, E: Expansion) -> ExpansionGraph:
    # vertex identification is resolved by ReplacementSystem.vertex_of, which
    # follows each rule's init/term back to the expanded edge's endpoints
    edges = []
    verts: dict[VertexId, None] = {}
    for leaf in E.leaves:
        s, t = sys.endpoints(leaf)
        verts.setdefault(s)
        verts.setdefault(t)
        edges.append(GraphEdge(leaf, s, t, sys.color_of(leaf)))
    return ExpansionGraph(tuple(verts), tuple(edges))


def vertex_in_cell(sys: ReplacementSystem, v: VertexId, cell: Address) -> bool:
    """Whether the gluing vertex ``v`` lies in the closed cell C(cell)."""
    if v in sys.endpoints(cell):
        return True
    where = v[0]
    return bool(where) and is_prefix(cell, where)


def cells_touch(sys: ReplacementSystem, a: Address, b: Address) -> bool:
    """Whether the closed cells C(a) and C(b) intersect."""
    if not interiors_disjoint(a, b):
        return True
    return bool(set(sys.endpoints(a)) & set(sys.endpoints(b)))


# --- cell unions -----------------------------------------------------------------

CLOSED = "closed"


def normalize_addresses(addresses: Iterable[Address]) -> tuple[Address, ...]:
    """Drop addresses having a proper prefix in the set; sort."""
    addrs = sorted(set(tuple(a) for a in addresses), key=len)
    kept: list[Address] = []
    kept_set = set()
    for a in addrs:
        if any(a[:k] in kept_set for k in range(1, len(a) + 1)):
            continue
        kept.append(a)
        kept_set.add(a)
    return tuple(sorted(kept))


@dataclass(frozen=True)
class CellUnion:
    addresses: tuple[Address, ...]
    kind: str = CLOSED

    def __post_init__(self):
        object.__setattr__(self, "addresses", normalize_addresses(self.addresses))
        if self.kind not in (CLOSED, INTERIOR):
            raise ValueError(f"unknown cell-union kind {self.kind!r}")

    @classmethod
    def of(cls, *addresses, kind: str = CLOSED) -> CellUnion:
        return cls(tuple(parse_address(a) if isinstance(a, str) else tuple(a) for a in addresses), kind)

    def __iter__(self) -> Iterator[Address]:
        return iter(self.addresses)

    def __len__(self):
        return len(self.addresses)

    def __str__(self):
        body = ", ".join(format_address(a) for a in self.addresses)
        return f"{self.kind}{{{body}}}"

    def contains_address(self, a: Address) -> bool:
        """Whether C(a) lies inside the union (some member is a prefix of ``a``)."""
        return any(is_prefix(m, a) for m in self.addresses)


def interior_disjoint_unions(u: Iterable[Address], v: Iterable[Address]) -> bool:
    v = list(v)
    return all(interiors_disjoint(a, b) for a in u for b in v)


def closed_disjoint_unions(sys: ReplacementSystem, u: Iterable[Address], v: Iterable[Address]) -> bool:
    v = list(v)
    return not any(cells_touch(sys, a, b) for a in u for b in v)


def covers(sys: ReplacementSystem, addresses: Iterable[Address], node: Address) -> bool:
    """Whether the union of cells ``addresses`` contains the whole cell C(node)."""
    addrs = set(addresses)
    return _covers(sys, addrs, node, max((len(a) for a in addrs), default=0))


def _covers(sys, addrs, node, depth) -> bool:
    if any(node[:k] in addrs for k in range(1, len(node) + 1)):
        return True
    if len(node) >= depth:
        return False
    return all(_covers(sys, addrs, c, depth) for c in sys.children(node))


def is_proper(sys: ReplacementSystem, addresses: Iterable[Address]) -> bool:
    addrs = list(addresses)
    return not all(covers(sys, addrs, (e.id,)) for e in sys.base.edges)


# --- lasso points ------------------------------------------------------------------

class AutomatonError(RuntimeError):
    pass


@dataclass(frozen=True)
class LassoPoint:
    """The infinite address prefix . cycle . cycle . ... in canonical form."""

    prefix: Address
    cycle: tuple[str, ...]

    def __post_init__(self):
        prefix, cycle = tuple(self.prefix), tuple(self.cycle)
        if not prefix or not cycle:
            raise ValueError("lasso point needs a nonempty prefix and cycle")
        n = len(cycle)
        for d in range(1, n + 1):
            if n % d == 0 and cycle[:d] * (n // d) == cycle:
                cycle = cycle[:d]
                break
        while len(prefix) > 1 and prefix[-1] == cycle[-1]:
            prefix = prefix[:-1]
            cycle = (cycle[-1],) + cycle[:-1]
        object.__setattr__(self, "prefix", prefix)
        object.__setattr__(self, "cycle", cycle)

    def unroll(self, n: int) -> Address:
        """The first ``n`` symbols (at least the prefix)."""
        out = list(self.prefix)
        i = 0
        while len(out) < n:
            out.append(self.cycle[i % len(self.cycle)])
            i += 1
        return tuple(out)

    def __str__(self):
        return f"{format_address(self.prefix)}:({format_address(self.cycle)})"


def parse_point(text: str) -> LassoPoint:
    text = text.strip()
    try:
        pre, rest = text.split(":", 1)
        if not (rest.startswith("(") and rest.endswith(")")):
            raise ValueError
        return LassoPoint(parse_address(pre), parse_address(rest[1:-1]))
    except ValueError:
        raise ValueError(f"bad lasso point {text!r}; expected 'prefix:(cycle)'") from None


def check_point(sys: ReplacementSystem, p: LassoPoint) -> LassoPoint:
    """Raise unless every finite truncation of ``p`` is a valid address."""
    sys.check_address(p.prefix)
    color = sys.color_of(p.prefix)
    seen = set()
    while color not in seen:
        seen.add(color)
        for s in p.cycle:
            g = sys.rule(color).graph
            if s not in g.edge_map:
                raise ValueError(f"lasso point {p} leaves the address space")
            color = g.edge(s).color
    return p


def _step(sys: ReplacementSystem, states: frozenset[EndState], symbol: str) -> frozenset[EndState]:
    out = set()
    for st in states:
        rule = sys.rule(st.color)
        v = rule.end_vertex(st.end)
        e = rule.graph.edge_map.get(symbol)
        if e is None:
            continue
        if e.src == v:
            out.add(EndState(e.color, INIT))
        if e.dst == v:
            out.add(EndState(e.color, TERM))
    return frozenset(out)


def point_vertex(sys: ReplacementSystem, p: LassoPoint) -> VertexId | None:
    """The gluing vertex that ``p`` is an address of, or None for a regular point."""
    key = ("point_vertex", p)
    if key in sys._cache:
        return sys._cache[key]
    check_point(sys, p)
    found = None
    color = sys.color_of(p.prefix)
    for end in (INIT, TERM):
        states = frozenset({EndState(color, end)})
        seen = set()
        limit = len(sys.rules) * 2 + 2
        for _ in range(2 ** limit + 2):
            if not states:
                break
            if states in seen:
                break
            seen.add(states)
            for s in p.cycle:
                states = _step(sys, states, s)
        else:
            raise AutomatonError(f"vertex automaton did not settle on {p}")
        if states:
            v = sys.vertex_of(p.prefix, end)
            if found is not None and found != v:
                raise AutomatonError(f"{p} is an address of two vertices")
            found = v
    sys._cache[key] = found
    return found


def point_eq(sys: ReplacementSystem, p: LassoPoint, q: LassoPoint) -> bool:
    if p == q:
        return True
    vp = point_vertex(sys, p)
    return vp is not None and vp == point_vertex(sys, q)


def endpoint_interior(sys: ReplacementSystem, cell: Address, v: VertexId) -> bool:
    """Whether the endpoint ``v`` of C(cell) lies in its topological interior.

    True iff no other cell of a partition containing C(cell) meets ``v``; this covers
    extremes as well as cells that make up a whole component of the limit space.
    """
    key = ("endpoint_interior", cell, v)
    if key not in sys._cache:
        E = expansion_containing(sys, [cell])
        sys._cache[key] = not any(l != cell and v in sys.endpoints(l) for l in E.leaves)
    return sys._cache[key]


def point_in_cell(sys: ReplacementSystem, p: LassoPoint, cell: Address) -> str:
    """Classify ``p`` against C(cell): interior, boundary-only or outside."""
    cell = tuple(cell)
    v = point_vertex(sys, p)
    if v is None:
        return INTERIOR if is_prefix(cell, p.unroll(len(cell))) else OUTSIDE
    if v in sys.endpoints(cell):
        return INTERIOR if endpoint_interior(sys, cell, v) else BOUNDARY
    where = v[0]
    if where and is_prefix(cell, where):
        return INTERIOR
    return OUTSIDE


def point_key(sys: ReplacementSystem, p: LassoPoint):
    """A hashable key equal for two lasso points iff they are the same point."""
    v = point_vertex(sys, p)
    return ("vertex", v) if v is not None else ("regular", p)

"""Replacement systems: colored base graph plus one replacement graph per color.

Includes the line-based text format, the expanding-condition check, the
built-in systems (Thompson F, T, V, the Airplane and a double circle) and
the end-state fixpoint used to recognize extremes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable

Address = tuple[str, ...]
# (address of the edge whose expansion created the vertex, vertex name);
# base vertices use the empty address.
VertexId = tuple[Address, str]

INIT = "init"
TERM = "term"


class SystemDefinitionError(ValueError):
    """Malformed replacement system or system text."""


class ParseError(SystemDefinitionError):
    def __init__(self, lineno: int, msg: str):
        super().__init__(f"line {lineno}: {msg}")
        self.lineno = lineno


@dataclass(frozen=True)
class Edge:
    id: str
    src: str
    dst: str
    color: str

    def end(self, end: str) -> str:
        return self.src if end == INIT else self.dst


@dataclass(frozen=True)
class DirectedGraph:
    vertices: tuple[str, ...]
    edges: tuple[Edge, ...]

    @cached_property
    def edge_map(self) -> dict[str, Edge]:
        return {e.id: e for e in self.edges}

    def edge(self, eid: str) -> Edge:
        return self.edge_map[eid]

    def degree(self, v: str) -> int:
        """Number of edge-ends at ``v`` (a loop counts twice)."""
        return sum((e.src == v) + (e.dst == v) for e in self.edges)

    def incident(self, v: str) -> list[tuple[Edge, str]]:
        out = []
        for e in self.edges:
            if e.src == v:
                out.append((e, INIT))
            if e.dst == v:
                out.append((e, TERM))
        return out

    def isolated(self) -> list[str]:
        used = {e.src for e in self.edges} | {e.dst for e in self.edges}
        return [v for v in self.vertices if v not in used]


@dataclass(frozen=True)
class ReplacementGraph:
    graph: DirectedGraph
    init: str
    term: str

    def end_vertex(self, end: str) -> str:
        return self.init if end == INIT else self.term


@dataclass(frozen=True)
class EndState:
    color: str
    end: str

    def __str__(self):
        return f"({self.color}, {self.end})"


@dataclass(frozen=True)
class ReplacementSystem:
    name: str
    base: DirectedGraph
    rules: tuple[tuple[str, ReplacementGraph], ...]
    _cache: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    def __post_init__(self):
        _check_structure(self)

    @cached_property
    def rule_map(self) -> dict[str, ReplacementGraph]:
        return dict(self.rules)

    @property
    def colors(self) -> tuple[str, ...]:
        return tuple(c for c, _ in self.rules)

    def rule(self, color: str) -> ReplacementGraph:
        return self.rule_map[color]

    def color_of(self, a: Address) -> str:
        """Color of the edge named by address ``a``."""
        key = ("color", a)
        c = self._cache.get(key)
        if c is None:
            if len(a) == 1:
                c = self.base.edge(a[0]).color
            else:
                c = self.rule(self.color_of(a[:-1])).graph.edge(a[-1]).color
            self._cache[key] = c
        return c

    def child_symbols(self, color: str) -> tuple[str, ...]:
        return tuple(e.id for e in self.rule(color).graph.edges)

    def children(self, a: Address) -> tuple[Address, ...]:
        return tuple(a + (s,) for s in self.child_symbols(self.color_of(a)))

    def is_address(self, a: Address) -> bool:
        if not a or a[0] not in self.base.edge_map:
            return False
        color = self.base.edge(a[0]).color
        for s in a[1:]:
            g = self.rule(color).graph
            if s not in g.edge_map:
                return False
            color = g.edge(s).color
        return True

    def check_address(self, a: Address) -> Address:
        a = tuple(a)
        if not self.is_address(a):
            raise ValueError(f"not a valid address of {self.name}: {format_address(a)}")
        return a

    def vertex_of(self, a: Address, end: str) -> VertexId:
        """The vertex at the ``end`` side of edge ``a`` in any expansion containing it."""
        key = ("vertex", a, end)
        v = self._cache.get(key)
        if v is not None:
            return v
        if len(a) == 1:
            v = ((), self.base.edge(a[0]).end(end))
        else:
            parent = a[:-1]
            rule = self.rule(self.color_of(parent))
            rv = rule.graph.edge(a[-1]).end(end)
            if rv == rule.init:
                v = self.vertex_of(parent, INIT)
            elif rv == rule.term:
                v = self.vertex_of(parent, TERM)
            else:
                v = (parent, rv)
        self._cache[key] = v
        return v

    def endpoints(self, a: Address) -> tuple[VertexId, VertexId]:
        return self.vertex_of(a, INIT), self.vertex_of(a, TERM)

    def creation_graph(self, v: VertexId) -> DirectedGraph:
        """The graph in which vertex ``v`` first appears."""
        where, _ = v
        if not where:
            return self.base
        return self.rule(self.color_of(where)).graph

    def is_extreme(self, v: VertexId) -> bool:
        """True iff the point descending from ``v`` has a unique address."""
        g = self.creation_graph(v)
        inc = g.incident(v[1])
        if len(inc) != 1:
            return False
        e, end = inc[0]
        return EndState(e.color, end) in extreme_ends(self)


def _check_structure(sys: ReplacementSystem) -> None:
    colors = [c for c, _ in sys.rules]
    if len(set(colors)) != len(colors):
        raise SystemDefinitionError("duplicate rule color")
    rules = dict(sys.rules)
    graphs = [("base", sys.base)] + [(f"replacement {c}", r.graph) for c, r in sys.rules]
    for where, g in graphs:
        vs = set(g.vertices)
        if len(vs) != len(g.vertices):
            raise SystemDefinitionError(f"{where}: duplicate vertex id")
        ids = [e.id for e in g.edges]
        if len(set(ids)) != len(ids):
            raise SystemDefinitionError(f"{where}: duplicate edge id")
        for e in g.edges:
            if e.src not in vs or e.dst not in vs:
                raise SystemDefinitionError(f"{where}: edge {e.id} references undeclared vertex")
            if e.color not in rules:
                raise SystemDefinitionError(f"{where}: missing rule for color {e.color}")
    for c, r in sys.rules:
        if r.init not in r.graph.vertices or r.term not in r.graph.vertices:
            raise SystemDefinitionError(f"replacement {c}: init/term must be declared vertices")


def validate_expanding(sys: ReplacementSystem) -> list[str]:
    """Violated expanding conditions; empty when the system is expanding."""
    report = []
    if sys.base.isolated():
        report.append("isolated vertex in base graph")
    if not sys.base.edges:
        report.append("base graph has no edges")
    for c, r in sys.rules:
        g = r.graph
        if g.isolated():
            report.append(f"isolated vertex in replacement {c}")
        if r.init == r.term:
            report.append(f"replacement {c}: initial and terminal coincide")
        if any({e.src, e.dst} == {r.init, r.term} for e in g.edges):
            report.append(f"replacement {c}: initial and terminal connected")
        if len(g.vertices) < 3:
            report.append(f"replacement {c}: too few vertices")
        if len(g.edges) < 2:
            report.append(f"replacement {c}: too few edges")
    return report


def extreme_ends(sys: ReplacementSystem) -> frozenset[EndState]:
    """Greatest fixpoint of end-states whose designated vertex stays degree one forever."""
    cached = sys._cache.get("extreme_ends")
    if cached is not None:
        return cached
    succ: dict[EndState, EndState | None] = {}
    for c, r in sys.rules:
        for end in (INIT, TERM):
            inc = r.graph.incident(r.end_vertex(end))
            succ[EndState(c, end)] = EndState(inc[0][0].color, inc[0][1]) if len(inc) == 1 else None
    alive = {s for s, t in succ.items() if t is not None}
    changed = True
    while changed:
        changed = False
        for s in list(alive):
            if succ[s] not in alive:
                alive.discard(s)
                changed = True
    result = frozenset(alive)
    sys._cache["extreme_ends"] = result
    return result


def extreme_vertices(sys: ReplacementSystem) -> list[str]:
    """Base vertices whose points are extremes of the limit space."""
    return [v for v in sys.base.vertices if sys.is_extreme(((), v))]


# --- addresses as text ---------------------------------------------------------

def format_address(a: Iterable[str]) -> str:
    return ".".join(a)


def parse_address(text: str) -> Address:
    text = text.strip()
    if not text:
        raise ValueError("empty address")
    return tuple(text.split("."))


# --- system text format ----------------------------------------------------------

def serialize_system(sys: ReplacementSystem) -> str:
    lines = [f"system {sys.name}", "base"]
    lines += _graph_lines(sys.base)
    for c, r in sys.rules:
        lines.append(f"replacement {c}")
        if r.graph.vertices:
            lines.append("  vertex " + " ".join(r.graph.vertices))
        lines.append(f"  init {r.init}")
        lines.append(f"  term {r.term}")
        lines += [f"  edge {e.id} {e.src} {e.dst} {e.color}" for e in r.graph.edges]
    return "\n".join(lines) + "\n"


def _graph_lines(g: DirectedGraph) -> list[str]:
    out = []
    if g.vertices:
        out.append("  vertex " + " ".join(g.vertices))
    out += [f"  edge {e.id} {e.src} {e.dst} {e.color}" for e in g.edges]
    return out


def parse_system(text: str) -> ReplacementSystem:
    name = None
    sections: list[dict] = []
    cur = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        kw = tok[0]
        if kw == "system":
            if len(tok) != 2 or name is not None:
                raise ParseError(lineno, "expected a single 'system <name>'")
            name = tok[1]
        elif kw == "base":
            if len(tok) != 1 or any(s["color"] is None for s in sections):
                raise ParseError(lineno, "duplicate or malformed 'base'")
            cur = {"color": None, "vertices": [], "edges": [], "init": None, "term": None, "line": lineno}
            sections.append(cur)
        elif kw == "replacement":
            if len(tok) != 2:
                raise ParseError(lineno, "expected 'replacement <color>'")
            cur = {"color": tok[1], "vertices": [], "edges": [], "init": None, "term": None, "line": lineno}
            sections.append(cur)
        elif cur is None:
            raise ParseError(lineno, f"'{kw}' outside of a section")
        elif kw == "vertex":
            if len(tok) < 2:
                raise ParseError(lineno, "vertex needs at least one id")
            for v in tok[1:]:
                if v in cur["vertices"]:
                    raise ParseError(lineno, f"duplicate vertex {v}")
                cur["vertices"].append(v)
        elif kw == "edge":
            if len(tok) != 5:
                raise ParseError(lineno, "expected 'edge <id> <src> <dst> <color>'")
            _, eid, src, dst, color = tok
            if any(e.id == eid for e in cur["edges"]):
                raise ParseError(lineno, f"duplicate edge {eid}")
            for v in (src, dst):
                if v not in cur["vertices"]:
                    raise ParseError(lineno, f"undeclared vertex {v}")
            cur["edges"].append(Edge(eid, src, dst, color))
        elif kw in ("init", "term"):
            if cur["color"] is None:
                raise ParseError(lineno, f"'{kw}' not allowed in base")
            if len(tok) != 2:
                raise ParseError(lineno, f"expected '{kw} <id>'")
            if tok[1] not in cur["vertices"]:
                raise ParseError(lineno, f"undeclared vertex {tok[1]}")
            cur[kw] = tok[1]
        else:
            raise ParseError(lineno, f"unknown keyword '{kw}'")
    if name is None:
        raise ParseError(1, "missing 'system <name>'")
    bases = [s for s in sections if s["color"] is None]
    if len(bases) != 1:
        raise ParseError(1, "missing 'base' section")
    base = DirectedGraph(tuple(bases[0]["vertices"]), tuple(bases[0]["edges"]))
    rules = []
    seen = set()
    for s in sections:
        if s["color"] is None:
            continue
        if s["color"] in seen:
            raise ParseError(s["line"], f"duplicate replacement {s['color']}")
        seen.add(s["color"])
        if s["init"] is None or s["term"] is None:
            raise ParseError(s["line"], f"replacement {s['color']} needs init and term")
        g = DirectedGraph(tuple(s["vertices"]), tuple(s["edges"]))
        rules.append((s["color"], ReplacementGraph(g, s["init"], s["term"])))
    used = {e.color for e in base.edges} | {e.color for _, r in rules for e in r.graph.edges}
    missing = sorted(used - seen)
    if missing:
        raise SystemDefinitionError(f"missing rule for color {', '.join(missing)}")
    return ReplacementSystem(name, base, tuple(rules))


# --- built-ins -------------------------------------------------------------------

def _rule(vertices, init, term, edges) -> ReplacementGraph:
    return ReplacementGraph(DirectedGraph(tuple(vertices), tuple(Edge(*e) for e in edges)), init, term)


def _dyadic_rule() -> ReplacementGraph:
    return _rule(["vi", "m", "vt"], "vi", "vt", [("1", "vi", "m", "c0"), ("2", "m", "vt", "c0")])


def _interval_F() -> ReplacementSystem:
    base = DirectedGraph(("x0", "x1"), (Edge("t", "x0", "x1", "c0"),))
    return ReplacementSystem("interval_F", base, (("c0", _dyadic_rule()),))


def _circle_T() -> ReplacementSystem:
    base = DirectedGraph(("x0",), (Edge("t", "x0", "x0", "c0"),))
    return ReplacementSystem("circle_T", base, (("c0", _dyadic_rule()),))


def _cantor_V() -> ReplacementSystem:
    base = DirectedGraph(("x0", "x1"), (Edge("t", "x0", "x1", "c0"),))
    rule = _rule(["vi", "a", "b", "vt"], "vi", "vt", [("1", "vi", "a", "c0"), ("2", "b", "vt", "c0")])
    return ReplacementSystem("cantor_V", base, (("c0", rule),))


def _double_circle() -> ReplacementSystem:
    base = DirectedGraph(("x0", "y0"), (Edge("a", "x0", "x0", "c0"), Edge("b", "y0", "y0", "c0")))
    return ReplacementSystem("double_circle", base, (("c0", _dyadic_rule()),))


def _airplane() -> ReplacementSystem:
    # base: tips l, r; junctions p (left), q (right)
    base = DirectedGraph(
        ("l", "p", "q", "r"),
        (
            Edge("L", "p", "l", "blue"),
            Edge("R", "q", "r", "blue"),
            Edge("T", "q", "p", "red"),
            Edge("B", "p", "q", "red"),
        ),
    )
    red = _rule(
        ["vi", "m", "vt", "s"], "vi", "vt",
        [("a", "vi", "m", "red"), ("b", "m", "s", "blue"), ("c", "m", "vt", "red")],
    )
    blue = _rule(
        ["vi", "p", "q", "vt"], "vi", "vt",
        [("e", "p", "vi", "blue"), ("f", "q", "p", "red"), ("g", "p", "q", "red"), ("h", "q", "vt", "blue")],
    )
    return ReplacementSystem("airplane", base, (("blue", blue), ("red", red)))


_BUILTINS = {
    "interval_F": _interval_F,
    "circle_T": _circle_T,
    "cantor_V": _cantor_V,
    "airplane": _airplane,
    "double_circle": _double_circle,
}
BUILTIN_NAMES = tuple(_BUILTINS)
_builtin_cache: dict[str, ReplacementSystem] = {}


def builtin(name: str) -> ReplacementSystem:
    if name not in _BUILTINS:
        raise KeyError(f"unknown built-in system {name!r}; choose from {', '.join(BUILTIN_NAMES)}")
    if name not in _builtin_cache:
        _builtin_cache[name] = _BUILTINS[name]()
    return _builtin_cache[name]

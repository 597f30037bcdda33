"""Graph pair diagrams and the rearrangement group operations."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Mapping

from .expansion import (
    CellUnion,
    Expansion,
    LassoPoint,
    all_expansions,
    expansion_graph,
    is_prefix,
)
from .system import Address, ReplacementSystem, VertexId, format_address, parse_address


class DiagramError(ValueError):
    pass


class ConfluenceError(RuntimeError):
    """Two reduction orders produced different reduced diagrams."""


@dataclass(frozen=True)
class GraphPairDiagram:
    domain: Expansion
    range: Expansion
    sigma: tuple[tuple[Address, Address], ...]

    @classmethod
    def build(cls, domain: Expansion, range_: Expansion, sigma: Mapping[Address, Address]) -> GraphPairDiagram:
        return cls(domain, range_, tuple(sorted(sigma.items())))

    @property
    def system(self) -> ReplacementSystem:
        return self.domain.system

    @cached_property
    def map(self) -> dict[Address, Address]:
        return dict(self.sigma)

    @cached_property
    def inverse_map(self) -> dict[Address, Address]:
        return {b: a for a, b in self.sigma}

    def __str__(self):
        return serialize_diagram(self)


def vertex_map(d: GraphPairDiagram) -> dict[VertexId, VertexId]:
    """The vertex bijection induced by sigma; raises DiagramError if there is none."""
    sys = d.system
    dom, rng = d.domain, d.range
    if set(d.map) != dom.leaf_set:
        raise DiagramError("sigma is not defined exactly on the domain leaves")
    if set(d.map.values()) != rng.leaf_set or len(d.map) != len(rng.leaf_set):
        raise DiagramError("sigma is not a bijection onto the range leaves")
    fwd: dict[VertexId, VertexId] = {}
    back: dict[VertexId, VertexId] = {}
    for a, b in d.sigma:
        if sys.color_of(a) != sys.color_of(b):
            raise DiagramError(f"color mismatch: {format_address(a)} -> {format_address(b)}")
        for u, v in zip(sys.endpoints(a), sys.endpoints(b)):
            if fwd.setdefault(u, v) != v or back.setdefault(v, u) != u:
                raise DiagramError(
                    f"vertex-map inconsistency at {format_address(a)} -> {format_address(b)}"
                )
    if len(fwd) != len(expansion_graph(sys, rng).vertices):
        raise DiagramError("vertex map is not onto")
    return fwd


def validate(d: GraphPairDiagram) -> GraphPairDiagram:
    vertex_map(d)
    return d


# --- reduction -----------------------------------------------------------------

def reduction_candidates(d: GraphPairDiagram) -> list[tuple[Address, Address]]:
    """Pairs (domain caret, range caret) that form a paired caret removable together."""
    sys = d.system
    out = []
    for node in d.domain.carets:
        kids = sys.children(node)
        if not all(k in d.domain.leaf_set for k in kids):
            continue
        images = [d.map[k] for k in kids]
        parent = images[0][:-1]
        if not parent or parent not in d.range.carets:
            continue
        if tuple(images) == sys.children(parent):
            out.append((node, parent))
    out.sort()
    return out


def reduce_once(d: GraphPairDiagram, node: Address, image: Address) -> GraphPairDiagram:
    sys = d.system
    sigma = dict(d.map)
    for k in sys.children(node):
        del sigma[k]
    sigma[node] = image
    dom = Expansion(sys, d.domain.carets - {node})
    rng = Expansion(sys, d.range.carets - {image})
    return GraphPairDiagram.build(dom, rng, sigma)


def reduce(d: GraphPairDiagram, rng: random.Random | None = None) -> GraphPairDiagram:
    """Remove paired carets until none remain; ``rng`` randomizes the removal order."""
    while True:
        cands = reduction_candidates(d)
        if not cands:
            return d
        node, image = rng.choice(cands) if rng is not None else cands[0]
        d = reduce_once(d, node, image)


def simple_expansion(d: GraphPairDiagram, leaf: Address) -> GraphPairDiagram:
    """Expand domain leaf ``leaf`` and its image together."""
    sys = d.system
    img = d.map[leaf]
    sigma = dict(d.map)
    del sigma[leaf]
    for a, b in zip(sys.children(leaf), sys.children(img)):
        sigma[a] = b
    return GraphPairDiagram.build(d.domain.expand(leaf), d.range.expand(img), sigma)


# --- rearrangements ----------------------------------------------------------------

class Rearrangement:
    """A group element, held as its unique reduced graph pair diagram."""

    __slots__ = ("diagram",)

    def __init__(self, diagram: GraphPairDiagram, *, reduced: bool = False):
        self.diagram = diagram if reduced else reduce(diagram)

    @property
    def system(self) -> ReplacementSystem:
        return self.diagram.system

    def is_identity(self) -> bool:
        d = self.diagram
        return not d.domain.carets and not d.range.carets and all(a == b for a, b in d.sigma)

    def __eq__(self, other):
        return isinstance(other, Rearrangement) and self.diagram == other.diagram

    def __hash__(self):
        return hash(self.diagram)

    def __mul__(self, other: Rearrangement) -> Rearrangement:
        return compose(self, other)

    def __pow__(self, k: int) -> Rearrangement:
        return power(self, k)

    def inverse(self) -> Rearrangement:
        return invert(self)

    def __repr__(self):
        return f"Rearrangement({self.system.name}, {serialize_diagram(self.diagram)!r})"

    def __str__(self):
        return serialize_diagram(self.diagram)


def make_diagram(
    sys: ReplacementSystem,
    domain: Expansion | Iterable[Address],
    range_: Expansion | Iterable[Address],
    sigma: Mapping[Address, Address],
) -> Rearrangement:
    """Validate (D, R, sigma) and return the element it represents.

    ``domain`` and ``range_`` may be expansions or iterables of leaf addresses.
    """
    D = domain if isinstance(domain, Expansion) else Expansion.from_leaves(sys, domain)
    R = range_ if isinstance(range_, Expansion) else Expansion.from_leaves(sys, range_)
    sig = {tuple(a): tuple(b) for a, b in sigma.items()}
    d = GraphPairDiagram.build(D, R, sig)
    validate(d)
    return Rearrangement(d)


def identity(sys: ReplacementSystem) -> Rearrangement:
    E = Expansion.base(sys)
    return Rearrangement(GraphPairDiagram.build(E, E, {l: l for l in E.leaves}), reduced=True)


def _exchange(mapping: Mapping[Address, Address], leafset: frozenset, a: Address) -> Address:
    for k in range(1, len(a) + 1):
        if a[:k] in leafset:
            return mapping[a[:k]] + a[k:]
    raise KeyError(a)


def _refine_range(d: GraphPairDiagram, carets: frozenset[Address]) -> GraphPairDiagram:
    """Expand ``d`` so that its range has exactly ``carets`` (a superset of its range carets)."""
    sys = d.system
    extra = carets - d.range.carets
    if not extra:
        return d
    inv = d.inverse_map
    rleaves = d.range.leaf_set
    dom = set(d.domain.carets)
    dom.update(_exchange(inv, rleaves, c) for c in extra)
    D = Expansion(sys, frozenset(dom))
    R = Expansion(sys, carets)
    sigma = {l: _exchange(d.map, d.domain.leaf_set, l) for l in D.leaves}
    return GraphPairDiagram.build(D, R, sigma)


def _refine_domain(d: GraphPairDiagram, carets: frozenset[Address]) -> GraphPairDiagram:
    return _swap(_refine_range(_swap(d), carets))


def _swap(d: GraphPairDiagram) -> GraphPairDiagram:
    return GraphPairDiagram.build(d.range, d.domain, d.inverse_map)


def compose_diagrams(g: GraphPairDiagram, h: GraphPairDiagram) -> GraphPairDiagram:
    """Unreduced diagram for ``g`` followed by ``h``."""
    common = g.range.carets | h.domain.carets
    g2 = _refine_range(g, common)
    h2 = _refine_domain(h, common)
    sigma = {a: h2.map[b] for a, b in g2.sigma}
    return GraphPairDiagram.build(g2.domain, h2.range, sigma)


def _same_system(g: Rearrangement, h: Rearrangement) -> None:
    if g.system is not h.system and g.system != h.system:
        raise DiagramError(f"system mismatch: {g.system.name} vs {h.system.name}")


def compose(g: Rearrangement, h: Rearrangement) -> Rearrangement:
    """The element acting as ``g`` first, then ``h``."""
    _same_system(g, h)
    if g.is_identity():
        return h
    if h.is_identity():
        return g
    return Rearrangement(compose_diagrams(g.diagram, h.diagram))


def invert(g: Rearrangement) -> Rearrangement:
    return Rearrangement(_swap(g.diagram), reduced=True)


def power(g: Rearrangement, k: int) -> Rearrangement:
    if k < 0:
        g, k = invert(g), -k
    result = identity(g.system)
    base = g
    while k:
        if k & 1:
            result = compose(result, base)
        k >>= 1
        if k:
            base = compose(base, base)
    return result


def conjugate(g: Rearrangement, h: Rearrangement) -> Rearrangement:
    """h^-1, then g, then h."""
    return compose(compose(invert(h), g), h)


# --- action ------------------------------------------------------------------------

def image_addresses(d: GraphPairDiagram, a: Address) -> list[Address]:
    """Addresses covering the image of C(a) under the prefix exchange of ``d``."""
    try:
        return [_exchange(d.map, d.domain.leaf_set, a)]
    except KeyError:
        return [d.map[l] for l in d.domain.leaves if is_prefix(a, l)]


def apply_cell(g: Rearrangement, c: CellUnion) -> CellUnion:
    out = []
    for a in c:
        out.extend(image_addresses(g.diagram, a))
    return CellUnion(tuple(out), c.kind)


def track(d: GraphPairDiagram, pairs: Iterable[tuple[Address, Address]]) -> list[tuple[Address, Address]]:
    """Push (source, image) address pairs one step through ``d``, splitting where needed."""
    out = []
    for src, img in pairs:
        try:
            out.append((src, _exchange(d.map, d.domain.leaf_set, img)))
        except KeyError:
            for l in d.domain.leaves:
                if is_prefix(img, l):
                    out.append((src + l[len(img):], d.map[l]))
    return out


def apply_point(g: Rearrangement, p: LassoPoint) -> LassoPoint:
    d = g.diagram
    depth = max(len(l) for l in d.domain.leaves)
    n = len(p.prefix)
    reps = 0
    while n + reps * len(p.cycle) < depth:
        reps += 1
    word = p.prefix + p.cycle * reps
    for k in range(1, len(word) + 1):
        if word[:k] in d.domain.leaf_set:
            return LassoPoint(d.map[word[:k]] + word[k:], p.cycle)
    raise DiagramError(f"no domain leaf is a prefix of {p}")


# --- enumeration ---------------------------------------------------------------------

def _leaf_order(sys: ReplacementSystem, E: Expansion) -> list[Address]:
    """Leaves ordered so that each one (where possible) shares a vertex with an earlier one."""
    leaves = list(E.leaves)
    ends = {l: sys.endpoints(l) for l in leaves}
    order = []
    placed = set()
    seen_v: set = set()
    remaining = list(leaves)
    while remaining:
        pick = next((l for l in remaining if seen_v & set(ends[l])), remaining[0])
        remaining.remove(pick)
        order.append(pick)
        placed.add(pick)
        seen_v.update(ends[pick])
    return order


def isomorphisms(
    D: Expansion,
    R: Expansion,
    allowed=None,
) -> Iterator[dict[Address, Address]]:
    """All color-preserving leaf bijections D -> R inducing a graph isomorphism.

    ``allowed(d_leaf, r_leaf)`` optionally restricts individual assignments.
    Yields in a deterministic order.
    """
    sys = D.system
    if len(D.leaves) != len(R.leaves):
        return
    dorder = _leaf_order(sys, D)
    rleaves = list(R.leaves)
    dcol = {l: sys.color_of(l) for l in dorder}
    rcol = {l: sys.color_of(l) for l in rleaves}
    if sorted(dcol.values()) != sorted(rcol.values()):
        return
    dends = {l: sys.endpoints(l) for l in dorder}
    rends = {l: sys.endpoints(l) for l in rleaves}
    if len(expansion_graph(sys, D).vertices) != len(expansion_graph(sys, R).vertices):
        return
    sigma: dict[Address, Address] = {}
    used: set[Address] = set()
    fwd: dict = {}
    back: dict = {}

    def rec(i):
        if i == len(dorder):
            yield dict(sigma)
            return
        a = dorder[i]
        for b in rleaves:
            if b in used or rcol[b] != dcol[a]:
                continue
            if allowed is not None and not allowed(a, b):
                continue
            added = []
            ok = True
            for u, v in zip(dends[a], rends[b]):
                fu, bv = fwd.get(u), back.get(v)
                if fu is None and bv is None:
                    fwd[u] = v
                    back[v] = u
                    added.append((u, v))
                elif fu != v or bv != u:
                    ok = False
                    break
            if ok:
                sigma[a] = b
                used.add(b)
                yield from rec(i + 1)
                used.discard(b)
                del sigma[a]
            for u, v in added:
                del fwd[u]
                del back[v]

    yield from rec(0)


def _signature(sys: ReplacementSystem, E: Expansion):
    g = expansion_graph(sys, E)
    cols = tuple(sorted((e.color, e.src == e.dst) for e in g.edges))
    return len(g.vertices), cols


def enumerate_elements(sys: ReplacementSystem, caret_budget: int) -> list[Rearrangement]:
    """All elements whose reduced diagram has at most ``caret_budget`` carets per side."""
    exps = all_expansions(sys, caret_budget)
    groups: dict = {}
    for E in exps:
        groups.setdefault(_signature(sys, E), []).append(E)
    found: dict[str, Rearrangement] = {}
    for group in groups.values():
        for D in group:
            for R in group:
                for sigma in isomorphisms(D, R):
                    g = Rearrangement(GraphPairDiagram.build(D, R, sigma))
                    found.setdefault(serialize_diagram(g.diagram), g)
    return [found[k] for k in sorted(found)]


def random_element(sys: ReplacementSystem, rng: random.Random, max_carets: int = 4) -> Rearrangement:
    """A random element from a diagram with at most ``max_carets`` carets per side."""
    exps = all_expansions(sys, max_carets)
    key = ("sig_groups", max_carets)
    groups = sys._cache.get(key)
    if groups is None:
        groups = {}
        for E in exps:
            groups.setdefault(_signature(sys, E), []).append(E)
        sys._cache[key] = groups
    while True:
        D = rng.choice(exps)
        cands = groups[_signature(sys, D)]
        R = rng.choice(cands)
        isos = []
        for s in isomorphisms(D, R):
            isos.append(s)
            if len(isos) >= 64:
                break
        if isos:
            return Rearrangement(GraphPairDiagram.build(D, R, rng.choice(isos)))


def random_representative(d: GraphPairDiagram, rng: random.Random, steps: int) -> GraphPairDiagram:
    """Apply ``steps`` random paired simple expansions."""
    for _ in range(steps):
        d = simple_expansion(d, rng.choice(d.domain.leaves))
    return d


# --- serialization -------------------------------------------------------------------

def serialize_diagram(d: GraphPairDiagram) -> str:
    lines = ["domain"]
    lines += ["  " + format_address(l) for l in sorted(d.domain.leaves)]
    lines.append("range")
    lines += ["  " + format_address(l) for l in sorted(d.range.leaves)]
    lines.append("sigma")
    lines += [f"  {format_address(a)} -> {format_address(b)}" for a, b in sorted(d.sigma)]
    return "\n".join(lines) + "\n"


def parse_diagram(sys: ReplacementSystem, text: str) -> GraphPairDiagram:
    blocks: dict[str, list[str]] = {"domain": [], "range": [], "sigma": []}
    cur = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line in blocks:
            cur = line
        elif cur is None:
            raise DiagramError(f"line {lineno}: expected 'domain', 'range' or 'sigma'")
        else:
            blocks[cur].append(line)
    try:
        D = Expansion.from_leaves(sys, [sys.check_address(parse_address(s)) for s in blocks["domain"]])
        R = Expansion.from_leaves(sys, [sys.check_address(parse_address(s)) for s in blocks["range"]])
    except ValueError as exc:
        raise DiagramError(str(exc)) from None
    sigma = {}
    for line in blocks["sigma"]:
        if "->" not in line:
            raise DiagramError(f"bad sigma line {line!r}")
        a, b = (parse_address(s) for s in line.split("->"))
        if a in sigma:
            raise DiagramError(f"sigma defined twice at {format_address(a)}")
        sigma[a] = b
    d = GraphPairDiagram.build(D, R, sigma)
    validate(d)
    return d


def parse_element(sys: ReplacementSystem, text: str) -> Rearrangement:
    return Rearrangement(parse_diagram(sys, text))


def parse_elements(sys: ReplacementSystem, text: str) -> list[Rearrangement]:
    """Several diagrams separated by lines consisting of '---'."""
    chunks, cur = [], []
    for line in text.splitlines():
        if line.strip() == "---":
            chunks.append("\n".join(cur))
            cur = []
        else:
            cur.append(line)
    chunks.append("\n".join(cur))
    return [parse_element(sys, c) for c in chunks if c.strip()]


def diagram_json(d: GraphPairDiagram) -> dict:
    return {
        "domain": [format_address(l) for l in sorted(d.domain.leaves)],
        "range": [format_address(l) for l in sorted(d.range.leaves)],
        "sigma": [[format_address(a), format_address(b)] for a, b in sorted(d.sigma)],
    }


def diagram_to_json(d: GraphPairDiagram) -> str:
    return json.dumps(diagram_json(d), indent=2)


def _vname(v: VertexId) -> str:
    where, name = v
    return name if not where else f"{format_address(where)}/{name}"


def _graph_dot_lines(sys: ReplacementSystem, E: Expansion, tag: str, indent: str) -> list[str]:
    # each edge is drawn as a labelled box node so that other edges can point at it
    g = expansion_graph(sys, E)
    out = []
    for v in g.vertices:
        out.append(f'{indent}"{tag}:{_vname(v)}" [label="", shape=point];')
    for e in g.edges:
        node = f"{tag}:{format_address(e.address)}"
        out.append(f'{indent}"{node}" [label="{format_address(e.address)}", shape=box, color="{e.color}"];')
        out.append(f'{indent}"{tag}:{_vname(e.src)}" -> "{node}" [arrowhead=none, color="{e.color}"];')
        out.append(f'{indent}"{node}" -> "{tag}:{_vname(e.dst)}" [color="{e.color}"];')
    return out


def expansion_dot(sys: ReplacementSystem, E: Expansion) -> str:
    lines = ["digraph expansion {"]
    lines += _graph_dot_lines(sys, E, "E", "  ")
    lines.append("}")
    return "\n".join(lines) + "\n"


def diagram_dot(d: GraphPairDiagram) -> str:
    sys = d.system
    lines = ["digraph diagram {"]
    for tag, E in (("D", d.domain), ("R", d.range)):
        lines.append(f"  subgraph cluster_{tag} {{")
        lines.append(f'    label="{tag}";')
        lines += _graph_dot_lines(sys, E, tag, "    ")
        lines.append("  }")
    for a, b in sorted(d.sigma):
        lines.append(f'  "D:{format_address(a)}" -> "R:{format_address(b)}" [style=dashed, constraint=false];')
    lines.append("}")
    return "\n".join(lines) + "\n"

"""Forest differences, expandable sequences and minimal-imbalance representatives.

A representative (D, R, sigma) is improved by iterated expansions until none of
the three forbidden expandable-sequence patterns remain:

1. ``u1`` is an interior node of F_R and ``sigma(un)`` an interior node of F_D;
2. ``u1`` is not a node of F_R, ``sigma(un)`` is an interior node of F_D, and the
   component of F_D - F_R rooted at ``sigma(un)`` differs from the one containing ``u1``;
3. ``sigma(un)`` is not a node of F_D, ``u1`` is an interior node of F_R, and the
   component of F_R - F_D rooted at ``u1`` differs from the one containing ``sigma(un)``.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .diagram import (
    GraphPairDiagram,
    Rearrangement,
    power,
    random_representative,
    reduce,
)
from .expansion import Expansion, is_prefix
from .system import Address, format_address


class CanonicalFormError(RuntimeError):
    """An invariant the construction relies on failed; indicates a bug."""


@dataclass(frozen=True)
class Component:
    root: Address
    carets: frozenset[Address]
    leaves: tuple[Address, ...]

    @property
    def shape(self) -> frozenset[Address]:
        """Carets relative to the root (the root itself is the empty tuple)."""
        n = len(self.root)
        return frozenset(c[n:] for c in self.carets)


@dataclass(frozen=True)
class ForestDelta:
    carets: frozenset[Address]
    components: tuple[Component, ...]

    def component_rooted_at(self, node: Address) -> Component | None:
        for c in self.components:
            if c.root == node:
                return c
        return None

    def component_containing_leaf(self, leaf: Address) -> Component | None:
        parent = leaf[:-1]
        for c in self.components:
            if parent in c.carets:
                return c
        return None

    def __len__(self):
        return len(self.carets)


def _delta(a: Expansion, b: Expansion) -> ForestDelta:
    sys = a.system
    carets = a.carets - b.carets
    roots = sorted(c for c in carets if c[:-1] not in carets)
    comps = []
    for r in roots:
        members = frozenset(c for c in carets if is_prefix(r, c) and _connected(r, c, carets))
        leaves = tuple(
            k for c in sorted(members) for k in sys.children(c) if k not in members
        )
        comps.append(Component(r, members, leaves))
    return ForestDelta(frozenset(carets), tuple(comps))


def _connected(root: Address, c: Address, carets) -> bool:
    return all(c[:k] in carets for k in range(len(root), len(c) + 1))


def forest_delta(d: GraphPairDiagram) -> tuple[ForestDelta, ForestDelta, tuple[int, int]]:
    """(F_D - F_R, F_R - F_D, (domain imbalance, range imbalance))."""
    dr = _delta(d.domain, d.range)
    rd = _delta(d.range, d.domain)
    return dr, rd, (len(dr), len(rd))


def imbalance_offset(g: Rearrangement, representatives: int = 10, rng: random.Random | None = None) -> int:
    """Domain minus range imbalance, checked to agree across random representatives."""
    if representatives < 1:
        raise ValueError("need at least one representative")
    rng = rng or random.Random(0)
    values = set()
    for i in range(representatives):
        d = random_representative(g.diagram, rng, rng.randint(0, 4)) if i else g.diagram
        _, _, (a, b) = forest_delta(d)
        values.add(a - b)
    if len(values) != 1:
        raise CanonicalFormError(f"imbalance difference not constant: {sorted(values)}")
    return values.pop()


# --- expandable sequences -----------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    lemma: int
    sequence: tuple[Address, ...]

    def __str__(self):
        return f"pattern {self.lemma}: " + " ".join(format_address(u) for u in self.sequence)


def maximal_sequence(d: GraphPairDiagram, u1: Address) -> tuple[Address, ...] | None:
    """Follow sigma from leaf ``u1`` through domain leaves; None if the orbit closes up."""
    seq = [u1]
    seen = {u1}
    while True:
        nxt = d.map[seq[-1]]
        if nxt in seen:
            return None
        if nxt not in d.domain.leaf_set:
            return tuple(seq)
        seq.append(nxt)
        seen.add(nxt)


def is_expandable(d: GraphPairDiagram, seq) -> bool:
    seq = tuple(seq)
    if not seq or any(u not in d.domain.leaf_set for u in seq):
        return False
    if any(d.map[a] != b for a, b in zip(seq, seq[1:])):
        return False
    allv = seq + (d.map[seq[-1]],)
    return len(set(allv)) == len(allv)


def find_violations(d: GraphPairDiagram) -> list[Violation]:
    """Every expandable sequence matching a forbidden pattern, ordered by pattern then sequence."""
    dr, rd, _ = forest_delta(d)
    D, R = d.domain, d.range
    out = []
    for u1 in d.domain.leaves:
        seq = maximal_sequence(d, u1)
        if seq is None:
            continue
        # only the last image can be a non-leaf of D, so the maximal sequence is the only candidate
        end = d.map[seq[-1]]
        u1_interior_R = u1 in R.carets
        end_interior_D = end in D.carets
        if u1_interior_R and end_interior_D:
            out.append(Violation(1, seq))
        if u1 not in R.nodes and end_interior_D:
            if dr.component_rooted_at(end) != dr.component_containing_leaf(u1):
                out.append(Violation(2, seq))
        if end not in D.nodes and u1_interior_R:
            if rd.component_rooted_at(u1) != rd.component_containing_leaf(end):
                out.append(Violation(3, seq))
    out.sort(key=lambda v: (v.lemma, v.sequence))
    return out


def iterated_expansion(d: GraphPairDiagram, seq, shape) -> GraphPairDiagram:
    """Attach the relative caret tree ``shape`` at every u_i in D and every sigma(u_i) in R."""
    seq = tuple(tuple(u) for u in seq)
    shape = frozenset(tuple(w) for w in shape)
    sys = d.system
    if not is_expandable(d, seq):
        raise ValueError("not an expandable sequence")
    if shape and () not in shape:
        raise ValueError("subtree must be rooted at the empty relative address")
    for w in shape:
        if w and w[:-1] not in shape:
            raise ValueError("subtree is not closed under parents")
    images = [d.map[u] for u in seq]
    if shape:
        colors = {sys.color_of(u) for u in seq}
        if len(colors) != 1:
            raise ValueError("sequence is not monochromatic")
        probe = seq[0]
        for w in shape:
            if not sys.is_address(probe + w):
                raise ValueError("subtree does not fit the sequence color")
    dom = set(d.domain.carets)
    rng = set(d.range.carets)
    for u, v in zip(seq, images):
        dom.update(u + w for w in shape)
        rng.update(v + w for w in shape)
    D = Expansion(sys, frozenset(dom))
    R = Expansion(sys, frozenset(rng))
    sigma = dict(d.map)
    for u, v in zip(seq, images):
        del sigma[u]
    for u, v in zip(seq, images):
        for l in D.leaves_below(u):
            sigma[l] = v + l[len(u):]
    return GraphPairDiagram.build(D, R, sigma)


# --- canonical representatives ---------------------------------------------------------

@dataclass(frozen=True)
class CanonicalElement:
    diagram: GraphPairDiagram
    domain_delta: ForestDelta
    range_delta: ForestDelta
    imbalance: tuple[int, int]

    @property
    def measure(self) -> tuple[int, int, int]:
        return (self.imbalance[0], len(self.domain_delta.components), len(self.range_delta.components))


def _measure(d: GraphPairDiagram) -> tuple[int, int, int]:
    dr, rd, (a, _) = forest_delta(d)
    return a, len(dr.components), len(rd.components)


def _fix(d: GraphPairDiagram, v: Violation) -> GraphPairDiagram:
    dr, rd, _ = forest_delta(d)
    if v.lemma in (1, 2):
        comp = dr.component_rooted_at(d.map[v.sequence[-1]])
    else:
        comp = rd.component_rooted_at(v.sequence[0])
    return iterated_expansion(d, v.sequence, comp.shape)


def canonicalize(g: Rearrangement) -> CanonicalElement:
    d = g.diagram
    m = _measure(d)
    while True:
        viol = find_violations(d)
        if not viol:
            break
        d2 = _fix(d, viol[0])
        m2 = _measure(d2)
        if not m2 < m:
            raise CanonicalFormError(f"measure did not decrease: {m} -> {m2} fixing {viol[0]}")
        d, m = d2, m2
    dr, rd, imb = forest_delta(d)
    return CanonicalElement(d, dr, rd, imb)


def canonical_representative(g: Rearrangement) -> GraphPairDiagram:
    return canonicalize(g).diagram


def is_periodic(g: Rearrangement) -> bool:
    d = canonicalize(g).diagram
    return d.domain.carets == d.range.carets


def sigma_cycles(d: GraphPairDiagram) -> list[tuple[Address, ...]]:
    """Cycles of sigma on a diagram whose domain equals its range."""
    seen = set()
    out = []
    for l in d.domain.leaves:
        if l in seen:
            continue
        cyc = [l]
        seen.add(l)
        nxt = d.map[l]
        while nxt != l:
            cyc.append(nxt)
            seen.add(nxt)
            nxt = d.map[nxt]
        out.append(tuple(cyc))
    return out


def order(g: Rearrangement) -> int | float:
    """Order of ``g``; ``math.inf`` for non-periodic elements."""
    d = canonicalize(g).diagram
    if d.domain.carets != d.range.carets:
        return math.inf
    n = 1
    for c in sigma_cycles(d):
        n = math.lcm(n, len(c))
    return n


def brin4_orbit(c: CanonicalElement, r: Address) -> tuple[int, Address]:
    """Follow sigma from the domain leaf ``r`` (expanded in R) until it lands strictly below ``r``.

    Returns ``(n, e_star)`` with ``g^n`` mapping C(r) onto C(e_star).
    """
    d = c.diagram
    r = tuple(r)
    if r not in d.domain.leaf_set or r not in d.range.carets:
        raise ValueError(f"{format_address(r)} is not a domain leaf expanded in the range")
    seq = [r]
    seen = {r}
    while True:
        img = d.map[seq[-1]]
        if len(img) > len(r) and is_prefix(r, img):
            break
        if img not in d.domain.leaf_set:
            raise CanonicalFormError(f"orbit of {format_address(r)} left the domain leaves at {format_address(img)}")
        if img in seen:
            raise CanonicalFormError(f"orbit of {format_address(r)} revisits {format_address(img)}")
        seq.append(img)
        seen.add(img)
    e_star = d.map[seq[-1]]
    comp = c.range_delta.component_rooted_at(r)
    if comp is None or e_star not in comp.leaves:
        raise CanonicalFormError(f"{format_address(e_star)} is not a leaf of the component at {format_address(r)}")
    return len(seq), e_star


def expanded_domain_leaves(d: GraphPairDiagram) -> list[Address]:
    """Leaves of F_D that are interior nodes of F_R, sorted."""
    return sorted(l for l in d.domain.leaves if l in d.range.carets)


def canonical_report(c: CanonicalElement) -> dict:
    return {
        "imbalance": list(c.imbalance),
        "domain_components": [format_address(x.root) for x in c.domain_delta.components],
        "range_components": [format_address(x.root) for x in c.range_delta.components],
        "violations": [str(v) for v in find_violations(c.diagram)],
    }


__all__ = [
    "CanonicalElement",
    "Component",
    "ForestDelta",
    "Violation",
    "brin4_orbit",
    "canonicalize",
    "find_violations",
    "forest_delta",
    "imbalance_offset",
    "is_periodic",
    "iterated_expansion",
    "order",
    "power",
    "reduce",
]

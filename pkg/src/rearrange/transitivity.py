"""Bounded searches for weak cell-transitivity witnesses and minimality evidence."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .diagram import GraphPairDiagram, Rearrangement, apply_cell, invert, isomorphisms
from .expansion import (
    CLOSED,
    CellUnion,
    Expansion,
    all_expansions,
    expansion_containing,
    full_expansion,
    is_prefix,
    is_proper,
)
from .system import Address, ReplacementSystem, format_address


class QueryError(ValueError):
    pass


@dataclass(frozen=True)
class WitnessQuery:
    A: CellUnion
    C: Address
    budget: int

    def __post_init__(self):
        object.__setattr__(self, "C", tuple(self.C))
        if self.A.kind != CLOSED:
            raise QueryError("A must be a closed cell union")
        if not len(self.A):
            raise QueryError("A must be nonempty")
        if self.budget < 0:
            raise QueryError("budget must be non-negative")


def _under(addresses, leaf: Address) -> bool:
    return any(is_prefix(a, leaf) for a in addresses)


def _candidates(sys: ReplacementSystem, q: WitnessQuery) -> list[tuple[Expansion, Expansion]]:
    base_d = expansion_containing(sys, q.A.addresses).carets
    base_r = expansion_containing(sys, [q.C]).carets
    exps = all_expansions(sys, q.budget)
    doms = [E for E in exps if base_d <= E.carets]
    rans = [E for E in exps if base_r <= E.carets]
    pairs = []
    for D in doms:
        n_a = sum(1 for l in D.leaves if _under(q.A.addresses, l))
        for R in rans:
            if len(D.leaves) != len(R.leaves):
                continue
            if n_a > sum(1 for l in R.leaves if is_prefix(q.C, l)):
                continue
            pairs.append((D, R))
    pairs.sort(key=lambda p: (max(len(p[0]), len(p[1])), len(p[0]), len(p[1]), sorted(p[0].carets), sorted(p[1].carets)))
    return pairs


def find_witness(sys: ReplacementSystem, q: WitnessQuery) -> Rearrangement | None:
    """The first element (in a budget-independent order) with g(A) inside C(C), or None."""
    sys.check_address(q.C)
    for a in q.A:
        sys.check_address(a)
    if not is_proper(sys, q.A.addresses):
        raise QueryError("A must be a proper union of cells")
    A, C = q.A.addresses, q.C

    def allowed(a, b):
        return not _under(A, a) or is_prefix(C, b)

    for D, R in _candidates(sys, q):
        for sigma in isomorphisms(D, R, allowed):
            g = Rearrangement(GraphPairDiagram.build(D, R, sigma))
            if not verify_witness(g, q.A, C):
                raise AssertionError("constructed witness fails verification")
            return g
    return None


def verify_witness(g: Rearrangement, A: CellUnion, C: Address) -> bool:
    C = tuple(C)
    return all(is_prefix(C, a) for a in apply_cell(g, A))


@dataclass
class MinimalityReport:
    depth: int
    steps: int
    targets: list[Address]
    reached: dict[Address, set[Address]] = field(default_factory=dict)

    @property
    def full(self) -> bool:
        return all(len(r) == len(self.targets) for r in self.reached.values())

    def missing(self, start: Address) -> list[Address]:
        return [t for t in self.targets if t not in self.reached[start]]

    def as_dict(self) -> dict:
        return {
            "depth": self.depth,
            "steps": self.steps,
            "full": self.full,
            "cells": [
                {
                    "start": format_address(s),
                    "reached": [format_address(t) for t in self.targets if t in r],
                    "missing": [format_address(t) for t in self.missing(s)],
                }
                for s, r in self.reached.items()
            ],
        }


def _comparable(a: Address, b: Address) -> bool:
    return is_prefix(a, b) or is_prefix(b, a)


def minimality_evidence(
    sys: ReplacementSystem, generators, depth: int, steps: int
) -> MinimalityReport:
    """Breadth-first cell orbits of the depth-1 cells under the generators and their inverses."""
    gens = list(generators)
    if not gens:
        raise ValueError("need at least one generator")
    if depth < 1 or steps < 0:
        raise ValueError("depth must be positive and steps non-negative")
    letters = []
    for g in gens:
        letters.extend([g, invert(g)])
    targets = sorted(full_expansion(sys, depth).leaves)
    report = MinimalityReport(depth, steps, targets)
    for start in sorted(full_expansion(sys, 1).leaves):
        first = CellUnion((start,))
        seen = {first}
        queue = deque([(first, 0)])
        reached = set()
        while queue:
            u, k = queue.popleft()
            for a in u:
                reached.update(t for t in targets if _comparable(a, t))
            if k == steps:
                continue
            for h in letters:
                v = apply_cell(h, u)
                if v not in seen:
                    seen.add(v)
                    queue.append((v, k + 1))
        report.reached[start] = reached
    return report

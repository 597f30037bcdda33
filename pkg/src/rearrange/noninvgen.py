"""Desk-scale run of the non-invariable-generation construction.

Given a point p and elements g_1..g_k, the cells C_n along p give pairwise disjoint
sets I_n = int C(C_n) minus C(C_{n+1}). Each g_i is conjugated so that the complement
of I_i becomes weakly wandering; a ping-pong argument then confines the orbit of p
under the conjugates to p together with I_1..I_k, so a whole cell is never visited.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .diagram import Rearrangement, apply_point, conjugate, invert
from .expansion import (
    CLOSED,
    INTERIOR,
    OUTSIDE,
    CellUnion,
    LassoPoint,
    check_point,
    expansion_containing,
    is_prefix,
    is_proper,
    point_in_cell,
    point_key,
)
from .system import Address, ReplacementSystem, format_address
from .transitivity import WitnessQuery, find_witness
from .wandering import (
    WEAKLY,
    WanderingCertificate,
    cell_inside_interior,
    verify_wandering,
    wandering_cell,
)


class NigError(ValueError):
    pass


@dataclass(frozen=True)
class NigConfig:
    sys: ReplacementSystem
    p: LassoPoint
    elements: tuple[Rearrangement, ...]
    word_bound: int = 4
    witness_budget: int = 6
    wander_bound: int = 20

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        if not self.elements:
            raise NigError("need at least one element")
        for i, g in enumerate(self.elements, 1):
            if g.system is not self.sys and g.system != self.sys:
                raise NigError(f"element {i} belongs to another system")
            if g.is_identity():
                raise NigError(f"element {i} is the identity")
        if self.word_bound < 0:
            raise NigError("word bound must be non-negative")
        check_point(self.sys, self.p)

    @property
    def k(self) -> int:
        return len(self.elements)


@dataclass(frozen=True)
class Conjugator:
    gamma: Rearrangement
    h: Rearrangement
    witness: Rearrangement
    certificate: WanderingCertificate
    target: Address


@dataclass(frozen=True)
class PingPongEntry:
    word: tuple[tuple[int, int], ...]
    point: LassoPoint
    index: int
    ok: bool
    reason: str = ""

    def word_text(self) -> str:
        return format_word(self.word)


@dataclass
class NigResult:
    cells: list[Address]
    I_complements: list[CellUnion]
    conjugators: list[Conjugator]
    avoided_cell: Address
    pingpong_log: list[PingPongEntry] = field(default_factory=list)
    passed: bool = False

    @property
    def counterexample(self) -> PingPongEntry | None:
        return next((e for e in self.pingpong_log if not e.ok), None)

    def as_dict(self) -> dict:
        return {
            "cells": [format_address(c) for c in self.cells],
            "I_complements": [[format_address(a) for a in u] for u in self.I_complements],
            "conjugators": [
                {
                    "h": str(c.h),
                    "gamma": str(c.gamma),
                    "target": format_address(c.target),
                    "certificate": c.certificate.as_dict(),
                }
                for c in self.conjugators
            ],
            "avoided_cell": format_address(self.avoided_cell),
            "pingpong_log": [
                {"word": e.word_text(), "point": str(e.point), "index": e.index, "ok": e.ok, "reason": e.reason}
                for e in self.pingpong_log
            ],
            "passed": self.passed,
        }


def format_word(word) -> str:
    """Letters in application order; ``g2^-1`` is the inverse of the second conjugate."""
    if not word:
        return "1"
    return " ".join(f"g{i}" if s == 1 else f"g{i}^-1" for i, s in word)


def build_nested_cells(p: LassoPoint, count: int) -> list[Address]:
    """C_1 .. C_count: the prefixes of p of depth 1 .. count below the base edge."""
    if count < 2:
        raise NigError("need at least two nested cells")
    return [p.unroll(n + 1) for n in range(1, count + 1)]


def interior_complement(sys: ReplacementSystem, cell: Address, nxt: Address) -> CellUnion:
    """Closed union equal to the complement of int C(cell) minus C(nxt)."""
    cell, nxt = tuple(cell), tuple(nxt)
    if not (len(nxt) > len(cell) and is_prefix(cell, nxt)):
        raise NigError(f"{format_address(nxt)} is not strictly below {format_address(cell)}")
    sys.check_address(nxt)
    E = expansion_containing(sys, [cell])
    others = [l for l in E.leaves if l != cell]
    return CellUnion(tuple(others) + (nxt,), CLOSED)


def conjugate_into_wandering(
    g: Rearrangement, A: CellUnion, witness_budget: int = 6, wander_bound: int = 20
) -> Conjugator:
    """gamma = conjugate(g, h) with A weakly gamma-wandering."""
    sys = g.system
    if A.kind != CLOSED or not is_proper(sys, A.addresses):
        raise NigError("A must be a proper closed union of cells")
    cert = wandering_cell(g)
    cell = cert.f if cert.f is not None else cert.edge
    target = cell_inside_interior(sys, cell)
    witness = find_witness(sys, WitnessQuery(A, target, witness_budget))
    if witness is None:
        raise NigError(
            f"no element maps {A} into {format_address(target)} within {witness_budget} carets per side"
        )
    # witness sends A into the wandering set S, so h = witness^-1 carries S over A
    h = invert(witness)
    gamma = conjugate(g, h)
    moved = WanderingCertificate(WEAKLY, A)
    if not verify_wandering(gamma, moved, wander_bound):
        raise NigError(f"{A} is not weakly wandering for the conjugate")
    return Conjugator(gamma, h, witness, cert, target)


def _in_I(sys, q: LassoPoint, cells: list[Address], i: int) -> bool:
    return point_in_cell(sys, q, cells[i - 1]) == INTERIOR and point_in_cell(sys, q, cells[i]) == OUTSIDE


def pingpong_check(
    sys: ReplacementSystem,
    p: LassoPoint,
    gammas,
    cells: list[Address],
    avoided: Address,
    word_bound: int,
) -> tuple[list[PingPongEntry], bool]:
    """Breadth-first orbit of p over reduced words; every minimal word must end in its I set."""
    gammas = list(gammas)
    letters = []
    for i, g in enumerate(gammas, 1):
        letters.append(((i, 1), g))
        letters.append(((i, -1), invert(g)))
    pkey = point_key(sys, p)
    seen = {pkey}
    frontier = [((), p)]
    log: list[PingPongEntry] = []
    for _ in range(word_bound):
        found: dict = {}
        for word, q in frontier:
            for letter, g in letters:
                if word and word[-1] == (letter[0], -letter[1]):
                    continue
                img = apply_point(g, q)
                key = point_key(sys, img)
                if key in seen:
                    continue
                found.setdefault(key, []).append((word + (letter,), img))
        nxt = []
        for key in sorted(found, key=str):
            hits = sorted(found[key], key=lambda t: t[0])
            for word, img in hits:
                i = word[-1][0]
                if not _in_I(sys, img, cells, i):
                    log.append(PingPongEntry(word, img, i, False, f"not in I_{i}"))
                elif point_in_cell(sys, img, avoided) != OUTSIDE:
                    log.append(PingPongEntry(word, img, i, False, "meets the avoided cell"))
                else:
                    log.append(PingPongEntry(word, img, i, True))
            seen.add(key)
            nxt.append(hits[0])
        frontier = nxt
        if not frontier:
            break
    log.sort(key=lambda e: (len(e.word), e.word))
    return log, all(e.ok for e in log)


def avoided_cell(sys: ReplacementSystem, cells: list[Address]) -> Address:
    """A cell inside I_{k+1}: inside the interior of a sibling of the last nested cell."""
    parent, last = cells[-2], cells[-1]
    sibling = min(c for c in sys.children(parent) if c != last)
    return cell_inside_interior(sys, sibling)


def nig_report(cfg: NigConfig) -> NigResult:
    sys, k = cfg.sys, cfg.k
    cells = build_nested_cells(cfg.p, k + 2)
    comps = [interior_complement(sys, cells[i], cells[i + 1]) for i in range(k + 1)]
    for u in comps:
        if not is_proper(sys, u.addresses):
            raise NigError(f"complement {u} is not proper")
    conj = [
        conjugate_into_wandering(g, comps[i], cfg.witness_budget, cfg.wander_bound)
        for i, g in enumerate(cfg.elements)
    ]
    avoid = avoided_cell(sys, cells)
    if point_in_cell(sys, cfg.p, avoid) != OUTSIDE:
        raise NigError("avoided cell contains p")
    log, ok = pingpong_check(sys, cfg.p, [c.gamma for c in conj], cells, avoid, cfg.word_bound)
    return NigResult(cells, comps[:k], conj, avoid, log, ok)


def sabotaged_report(cfg: NigConfig) -> NigResult:
    """Negative control: the first conjugate is replaced by the raw first element."""
    res = nig_report(cfg)
    gammas = [cfg.elements[0]] + [c.gamma for c in res.conjugators[1:]]
    log, ok = pingpong_check(cfg.sys, cfg.p, gammas, res.cells, res.avoided_cell, cfg.word_bound)
    return NigResult(res.cells, res.I_complements, res.conjugators, res.avoided_cell, log, ok)

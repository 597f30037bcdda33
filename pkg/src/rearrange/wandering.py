"""Wandering and weakly wandering cells: synthesis from canonical forms and bounded verification."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .canonical import brin4_orbit, canonicalize, expanded_domain_leaves, sigma_cycles
from .diagram import GraphPairDiagram, Rearrangement, apply_cell, invert, track
from .expansion import (
    INTERIOR,
    CellUnion,
    closed_disjoint_unions,
    endpoint_interior,
    interior_disjoint_unions,
    is_prefix,
    vertex_in_cell,
)
from .system import Address, ReplacementSystem, format_address

WANDERING = "wandering"
WEAKLY = "weakly-wandering"

DISJOINT = "disjoint"
FIXED = "fixed"
FAIL = "fail"


class WanderingError(ValueError):
    pass


@dataclass(frozen=True)
class WanderingCertificate:
    kind: str
    set: CellUnion
    # non-periodic data
    e: Address | None = None
    e_star: Address | None = None
    n: int | None = None
    f: Address | None = None
    # periodic data
    edge: Address | None = None
    orbit_length: int | None = None
    order: int | None = None
    verified_to: int = 0

    def __post_init__(self):
        if self.kind not in (WANDERING, WEAKLY):
            raise WanderingError(f"unknown certificate kind {self.kind!r}")
        if self.orbit_length is not None and self.order is not None and self.order % self.orbit_length:
            raise WanderingError("orbit length must divide the order")

    def as_dict(self) -> dict:
        fmt = lambda a: None if a is None else format_address(a)  # noqa: E731
        out = {"kind": self.kind, "set": [format_address(a) for a in self.set], "set_kind": self.set.kind}
        if self.kind == WANDERING and self.e is not None:
            out.update(e=fmt(self.e), e_star=fmt(self.e_star), n=self.n, f=fmt(self.f))
        else:
            out.update(edge=fmt(self.edge), orbit_length=self.orbit_length, order=self.order)
        out["verified_to"] = self.verified_to
        return out


def _periodic_certificate(d: GraphPairDiagram) -> WanderingCertificate:
    cycles = sigma_cycles(d)
    order = math.lcm(*(len(c) for c in cycles))
    moving = sorted(l for c in cycles if len(c) > 1 for l in c)
    edge = moving[0] if moving else min(d.domain.leaves)
    length = next(len(c) for c in cycles if edge in c)
    return WanderingCertificate(
        WEAKLY, CellUnion((edge,), INTERIOR), edge=edge, orbit_length=length, order=order
    )


def wandering_cell(g: Rearrangement, verify: int = 0) -> WanderingCertificate:
    """Certificate for a wandering cell (non-periodic g) or weakly wandering cell (periodic g).

    With ``verify > 0`` the certificate is checked on powers up to that bound before returning.
    """
    c = canonicalize(g)
    d = c.diagram
    if d.domain.carets == d.range.carets:
        cert = _periodic_certificate(d)
    else:
        candidates = expanded_domain_leaves(d)
        if not candidates:
            # canonical D != R always leaves some domain leaf expanded in R
            raise WanderingError("no domain leaf is expanded in the range")
        e = candidates[0]
        n, e_star = brin4_orbit(c, e)
        below = sorted(l for l in d.range.leaves if len(l) > len(e) and is_prefix(e, l) and l != e_star)
        if not below:
            raise WanderingError(f"no second leaf below {format_address(e)}")
        f = below[0]
        cert = WanderingCertificate(WANDERING, CellUnion((f,), INTERIOR), e=e, e_star=e_star, n=n, f=f)
    if verify > 0:
        if not verify_wandering(g, cert, verify):
            raise WanderingError(f"certificate failed verification up to {verify}")
        cert = replace(cert, verified_to=verify)
    return cert


def _disjoint(sys: ReplacementSystem, kind: str, a, b) -> bool:
    if kind == INTERIOR:
        return interior_disjoint_unions(a, b)
    return closed_disjoint_unions(sys, a, b)


def _status(sys, cert_set: CellUnion, pairs) -> str:
    if all(src == img for src, img in pairs):
        return FIXED
    if _disjoint(sys, cert_set.kind, [img for _, img in pairs], cert_set.addresses):
        return DISJOINT
    return FAIL


def verification_log(g: Rearrangement, cert: WanderingCertificate, M: int) -> list[tuple[int, str]]:
    """Per-power status for m = 1..M and m = -1..-M."""
    if M < 1:
        raise ValueError("verification bound must be at least 1")
    sys = g.system
    log = []
    for sign, h in ((1, g), (-1, invert(g))):
        pairs = [(a, a) for a in cert.set]
        for m in range(1, M + 1):
            pairs = track(h.diagram, pairs)
            st = _status(sys, cert.set, pairs)
            if st == FIXED and cert.kind == WANDERING:
                st = FAIL
            log.append((sign * m, st))
    return log


def verify_wandering(g: Rearrangement, cert: WanderingCertificate, M: int) -> bool:
    return all(st != FAIL for _, st in verification_log(g, cert, M))


def cell_inside_interior(sys: ReplacementSystem, f: Address, max_depth: int = 8) -> Address:
    """A descendant of ``f`` whose closed cell lies in the interior of C(f)."""
    f = tuple(f)
    sys.check_address(f)
    bad = [v for v in set(sys.endpoints(f)) if not endpoint_interior(sys, f, v)]
    level = [f]
    for depth in range(max_depth + 1):
        for a in level:
            if not any(vertex_in_cell(sys, v, a) for v in bad):
                return a
        level = [k for a in level for k in sys.children(a)]
    raise WanderingError(f"no cell inside the interior of C({format_address(f)}) up to depth {max_depth}")


def fixed_cells(g: Rearrangement) -> CellUnion:
    """Leaf cells of the reduced diagram that g fixes pointwise."""
    d = g.diagram
    return CellUnion(tuple(a for a, b in d.sigma if a == b))


def image_certificate(cert: WanderingCertificate, h: Rearrangement) -> WanderingCertificate:
    """The certificate transported by h, valid for the conjugate h^-1 g h."""
    return WanderingCertificate(cert.kind, apply_cell(h, cert.set))

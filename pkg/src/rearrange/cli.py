"""Command-line interface: ``rearrange <command> [flags]``."""

from __future__ import annotations

import argparse
import json
import random
import sys

from .canonical import canonical_report, canonicalize, is_periodic, order
from .diagram import (
    compose,
    diagram_dot,
    diagram_json,
    enumerate_elements,
    expansion_dot,
    parse_diagram,
    parse_element,
    parse_elements,
    random_element,
    reduce,
    serialize_diagram,
)
from .expansion import CellUnion, expansion_containing, expansion_graph, full_expansion, parse_point
from .noninvgen import NigConfig, format_word, nig_report
from .system import (
    BUILTIN_NAMES,
    ReplacementSystem,
    builtin,
    extreme_ends,
    extreme_vertices,
    format_address,
    parse_address,
    parse_system,
    validate_expanding,
)
from .transitivity import WitnessQuery, find_witness, minimality_evidence
from .wandering import verification_log, wandering_cell

COMMANDS = (
    "validate", "expand", "compose", "reduce", "canonical", "order",
    "wandering", "witness", "minimality", "nig-demo", "dot", "enumerate",
)


class UsageError(Exception):
    pass


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def load_system(source: str) -> ReplacementSystem:
    if source in BUILTIN_NAMES:
        return builtin(source)
    return parse_system(_read(source))


def _cells(text: str):
    return [parse_address(a) for a in text.replace(",", " ").split()]


def _require(args, *names):
    missing = [n for n in names if getattr(args, n.replace("-", "_")) is None]
    if missing:
        raise UsageError(f"{args.command} requires " + ", ".join("--" + n for n in missing))


# --- command implementations: each returns (text, json-able object) --------------------

def cmd_validate(args, sys_):
    report = validate_expanding(sys_)
    ends = sorted(f"{s.color}:{s.end}" for s in extreme_ends(sys_))
    verts = extreme_vertices(sys_)
    lines = ["expanding: " + ("yes" if not report else "no")]
    lines += [f"  {r}" for r in report]
    lines.append("extreme ends: " + (" ".join(ends) or "none"))
    lines.append("extreme base vertices: " + (" ".join(verts) or "none"))
    obj = {"expanding": not report, "violations": report, "extreme_ends": ends, "extreme_vertices": verts}
    return "\n".join(lines) + "\n", obj, (0 if not report else 1)


def _expansion(args, sys_):
    if args.cells is not None:
        return expansion_containing(sys_, _cells(args.cells))
    return full_expansion(sys_, args.depth if args.depth is not None else 0)


def cmd_expand(args, sys_):
    E = _expansion(args, sys_)
    g = expansion_graph(sys_, E)
    lines = [f"carets {len(E)}", "leaves"]
    lines += ["  " + format_address(l) for l in E.leaves]
    lines.append(f"vertices {len(g.vertices)}")
    lines.append("edges")
    lines += [f"  {format_address(e.address)} {e.color}" for e in g.edges]
    obj = {
        "carets": len(E),
        "leaves": [format_address(l) for l in E.leaves],
        "vertices": len(g.vertices),
    }
    return "\n".join(lines) + "\n", obj, 0


def cmd_compose(args, sys_):
    _require(args, "left", "right")
    g = parse_element(sys_, _read(args.left))
    h = parse_element(sys_, _read(args.right))
    d = compose(g, h).diagram
    return serialize_diagram(d), diagram_json(d), 0


def cmd_reduce(args, sys_):
    _require(args, "element")
    d = reduce(parse_diagram(sys_, _read(args.element)))
    return serialize_diagram(d), diagram_json(d), 0


def cmd_canonical(args, sys_):
    _require(args, "element")
    c = canonicalize(parse_element(sys_, _read(args.element)))
    rep = canonical_report(c)
    text = serialize_diagram(c.diagram)
    text += f"imbalance {rep['imbalance'][0]} {rep['imbalance'][1]}\n"
    text += "domain components " + (" ".join(rep["domain_components"]) or "none") + "\n"
    text += "range components " + (" ".join(rep["range_components"]) or "none") + "\n"
    return text, {"diagram": diagram_json(c.diagram), **rep}, 0


def cmd_order(args, sys_):
    _require(args, "element")
    g = parse_element(sys_, _read(args.element))
    if is_periodic(g):
        n = order(g)
        return f"periodic, order {n}\n", {"periodic": True, "order": n}, 0
    return "non-periodic\n", {"periodic": False, "order": None}, 0


def cmd_wandering(args, sys_):
    _require(args, "element")
    g = parse_element(sys_, _read(args.element))
    M = args.max_power if args.max_power is not None else 20
    cert = wandering_cell(g)
    log = verification_log(g, cert, M)
    ok = all(st != "fail" for _, st in log)
    d = cert.as_dict()
    d["verified_to"] = M if ok else 0
    lines = [f"{k} {v}" for k, v in d.items() if v is not None and k != "set"]
    lines.insert(1, "set " + " ".join(d["set"]))
    lines += [f"power {m}: {st}" for m, st in log]
    lines.append("verified: " + ("yes" if ok else "no"))
    obj = {"certificate": d, "log": [[m, st] for m, st in log], "verified": ok}
    return "\n".join(lines) + "\n", obj, (0 if ok else 1)


def cmd_witness(args, sys_):
    _require(args, "cells", "target")
    budget = args.budget if args.budget is not None else 4
    q = WitnessQuery(CellUnion(tuple(_cells(args.cells))), parse_address(args.target), budget)
    g = find_witness(sys_, q)
    if g is None:
        return f"not found within budget {budget}\n", {"found": False, "budget": budget}, 1
    return serialize_diagram(g.diagram), {"found": True, "diagram": diagram_json(g.diagram)}, 0


def cmd_minimality(args, sys_):
    _require(args, "elements")
    gens = parse_elements(sys_, _read(args.elements))
    rep = minimality_evidence(
        sys_, gens, args.depth if args.depth is not None else 2, args.steps if args.steps is not None else 6
    )
    d = rep.as_dict()
    lines = [f"depth {rep.depth} steps {rep.steps}"]
    for c in d["cells"]:
        lines.append(f"{c['start']}: reached {len(c['reached'])}/{len(rep.targets)}"
                     + ("" if not c["missing"] else " missing " + " ".join(c["missing"])))
    lines.append("full coverage: " + ("yes" if rep.full else "no"))
    return "\n".join(lines) + "\n", d, 0


def cmd_nig(args, sys_):
    _require(args, "elements")
    elements = parse_elements(sys_, _read(args.elements))
    cfg = NigConfig(
        sys_,
        parse_point(args.point or "t:(1.2)"),
        tuple(elements),
        word_bound=args.word_bound if args.word_bound is not None else 4,
        witness_budget=args.budget if args.budget is not None else 6,
        wander_bound=args.max_power if args.max_power is not None else 20,
    )
    res = nig_report(cfg)
    lines = ["cells " + " ".join(format_address(c) for c in res.cells)]
    for i, u in enumerate(res.I_complements, 1):
        lines.append(f"complement of I_{i}: " + " ".join(format_address(a) for a in u))
    for i, c in enumerate(res.conjugators, 1):
        lines.append(f"conjugator {i}: target {format_address(c.target)}, "
                     f"{len(c.gamma.diagram.domain.leaves)} leaves")
    lines.append("avoided cell " + format_address(res.avoided_cell))
    for e in res.pingpong_log:
        lines.append(f"{format_word(e.word)} -> {e.point} I_{e.index} " + ("ok" if e.ok else "FAIL " + e.reason))
    lines.append("passed: " + ("yes" if res.passed else "no"))
    return "\n".join(lines) + "\n", res.as_dict(), (0 if res.passed else 1)


def cmd_dot(args, sys_):
    if args.element is not None:
        text = diagram_dot(parse_diagram(sys_, _read(args.element)))
    else:
        text = expansion_dot(sys_, _expansion(args, sys_))
    return text, {"dot": text}, 0


def cmd_enumerate(args, sys_):
    budget = args.budget if args.budget is not None else 2
    if args.sample is not None:
        rng = random.Random(args.seed if args.seed is not None else 0)
        elems = [random_element(sys_, rng, budget) for _ in range(args.sample)]
    else:
        elems = enumerate_elements(sys_, budget)
    text = "---\n".join(serialize_diagram(g.diagram) for g in elems)
    return text, {"count": len(elems), "elements": [diagram_json(g.diagram) for g in elems]}, 0


HANDLERS = {
    "validate": cmd_validate, "expand": cmd_expand, "compose": cmd_compose, "reduce": cmd_reduce,
    "canonical": cmd_canonical, "order": cmd_order, "wandering": cmd_wandering,
    "witness": cmd_witness, "minimality": cmd_minimality, "nig-demo": cmd_nig,
    "dot": cmd_dot, "enumerate": cmd_enumerate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rearrange", description="Rearrangement groups of replacement systems.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--system", required=True, help="built-in name or system file")
    parser.add_argument("--element", help="diagram file")
    parser.add_argument("--elements", help="file of diagrams separated by ---")
    parser.add_argument("--left", help="first factor (applied first)")
    parser.add_argument("--right", help="second factor")
    parser.add_argument("--cells", help="addresses, comma or space separated")
    parser.add_argument("--target", help="target cell address")
    parser.add_argument("--point", help="lasso point such as t:(1.2)")
    parser.add_argument("--budget", type=int, help="caret budget per side")
    parser.add_argument("--max-power", type=int, help="verification bound on powers")
    parser.add_argument("--word-bound", type=int)
    parser.add_argument("--depth", type=int)
    parser.add_argument("--steps", type=int)
    parser.add_argument("--sample", type=int, help="draw this many random elements instead of enumerating")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--format", choices=("text", "json"), default="text")
    parser.add_argument("--out", help="write output here instead of stdout")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        sys_ = load_system(args.system)
        text, obj, code = HANDLERS[args.command](args, sys_)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"rearrange: error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError, OSError, RuntimeError) as exc:
        print(f"rearrange: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    if args.format == "json":
        text = json.dumps({"command": args.command, "exit": code, "result": obj}, indent=2, sort_keys=True) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())

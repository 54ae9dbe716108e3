"""Command-line front end: graph files, sequence literals, DOT and JSON.

Exit codes: 0 success or confirmed, 1 refuted or unsuccessful where
success was asked for, 2 usage or parse error.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path
from typing import Optional, Sequence

from .classify import classify
from .core import Call, CallSequence, GossipError, GossipGraph, apply_sequence, bits, make_initial
from .explorer import (
    decide_success,
    enumerate_extension,
    random_run,
    shortest_successful_sequence,
)
from .protocol import PROTOCOLS, as_condition, format_condition, parse_condition, named_protocol, validate_sequence
from .verifier import DEFAULT_CAP, DEFAULT_RUNS, DEFAULT_SEED, THEOREMS, builtin_graph, check_theorem

EXIT_OK, EXIT_REFUTED, EXIT_USAGE = 0, 1, 2

NAME = re.compile(r"[a-z][a-z0-9]*\Z")


class GraphFileError(GossipError):
    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


# -- graph files ---------------------------------------------------------------


def parse_graph_file(text: str) -> GossipGraph:
    """``NAME: SUCC ...`` per agent; agents are indexed in declaration order."""
    decls: list[tuple[int, str, list[str]]] = []
    seen: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" not in line:
            raise GraphFileError(lineno, f"expected 'NAME: SUCCESSORS', got {line!r}")
        head, tail = line.split(":", 1)
        name = head.strip()
        if not NAME.match(name):
            raise GraphFileError(lineno, f"bad agent name {name!r}")
        if name in seen:
            raise GraphFileError(lineno, f"agent {name!r} already declared on line {seen[name]}")
        succ = tail.split()
        for s in succ:
            if not NAME.match(s):
                raise GraphFileError(lineno, f"bad agent name {s!r}")
        seen[name] = lineno
        decls.append((lineno, name, succ))
    if not decls:
        raise GraphFileError(0, "no agents declared")
    index = {name: i for i, (_, name, _) in enumerate(decls)}
    edges = []
    for lineno, name, succ in decls:
        for s in succ:
            if s not in index:
                raise GraphFileError(lineno, f"successor {s!r} is not declared")
            edges.append((index[name], index[s]))
    return make_initial(len(decls), edges, [name for _, name, _ in decls])


def format_graph_file(G: GossipGraph) -> str:
    return str(G) + "\n"


def parse_sequence(text: str, G: GossipGraph) -> CallSequence:
    """``a>b;c>d`` or, when every name is one letter, ``ab;cd``."""
    index = {name: i for i, name in enumerate(G.names)}
    single = all(len(name) == 1 for name in G.names)
    calls = []
    for tok in text.replace(",", ";").split(";"):
        tok = tok.strip()
        if not tok:
            continue
        if ">" in tok:
            parts = [p.strip() for p in tok.split(">")]
            if len(parts) != 2:
                raise GossipError(f"bad call {tok!r}")
        elif single and len(tok) == 2:
            parts = [tok[0], tok[1]]
        else:
            raise GossipError(f"bad call {tok!r}; write caller>callee")
        for p in parts:
            if p not in index:
                raise GossipError(f"unknown agent {p!r} in call {tok!r}")
        x, y = index[parts[0]], index[parts[1]]
        if x == y:
            raise GossipError(f"agent {parts[0]!r} cannot call itself")
        calls.append(Call(x, y))
    return CallSequence(tuple(calls))


def export_dot(G: GossipGraph) -> str:
    """Numbers-only pairs dashed, pairs with the secret known solid; mutual
    solid pairs drawn once with both arrowheads; loops left out."""
    q = lambda s: f'"{s}"'
    lines = ["digraph gossip {", "  node [shape=circle];"]
    for x in G.agents:
        lines.append(f"  {q(G.names[x])};")
    N, S = G.N.rows, G.S.rows
    for x in G.agents:
        for y in bits(N[x]):
            if x == y:
                continue
            solid = bool(S[x] >> y & 1)
            mutual = solid and N[y] >> x & 1 and S[y] >> x & 1
            if mutual:
                if x < y:
                    lines.append(f"  {q(G.names[x])} -> {q(G.names[y])} [style=solid, dir=both];")
                continue
            style = "solid" if solid else "dashed"
            lines.append(f"  {q(G.names[x])} -> {q(G.names[y])} [style={style}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


# -- command plumbing ----------------------------------------------------------


class UsageError(Exception):
    pass


def load_graph(arg: str) -> GossipGraph:
    """A graph file path, or ``builtin:NAME`` for one of the built-in graphs."""
    if arg.startswith("builtin:"):
        return builtin_graph(arg[len("builtin:") :])
    path = Path(arg)
    if not path.is_file():
        raise UsageError(f"no such graph file: {arg}")
    return parse_graph_file(path.read_text())


def _condition(args):
    if getattr(args, "condition", None):
        return parse_condition(args.condition)
    if getattr(args, "protocol", None):
        return named_protocol(args.protocol)
    raise UsageError("give --protocol or --condition")


def _emit(obj) -> None:
    print(json.dumps(obj, indent=2, ensure_ascii=False))


def _fmt(seq: Optional[CallSequence], G: GossipGraph):
    return None if seq is None else seq.format(G.names)


def cmd_classify(args) -> int:
    G = load_graph(args.file)
    _emit(classify(G).to_dict(G.names))
    return EXIT_OK


def cmd_run(args) -> int:
    G = load_graph(args.file)
    cond = _condition(args)
    seq, outcome = random_run(G, cond, seed=args.seed, cap=args.cap)
    _emit(
        {
            "condition": format_condition(cond),
            "seed": args.seed,
            "cap": args.cap,
            "outcome": outcome,
            "length": len(seq),
            "sequence": _fmt(seq, G),
        }
    )
    return EXIT_OK


def cmd_check(args) -> int:
    G = load_graph(args.file)
    cond = _condition(args)
    seq = parse_sequence(args.sequence, G)
    report = validate_sequence(G, seq, cond)
    out = report.to_dict()
    out.update(condition=format_condition(cond), sequence=_fmt(seq, G))
    _emit(out)
    wanted = {
        "permitted": report.permitted,
        "successful": report.successful,
        "stuck": report.stuck,
        "maximal": report.maximal,
    }[args.expect]
    return EXIT_OK if wanted else EXIT_REFUTED


def cmd_search(args) -> int:
    G = load_graph(args.file)
    cond = _condition(args)
    base = {"condition": format_condition(cond), "mode": args.mode}
    if args.mode == "minlen":
        seq = shortest_successful_sequence(G, cond)
        base.update(min_success_length=None if seq is None else len(seq), witness=_fmt(seq, G))
        _emit(base)
        return EXIT_OK if seq is not None else EXIT_REFUTED
    res = decide_success(G, cond)
    base.update(res.to_dict(G.names))
    _emit(base)
    if args.mode == "strong":
        return EXIT_OK if res.strongly_successful else EXIT_REFUTED
    if args.mode == "weak":
        return EXIT_OK if res.weakly_successful else EXIT_REFUTED
    return EXIT_OK if res.stuck_witness is not None else EXIT_REFUTED


def cmd_extension(args) -> int:
    G = load_graph(args.file)
    cond = _condition(args)
    ext = enumerate_extension(G, cond, args.max_len)
    rows = [
        {"sequence": s.format(G.names), "status": t}
        for s, t in sorted(ext.sequences.items(), key=lambda kv: (len(kv[0]), kv[0].pairs()))
    ]
    _emit(
        {
            "condition": format_condition(cond),
            "max_len": args.max_len,
            "count": len(rows),
            "successful": sum(r["status"] == "successful" for r in rows),
            "stuck": sum(r["status"] == "stuck" for r in rows),
            "sequences": rows,
        }
    )
    return EXIT_OK


def cmd_verify(args) -> int:
    report = check_theorem(
        args.theorem,
        args.agents,
        mod_iso=args.mod_iso,
        jobs=args.jobs,
        seed=args.seed,
        runs=args.runs,
        cap=args.cap,
        max_len=args.max_len,
    )
    _emit(report.to_dict())
    for c in report.counterexamples:
        print(f"# counterexample (predicate={c.predicate}, search={c.search})", file=sys.stderr)
        print(c.graph, file=sys.stderr)
    return EXIT_OK if report.confirmed else EXIT_REFUTED


def cmd_dot(args) -> int:
    G = load_graph(args.file)
    if args.after:
        G = apply_sequence(G, parse_sequence(args.after, G))
    sys.stdout.write(export_dot(G))
    return EXIT_OK


def _int(text: str) -> int:
    return int(text, 0)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dyngossip", description="Dynamic gossip engine and model checker.")
    sub = p.add_subparsers(dest="command", required=True)

    def with_protocol(sp):
        g = sp.add_mutually_exclusive_group()
        g.add_argument("--protocol", "-p", choices=sorted(PROTOCOLS), type=str.lower)
        g.add_argument("--condition", "-c", help="condition text, e.g. 'not knows-secret'")

    sp = sub.add_parser("classify", help="structural classification as JSON")
    sp.add_argument("file")
    sp.set_defaults(func=cmd_classify)

    sp = sub.add_parser("run", help="one uniformly random execution")
    sp.add_argument("file")
    with_protocol(sp)
    sp.add_argument("--seed", type=_int, default=0)
    sp.add_argument("--cap", type=int, default=DEFAULT_CAP)
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("check", help="validate a call sequence")
    sp.add_argument("file")
    with_protocol(sp)
    sp.add_argument("--sequence", "-s", required=True)
    sp.add_argument("--expect", choices=["permitted", "successful", "stuck", "maximal"], default="permitted")
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("search", help="decide success; print witnesses")
    sp.add_argument("file")
    with_protocol(sp)
    sp.add_argument("--mode", choices=["weak", "strong", "stuck", "minlen"], default="weak")
    sp.set_defaults(func=cmd_search)

    sp = sub.add_parser("extension", help="list permitted sequences")
    sp.add_argument("file")
    with_protocol(sp)
    sp.add_argument("--max-len", type=int, default=None)
    sp.set_defaults(func=cmd_extension)

    sp = sub.add_parser("verify", help="exhaustive theorem check")
    sp.add_argument("--theorem", required=True, choices=list(THEOREMS))
    sp.add_argument("--agents", "-n", type=int, required=True)
    sp.add_argument("--mod-iso", action="store_true")
    sp.add_argument("--jobs", "-j", type=int, default=1)
    sp.add_argument("--seed", type=_int, default=DEFAULT_SEED)
    sp.add_argument("--runs", type=int, default=DEFAULT_RUNS)
    sp.add_argument("--cap", type=int, default=DEFAULT_CAP)
    sp.add_argument("--max-len", type=int, default=4, help="sequence bound for the hierarchy check")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("dot", help="Graphviz rendering")
    sp.add_argument("file")
    sp.add_argument("--after", help="apply this call sequence first")
    sp.set_defaults(func=cmd_dot)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    try:
        return args.func(args)
    except (UsageError, GossipError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

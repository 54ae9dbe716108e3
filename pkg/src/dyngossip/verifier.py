"""Exhaustive theorem checks over all small initial gossip graphs.

Every graph on n agents is identified by its bitmask over the n(n-1)
off-diagonal cells (see ``symmetry.off_diagonal_cells``).  A theorem check
compares a structural predicate from ``classify`` with a search verdict,
graph by graph, and records every disagreement.
"""

from __future__ import annotations

import re
import time
from dataclasses import dataclass, field
from multiprocessing import Pool
from typing import Iterator, Optional

import numpy as np

from . import fast
from .classify import classify
from .core import CallSequence, GossipError, GossipGraph, Relation, make_initial
from .explorer import random_fair_runs, strongly_successful, weakly_successful
from .protocol import in_extension, kernel, named_protocol
from .symmetry import canonical_form, graph_canonizer, graph_mask

__all__ = [
    "DEFAULT_SEED",
    "THEOREMS",
    "Counterexample",
    "VerificationReport",
    "builtin_graph",
    "builtin_names",
    "canonical_form",
    "check_hierarchy",
    "check_theorem",
    "enumerate_initial_graphs",
    "enumerate_masks",
    "graph_from_mask",
]

# The documented seed 0xD9N60551 is not a hex literal; the stray N is read as 0.
DEFAULT_SEED = 0xD9060551
DEFAULT_RUNS = 200
DEFAULT_CAP = 100_000

MAX_ENUM_AGENTS = 5


# -- enumeration -------------------------------------------------------------


def _row_tables(n: int):
    """Per agent x: map from its n-1 off-diagonal cell bits to its N row."""
    tables = []
    for x in range(n):
        others = [y for y in range(n) if y != x]
        t = []
        for local in range(1 << (n - 1)):
            r = 1 << x
            for j, y in enumerate(others):
                if local >> j & 1:
                    r |= 1 << y
            t.append(r)
        tables.append(t)
    return tables


_TABLES: dict[int, list] = {}


def mask_rows(n: int, mask: int) -> tuple[int, ...]:
    t = _TABLES.get(n)
    if t is None:
        t = _TABLES[n] = _row_tables(n)
    w = n - 1
    low = (1 << w) - 1
    return tuple(t[x][(mask >> (x * w)) & low] for x in range(n))


def graph_from_mask(n: int, mask: int) -> GossipGraph:
    return GossipGraph(n, Relation(n, mask_rows(n, mask)), Relation.identity(n))


def enumerate_masks(n: int, mod_iso: bool = False) -> Iterator[int]:
    """All graph bitmasks on n agents, or the canonical one per class."""
    if not 1 <= n <= MAX_ENUM_AGENTS:
        raise GossipError(f"enumeration supports 1 <= n <= {MAX_ENUM_AGENTS}, got {n}")
    total = 1 << (n * (n - 1))
    if not mod_iso:
        yield from range(total)
        return
    canon = graph_canonizer(n)
    step = 1 << 16
    for start in range(0, total, step):
        block = np.arange(start, min(total, start + step), dtype=np.int64)
        reps = block[canon.canon(block) == block]
        yield from reps.tolist()


def enumerate_initial_graphs(n: int, mod_iso: bool = False) -> Iterator[GossipGraph]:
    for m in enumerate_masks(n, mod_iso):
        yield graph_from_mask(n, m)


# -- built-in graphs ---------------------------------------------------------


def _named(spec: str) -> GossipGraph:
    """Build a graph from 'a>b c>b' style edge text over letters."""
    edges = [tuple(e.split(">")) for e in spec.split()]
    names = sorted({v for e in edges for v in e})
    idx = {v: i for i, v in enumerate(names)}
    return make_initial(len(names), [(idx[a], idx[b]) for a, b in edges], names)


def _both(pairs: str) -> str:
    return " ".join(f"{p[0]}>{p[1]} {p[1]}>{p[0]}" for p in pairs.split())


_BUILTIN = {
    "line3": "a>b b>c",
    "bush3": "a>b c>b",
    "doublebush5": "a>b c>b c>d e>d",
    "pentagon": _both("ab bc cd de ea"),
    "sun-a": _both("ab ac ad bd bc cd") + " a>f c>f b>e",
    "sun-b": "a>c b>a c>b " + _both("db") + " a>f c>f b>e",
    "tree6": "b>a c>a d>b e>d f>d",
}


def builtin_names() -> list[str]:
    return sorted(_BUILTIN) + ["complete(n)"]


def complete_graph(n: int) -> GossipGraph:
    return make_initial(n, [(x, y) for x in range(n) for y in range(n) if x != y])


def builtin_graph(name: str) -> GossipGraph:
    key = name.strip().lower()
    if key in _BUILTIN:
        return _named(_BUILTIN[key])
    m = re.fullmatch(r"(?:complete\(?(\d+)\)?|k(\d+))", key)
    if m:
        n = int(m.group(1) or m.group(2))
        if not 1 <= n <= 64:
            raise GossipError("complete graphs need 1 <= n <= 64")
        return complete_graph(n)
    raise GossipError(f"unknown built-in graph {name!r}; known: {', '.join(builtin_names())}")


# Added edge(s) on doublebush5 and a quoted LNS sequence that makes the
# augmented graph successful.
AUGMENTED_DOUBLE_BUSHES = [
    ("ba", "cb;ab;cd;ed;ad;bd;ca;ea"),
    ("bc", "ab;cd;ed;db;cb;ac;eb"),
    ("ac", "ab;cd;ed;db;cb;ac;eb"),
    ("ca", "ab;cd;ed;da;ca;eb"),
    ("ad", "ab;cd;ed;ad;bd;cb;eb"),
    ("da", "ab;cd;ed;da;ca;eb"),
    ("bd", "ab;cd;ed;ad;bd;cb;eb"),
    ("ae", "ab;ae;be;cb;bd;ad;cd;ed"),
]


def augmented_double_bush(edge: str) -> GossipGraph:
    G = builtin_graph("doublebush5")
    idx = {v: i for i, v in enumerate(G.names)}
    return G.with_edges([(idx[edge[0]], idx[edge[1]])])


# -- theorems ----------------------------------------------------------------


@dataclass(frozen=True)
class Theorem:
    id: str
    protocol: str
    mode: str  # strong | weak | fair
    predicate: str  # weakly-connected | sun | lns-weak-class
    statement: str


THEOREMS = {
    t.id: t
    for t in [
        Theorem("co-strong", "co", "strong", "weakly-connected", "CO strongly successful iff weakly connected"),
        Theorem("wco-strong", "wco", "strong", "weakly-connected", "wCO strongly successful iff weakly connected"),
        Theorem("lns-strong", "lns", "strong", "sun", "LNS strongly successful iff sun"),
        Theorem(
            "lns-weak",
            "lns",
            "weak",
            "lns-weak-class",
            "LNS weakly successful iff weakly connected and neither bush nor double bush",
        ),
        Theorem("any-fair-empirical", "any", "fair", "weakly-connected", "ANY fairly successful iff weakly connected"),
        Theorem("tok-fair-empirical", "tok", "fair", "weakly-connected", "TOK fairly successful iff weakly connected"),
        Theorem("spi-fair-empirical", "spi", "fair", "weakly-connected", "SPI fairly successful iff weakly connected"),
        Theorem("hierarchy", "any", "hierarchy", "-", "LNS ⊆ CO ⊆ wCO ⊆ ANY and ¬LNS ∩ SPI ∩ TOK = ∅"),
    ]
}


@dataclass(frozen=True)
class Counterexample:
    graph: str
    predicate: object
    search: object

    def to_dict(self) -> dict:
        return {"graph": self.graph, "predicate": self.predicate, "search": self.search}


@dataclass
class VerificationReport:
    theorem: str
    n: int
    graphs_checked: int
    counterexamples: list[Counterexample]
    elapsed_ms: float
    mod_iso: bool = False
    details: dict = field(default_factory=dict)

    @property
    def confirmed(self) -> bool:
        return not self.counterexamples

    def to_dict(self) -> dict:
        return {
            "theorem": self.theorem,
            "n": self.n,
            "graphs_checked": self.graphs_checked,
            "counterexamples": [c.to_dict() for c in self.counterexamples],
            "elapsed_ms": round(self.elapsed_ms, 3),
            "mod_iso": self.mod_iso,
            "confirmed": self.confirmed,
            "details": self.details,
        }


def predicate_holds(name: str, G: GossipGraph) -> bool:
    c = classify(G)
    if name == "weakly-connected":
        return c.weakly_connected
    if name == "sun":
        return c.sun
    if name == "lns-weak-class":
        return c.weakly_connected and not c.bush and not c.double_bush
    raise GossipError(f"unknown predicate {name!r}")


def _graph_seed(seed: int, mask: int) -> int:
    """Per-graph stream so verdicts do not depend on how graphs are split across jobs."""
    return (seed + (mask + 1) * 0x9E3779B97F4A7C15) & ((1 << 64) - 1)


def search_verdict(th: Theorem, G: GossipGraph, seed: int, runs: int, cap: int, mask: int = 0):
    """(success verdict as bool, or None when undecided; printable search summary)."""
    cond = named_protocol(th.protocol)
    if th.mode == "fair" and G.n <= 2:
        # two agents: the fair theorems hold in their strong form
        mode = "strong"
    else:
        mode = th.mode
    if mode == "strong":
        if fast.supports(G):
            v, _ = fast.fast_kernel(cond).strong(G)
            text = ["strongly_successful", "stuck_reachable", "infinite_run_reachable"][v]
            return v == fast.STRONG, text
        ok = strongly_successful(G, cond)
        return ok, "strongly_successful" if ok else "not_strongly_successful"
    if mode == "weak":
        ok = fast.fast_kernel(cond).weak(G)[0] if fast.supports(G) else weakly_successful(G, cond)
        return ok, "weakly_successful" if ok else "unsuccessful"
    stats = random_fair_runs(G, cond, runs=runs, cap=cap, seed=_graph_seed(seed, mask), prune_doomed=True)
    summary = stats.to_dict()
    if stats.successes == stats.runs:
        return True, summary
    if stats.successes == 0:
        return False, summary
    return None, summary


def _check_chunk(args):
    tid, n, masks, seed, runs, cap = args
    th = THEOREMS[tid]
    cex = []
    positives = 0
    for m in masks:
        G = graph_from_mask(n, m)
        pred = predicate_holds(th.predicate, G)
        positives += pred
        ok, text = search_verdict(th, G, seed, runs, cap, m)
        if ok is None or ok != pred:
            cex.append((m, pred, text))
    return len(masks), positives, cex


def _chunks(masks: list[int], parts: int):
    size = max(1, -(-len(masks) // parts))
    return [masks[i : i + size] for i in range(0, len(masks), size)]


def check_theorem(
    theorem: str,
    n: int,
    mod_iso: bool = False,
    jobs: int = 1,
    seed: int = DEFAULT_SEED,
    runs: int = DEFAULT_RUNS,
    cap: int = DEFAULT_CAP,
    max_len: int = 4,
) -> VerificationReport:
    if theorem not in THEOREMS:
        raise GossipError(f"unknown theorem {theorem!r}; choose from {', '.join(THEOREMS)}")
    if theorem == "hierarchy":
        return check_hierarchy(n, max_len, mod_iso=mod_iso)
    t0 = time.perf_counter()
    masks = list(enumerate_masks(n, mod_iso))
    seed &= (1 << 64) - 1
    parts = _chunks(masks, max(1, jobs) * 8 if jobs > 1 else 1)
    work = [(theorem, n, p, seed, runs, cap) for p in parts]
    if jobs > 1 and len(parts) > 1:
        with Pool(jobs) as pool:
            results = pool.map(_check_chunk, work)
    else:
        results = [_check_chunk(w) for w in work]
    checked = sum(r[0] for r in results)
    positives = sum(r[1] for r in results)
    cex = [
        Counterexample(str(graph_from_mask(n, m)), pred, text) for r in results for (m, pred, text) in r[2]
    ]
    th = THEOREMS[theorem]
    details = {
        "statement": th.statement,
        "protocol": th.protocol,
        "mode": th.mode,
        "predicate": th.predicate,
        "predicate_true": positives,
        "basis": "empirical" if th.mode == "fair" and n > 2 else "exhaustive",
    }
    if th.mode == "fair":
        details.update(seed=seed, runs=runs, cap=cap)
    return VerificationReport(theorem, n, checked, cex, (time.perf_counter() - t0) * 1000, mod_iso, details)


# -- extension hierarchy -------------------------------------------------------

HIERARCHY_PROTOCOLS = ("any", "tok", "spi", "co", "wco", "lns")

# Representative sequences on line3 and the protocols whose extension holds them.
PLACEMENTS = [
    ("ab;ba", {"any", "tok", "wco"}),
    ("ab;ab;ba", {"any"}),
    ("ab;bc;ac", {"any", "wco", "co", "lns"}),
    ("ab;ac;cb", {"any", "wco", "co"}),
    ("ab;bc;ba", {"any", "wco"}),
]


def membership(G: GossipGraph, seq: CallSequence) -> frozenset[str]:
    return frozenset(p for p in HIERARCHY_PROTOCOLS if in_extension(G, seq, p))


def _hierarchy_violations(G: GossipGraph, max_len: int):
    """DFS over ANY sequences carrying each protocol's state; yields (rule, sequence)."""
    ks = {p: kernel(named_protocol(p)) for p in HIERARCHY_PROTOCOLS}
    k_any = ks["any"]
    count = 0
    stack = [(k_any.initial(G), {p: ks[p].initial(G) for p in HIERARCHY_PROTOCOLS if p != "any"}, ())]
    while stack:
        st, states, calls = stack.pop()
        count += 1
        inside = set(states)
        if "lns" in inside and "co" not in inside:
            yield "LNS ⊆ CO", calls
        if "co" in inside and "wco" not in inside:
            yield "CO ⊆ wCO", calls
        if "lns" not in inside and "spi" in inside and "tok" in inside:
            yield "¬LNS ∩ SPI ∩ TOK = ∅", calls
        if len(calls) >= max_len:
            continue
        for x, y in k_any.permitted(st):
            nxt = {p: ks[p].apply(s, x, y) for p, s in states.items() if ks[p].allowed(s, x, y)}
            stack.append((k_any.apply(st, x, y), nxt, calls + ((x, y),)))
    yield None, count


def check_hierarchy(n: int, max_len: int = 4, mod_iso: bool = False) -> VerificationReport:
    t0 = time.perf_counter()
    cex = []
    graphs = sequences = 0
    for m in enumerate_masks(n, mod_iso):
        G = graph_from_mask(n, m)
        graphs += 1
        for rule, calls in _hierarchy_violations(G, max_len):
            if rule is None:
                sequences += calls
            else:
                cex.append(Counterexample(str(G), rule, CallSequence.of(calls).format(G.names)))
    L3 = builtin_graph("line3")
    placements = {}
    for text, expected in PLACEMENTS:
        seq = _parse_letters(text, L3)
        got = membership(L3, seq)
        placements[text] = sorted(got)
        if got != expected:
            cex.append(Counterexample(str(L3), f"placement in {sorted(expected)}", {text: sorted(got)}))
    details = {"max_len": max_len, "sequences_checked": sequences, "placements": placements}
    return VerificationReport("hierarchy", n, graphs, cex, (time.perf_counter() - t0) * 1000, mod_iso, details)


def _parse_letters(text: str, G: GossipGraph) -> CallSequence:
    idx = {v: i for i, v in enumerate(G.names)}
    return CallSequence.of((idx[t[0]], idx[t[1]]) for t in text.split(";") if t)

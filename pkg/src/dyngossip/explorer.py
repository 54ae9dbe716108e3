"""Searches over the abstract state space of a protocol on one graph.

An abstract state is the graph plus exactly the memory the condition
reads (see ``protocol.Kernel``).  Every condition atom is a function of
that tuple, so two histories reaching the same abstract state have the
same futures; this is what makes memoised search and cycle detection
sound.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Optional

from . import fast
from .classify import tree_root
from .core import (
    Call,
    CallSequence,
    GossipError,
    GossipGraph,
    Relation,
    apply_sequence,
    bits,
    full_mask,
)
from .fast import SplitMix64
from .symmetry import MAX_ORBIT_AGENTS, StateOrbits, automorphisms
from .protocol import as_condition, is_complete_raw, kernel, named_protocol, validate_sequence

STRONG = "strongly_successful"
WEAK_ONLY = "weakly_successful_only"
UNSUCCESSFUL = "unsuccessful"


def _seq(pairs) -> CallSequence:
    return CallSequence(tuple(Call(x, y) for x, y in pairs))


@dataclass(frozen=True)
class SearchResult:
    verdict: str
    witness: Optional[CallSequence] = None
    stuck_witness: Optional[CallSequence] = None
    infinite_witness: Optional[tuple[CallSequence, CallSequence]] = None
    states_visited: int = 0

    @property
    def strongly_successful(self) -> bool:
        return self.verdict == STRONG

    @property
    def weakly_successful(self) -> bool:
        return self.verdict != UNSUCCESSFUL

    def to_dict(self, names=None) -> dict:
        f = lambda s: None if s is None else s.format(names)
        inf = self.infinite_witness
        return {
            "verdict": self.verdict,
            "witness": f(self.witness),
            "stuck_witness": f(self.stuck_witness),
            "infinite_witness": None if inf is None else {"stem": f(inf[0]), "cycle": f(inf[1])},
            "states_visited": self.states_visited,
        }


def decide_success(G: GossipGraph, cond) -> SearchResult:
    """Full depth-first exploration with first-found witnesses.

    Children are visited in (caller, callee) order.  A child that is
    still on the DFS stack closes a cycle, i.e. an infinite permitted
    maximal sequence.
    """
    k = kernel(as_condition(cond))
    root = k.initial(G)
    color = {root: 0}  # depth while on stack, -1 when finished
    path: list[tuple[int, int]] = []
    success = stuck = infinite = None

    def arrive(st):
        nonlocal success, stuck
        perm = k.permitted(st)
        if not perm:
            if is_complete_raw(st):
                if success is None:
                    success = list(path)
            elif stuck is None:
                stuck = list(path)
        return iter(perm)

    stack = [(root, arrive(root))]
    while stack:
        st, it = stack[-1]
        nxt = next(it, None)
        if nxt is None:
            color[st] = -1
            stack.pop()
            if path:
                path.pop()
            continue
        child = k.apply(st, *nxt)
        c = color.get(child)
        if c is None:
            color[child] = len(stack)
            path.append(nxt)
            stack.append((child, arrive(child)))
        elif c >= 0 and infinite is None:
            infinite = (list(path[:c]), list(path[c:]) + [nxt])

    if stuck is None and infinite is None:
        verdict = STRONG
    elif success is not None:
        verdict = WEAK_ONLY
    else:
        verdict = UNSUCCESSFUL
    return SearchResult(
        verdict,
        witness=None if success is None else _seq(success),
        stuck_witness=None if stuck is None else _seq(stuck),
        infinite_witness=None if infinite is None else (_seq(infinite[0]), _seq(infinite[1])),
        states_visited=len(color),
    )


def strongly_successful(G: GossipGraph, cond) -> bool:
    """Stops at the first stuck state or cycle."""
    k = kernel(as_condition(cond))
    root = k.initial(G)
    if k.terminating:
        # acyclic state graph: a finished-set suffices
        seen = {root}
        todo = [root]
        while todo:
            st = todo.pop()
            perm = k.permitted(st)
            if not perm:
                if not is_complete_raw(st):
                    return False
                continue
            for x, y in perm:
                child = k.apply(st, x, y)
                if child not in seen:
                    seen.add(child)
                    todo.append(child)
        return True
    color = {root: True}
    perm = k.permitted(root)
    if not perm:
        return is_complete_raw(root)
    stack = [(root, iter(perm))]
    while stack:
        st, it = stack[-1]
        nxt = next(it, None)
        if nxt is None:
            color[st] = False
            stack.pop()
            continue
        child = k.apply(st, *nxt)
        c = color.get(child)
        if c is None:
            perm = k.permitted(child)
            if not perm:
                if not is_complete_raw(child):
                    return False
                color[child] = False
                continue
            color[child] = True
            stack.append((child, iter(perm)))
        elif c:
            return False
    return True


def successful_sequence(G: GossipGraph, cond) -> Optional[CallSequence]:
    """Some successful permitted sequence (DFS order), or None."""
    k = kernel(as_condition(cond))
    root = k.initial(G)
    if is_complete_raw(root):
        return CallSequence()
    seen = {root}
    stack = [(root, iter(k.permitted(root)))]
    path: list[tuple[int, int]] = []
    while stack:
        st, it = stack[-1]
        nxt = next(it, None)
        if nxt is None:
            stack.pop()
            if path:
                path.pop()
            continue
        child = k.apply(st, *nxt)
        if child in seen:
            continue
        seen.add(child)
        path.append(nxt)
        if is_complete_raw(child):
            return _seq(path)
        stack.append((child, iter(k.permitted(child))))
    return None


def weakly_successful(G: GossipGraph, cond) -> bool:
    return successful_sequence(G, cond) is not None


def reachable_states(G: GossipGraph, cond):
    """All abstract states reachable by permitted sequences."""
    k = kernel(as_condition(cond))
    root = k.initial(G)
    seen = {root}
    todo = [root]
    while todo:
        st = todo.pop()
        for x, y in k.permitted(st):
            child = k.apply(st, x, y)
            if child not in seen:
                seen.add(child)
                todo.append(child)
    return seen


# -- shortest runs ----------------------------------------------------------


def shortest_successful_sequence(G: GossipGraph, cond) -> Optional[CallSequence]:
    """Breadth-first search; the goal test is applied when a call is generated.

    For memoryless conditions the frontier is reduced modulo the
    automorphisms of G: a relabelling that fixes G maps permitted runs to
    permitted runs of the same length, so one state per orbit suffices.
    """
    k = kernel(as_condition(cond))
    root = k.initial(G)
    if is_complete_raw(root):
        return CallSequence()
    n = G.n
    full = full_mask(n)
    orbits = None
    if k.memoryless and 3 <= n <= MAX_ORBIT_AGENTS:
        perms = automorphisms(G)
        if len(perms) > 1:
            orbits = StateOrbits(n, perms)
    parent = {root: None}
    seen = None if orbits is None else set(orbits.keys([root]))
    frontier = [root]
    while frontier:
        children = []
        for st in frontier:
            S = st[1]
            lacking = 0
            for i in range(n):
                if S[i] != full:
                    lacking |= 1 << i
            tried = set()
            for x, y in k.permitted(st):
                if k.memoryless:
                    key = (y, x) if y < x else (x, y)
                    if key in tried:
                        continue
                    tried.add(key)
                if lacking & ~(1 << x | 1 << y) == 0 and S[x] | S[y] == full:
                    calls = [(x, y)]
                    cur = st
                    while parent[cur] is not None:
                        cur, call = parent[cur]
                        calls.append(call)
                    return _seq(reversed(calls))
                child = k.apply(st, x, y)
                if child not in parent:
                    parent[child] = (st, (x, y))
                    children.append(child)
        if orbits is not None:
            fresh = []
            for child, key in zip(children, orbits.keys(children)):
                if key not in seen:
                    seen.add(key)
                    fresh.append(child)
            children = fresh
        frontier = children
    return None


def min_success_length(G: GossipGraph, cond) -> Optional[int]:
    seq = shortest_successful_sequence(G, cond)
    return None if seq is None else len(seq)


# -- extensions -------------------------------------------------------------


OPEN, SUCCESSFUL, STUCK, CAPPED = "open", "successful", "stuck", "capped"


@dataclass
class Extension:
    """Permitted sequences up to a length bound, each tagged with its status.

    ``open`` sequences have a permitted continuation; ``successful`` and
    ``stuck`` ones are maximal.
    """

    sequences: dict[CallSequence, str] = field(default_factory=dict)
    max_len: Optional[int] = None

    def __contains__(self, seq) -> bool:
        return seq in self.sequences

    def __len__(self) -> int:
        return len(self.sequences)

    def __iter__(self):
        return iter(self.sequences)

    def maximal(self) -> set[CallSequence]:
        return {s for s, t in self.sequences.items() if t != OPEN}

    def successful(self) -> set[CallSequence]:
        return {s for s, t in self.sequences.items() if t == SUCCESSFUL}

    def stuck(self) -> set[CallSequence]:
        return {s for s, t in self.sequences.items() if t == STUCK}


def enumerate_extension(G: GossipGraph, cond, max_len: Optional[int] = None) -> Extension:
    """All permitted sequences of length <= max_len (None: unbounded).

    Unbounded enumeration is refused unless every permitted call strictly
    grows the secret relation or the made-call set.
    """
    k = kernel(as_condition(cond))
    if max_len is None and not k.terminating:
        raise GossipError("extension may be infinite for this condition; pass max_len")
    ext = Extension(max_len=max_len)
    root = k.initial(G)
    stack = [(root, ())]
    while stack:
        st, calls = stack.pop()
        perm = k.permitted(st)
        seq = _seq(calls)
        if not perm:
            ext.sequences[seq] = SUCCESSFUL if is_complete_raw(st) else STUCK
            continue
        ext.sequences[seq] = OPEN
        if max_len is not None and len(calls) >= max_len:
            continue
        for x, y in reversed(perm):
            stack.append((k.apply(st, x, y), calls + ((x, y),)))
    return ext


# -- randomised fair runs ---------------------------------------------------

DEFAULT_CAP = 100_000


@dataclass(frozen=True)
class FairRunStats:
    runs: int
    successes: int
    max_calls_observed: int
    capped_runs: int
    seed: int
    stuck_runs: int = 0
    pruned_runs: int = 0

    @property
    def success_rate(self) -> float:
        return self.successes / self.runs if self.runs else 0.0

    def to_dict(self) -> dict:
        return {
            "runs": self.runs,
            "successes": self.successes,
            "max_calls_observed": self.max_calls_observed,
            "capped_runs": self.capped_runs,
            "stuck_runs": self.stuck_runs,
            "pruned_runs": self.pruned_runs,
            "seed": self.seed,
        }


def random_run(G: GossipGraph, cond, seed: int = 0, cap: int = DEFAULT_CAP):
    """One execution choosing uniformly among permitted calls.

    Returns ``(sequence, outcome)`` with outcome one of successful, stuck,
    capped.
    """
    k = kernel(as_condition(cond))
    rng = SplitMix64(seed)
    st = k.initial(G)
    calls = []
    while True:
        perm = k.permitted(st)
        if not perm:
            return _seq(calls), SUCCESSFUL if is_complete_raw(st) else STUCK
        if len(calls) >= cap:
            return _seq(calls), CAPPED
        x, y = perm[rng.below(len(perm))]
        calls.append((x, y))
        st = k.apply(st, x, y)


def random_fair_runs(
    G: GossipGraph,
    cond,
    runs: int = 200,
    cap: int = DEFAULT_CAP,
    seed: int = 0,
    prune_doomed: bool = False,
) -> FairRunStats:
    """Repeated uniform random executions drawn from one SplitMix64 stream.

    Uniform choice makes every call that stays permitted recur with
    probability one, so these runs sample fair executions.  With
    ``prune_doomed`` the runs are skipped (and counted as capped) when no
    complete state is reachable at all: no run could then succeed, and
    simulating each to the cap would only burn time.
    """
    if cap < 1:
        raise GossipError("cap must be at least 1")
    seed &= (1 << 64) - 1
    cond = as_condition(cond)
    if prune_doomed and not weakly_successful(G, cond):
        return FairRunStats(runs, 0, 0, runs, seed, pruned_runs=runs)
    if fast.supports(G):
        s, stuck, capped, longest = fast.fast_kernel(cond).random_runs(G, runs, cap, seed)
        return FairRunStats(runs, s, longest, capped, seed, stuck_runs=stuck)
    return _python_fair_runs(G, cond, runs, cap, seed)


def _python_fair_runs(G: GossipGraph, cond, runs: int, cap: int, seed: int) -> FairRunStats:
    k = kernel(as_condition(cond))
    rng = SplitMix64(seed)
    root = k.initial(G)
    permitted, apply = k.permitted, k.apply
    successes = capped = stuck = longest = 0
    for _ in range(runs):
        st = root
        steps = 0
        while True:
            perm = permitted(st)
            if not perm:
                if is_complete_raw(st):
                    successes += 1
                else:
                    stuck += 1
                break
            if steps >= cap:
                capped += 1
                break
            st = apply(st, *perm[rng.below(len(perm))])
            steps += 1
        longest = max(longest, steps)
    return FairRunStats(runs, successes, longest, capped, seed, stuck_runs=stuck)


# -- trees ------------------------------------------------------------------


def _lns_gap_rows(N, S):
    return [a & ~b for a, b in zip(N, S)]


def bottom_up_levels(G: GossipGraph) -> list[CallSequence]:
    """The levels τ(0), τ(1), ... of the bottom-up call sequence.

    Requires N∖S to be an in-tree.  Level k is a maximal LNS sequence of
    calls from the frontline B(k) to its successor set B'(k), taken in
    (caller, callee) order.
    """
    n = G.n
    gap = _lns_gap_rows(G.N.rows, G.S.rows)
    if tree_root(n, gap) is None:
        raise GossipError("bottom-up sequences need N∖S to be a tree")
    lns = kernel(named_protocol("lns"))
    st = (G.N.rows, G.S.rows, None, None, None)
    has_pred = 0
    for r in gap:
        has_pred |= r
    frontline = full_mask(n) & ~has_pred
    levels = []
    for _ in range(n + 1):
        N, S = st[0], st[1]
        succ = 0
        for b in bits(frontline):
            succ |= N[b] & ~S[b]
        tau = []
        while not is_complete_raw(st):
            N, S = st[0], st[1]
            call = None
            for x in bits(frontline):
                m = N[x] & ~S[x] & succ
                if m:
                    call = (x, (m & -m).bit_length() - 1)
                    break
            if call is None:
                break
            tau.append(call)
            st = lns.apply(st, *call)
        if not tau and succ & ~frontline == 0:
            break
        levels.append(_seq(tau))
        frontline |= succ
    return levels


def bottom_up_sequence(G: GossipGraph) -> CallSequence:
    out = CallSequence()
    for level in bottom_up_levels(G):
        out = out + level
    return out


def gather_sequence(G: GossipGraph) -> CallSequence:
    """Post-order LNS sequence on an initial tree.

    For each node v (children first): after each child subtree is done,
    every node of that subtree calls v.  Afterwards the root is an expert
    and every agent knows the root's secret, whatever the tree's shape.
    """
    n = G.n
    r = tree_root(n, G.N.rows)
    if r is None:
        raise GossipError("graph is not a tree")
    children = [[] for _ in range(n)]
    for x in range(n):
        for y in bits(G.N.rows[x]):
            if y != x:
                children[y].append(x)
    calls: list[tuple[int, int]] = []

    def visit(v) -> list[int]:
        members = [v]
        for u in children[v]:
            sub = visit(u)
            calls.extend((w, v) for w in sub)
            members.extend(sub)
        return members

    visit(r)
    return _seq(calls)


@dataclass(frozen=True)
class TreeSolution:
    sequence: CallSequence
    successful: bool
    root: int
    construction: str = "bottom-up"


def _root_gathered(G: GossipGraph, seq: CallSequence, r: int) -> bool:
    """Root expert and every agent knows the root's secret."""
    Gs = apply_sequence(G, seq)
    full = full_mask(G.n)
    return Gs.S.rows[r] == full and all(row >> r & 1 for row in Gs.S.rows)


def solve_tree(G: GossipGraph) -> TreeSolution:
    """LNS run on a tree making the root an expert; successful when the
    root has exactly one predecessor.

    The maximal bottom-up sequence is tried first.  On trees whose
    branches have unequal depth it can reach the root before the deeper
    secrets do and then get stuck; the post-order gather sequence is used
    instead in that case.
    """
    if not G.is_initial():
        raise GossipError("solve_tree needs an initial gossip graph")
    n = G.n
    r = tree_root(n, G.N.rows)
    if r is None:
        raise GossipError("graph is not a tree")
    preds = [y for y in range(n) if y != r and G.N.rows[y] >> r & 1]
    if len(preds) == 1:
        rp = preds[0]
        rest = [x for x in range(n) if x != r]
        sub = GossipGraph(n - 1, G.N.restrict(rest), Relation.identity(n - 1))
        tail = [(x, r) for x in range(n) if x not in (r, rp)]
        for how, build in (("bottom-up", bottom_up_sequence), ("gather", gather_sequence)):
            inner = [(rest[c.caller], rest[c.callee]) for c in build(sub)]
            seq = _seq(inner + [(rp, r)] + tail)
            report = validate_sequence(G, seq, "lns")
            if report.permitted and report.successful:
                break
    else:
        how, seq = "bottom-up", bottom_up_sequence(G)
        if not _root_gathered(G, seq, r):
            how, seq = "gather", gather_sequence(G)
        report = validate_sequence(G, seq, "lns")
    if not report.permitted:
        raise AssertionError(f"tree construction produced a non-LNS sequence {seq}")
    return TreeSolution(seq, report.successful, r, how)

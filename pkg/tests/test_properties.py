"""Invariant suites: each property runs on 1000 random cases and exhaustively
on every graph with at most three agents."""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import graph_and_sequence, graphs, random_graph, record
from dyngossip.classify import classify, weak_components
from dyngossip.core import Call, CallSequence, Relation, apply_call, bits, make_initial
from dyngossip.explorer import random_run
from dyngossip.protocol import ExecutionState, kernel, named_protocol, permitted_calls, step
from dyngossip.verifier import check_hierarchy, enumerate_initial_graphs, enumerate_masks, graph_from_mask, membership

pytestmark = pytest.mark.criterion(7)

EXHAUSTIVE_LEN = 4
CHAIN = ("lns", "co", "wco", "any")


def possible_runs(G, max_len):
    """(sequence, graph after it) for every possible sequence up to max_len."""
    stack = [(CallSequence(), G)]
    while stack:
        s, H = stack.pop()
        yield s, H
        if len(s) >= max_len:
            continue
        for x, y in H.edges():
            stack.append((s + CallSequence((Call(x, y),)), apply_call(H, Call(x, y))))


def small_population():
    for n in range(1, 4):
        for G in enumerate_initial_graphs(n):
            yield from ((G, s, H) for s, H in possible_runs(G, EXHAUSTIVE_LEN))


def closure(G):
    return G.N.transitive_closure()


# -- S^σ ⊆ N^σ, S^σ ∘ N ⊆ N^σ, components ------------------------------------------


def check_basic(G, H):
    assert H.S <= H.N
    assert H.S.compose(G.N) <= H.N
    assert weak_components(G.n, H.N.rows) == weak_components(G.n, G.N.rows)
    assert classify(G).component_count == len(set(weak_components(G.n, H.N.rows)))


@settings(max_examples=1000, deadline=None)
@given(graph_and_sequence(min_n=1, max_n=6, max_len=14))
def test_basic_invariants_random(case):
    G, s = case
    H = G
    for c in s:
        H = apply_call(H, c)
        check_basic(G, H)


def test_basic_invariants_exhaustive():
    count = 0
    for G, s, H in small_population():
        check_basic(G, H)
        count += 1
    assert count > 10_000
    record(7, True, f"S⊆N, S∘N⊆N, components: {count} exhaustive runs")


# -- LNS-maximal ⇒ S = N and S ∘ N* = S ---------------------------------------------


def terminal_lns_states(G):
    k = kernel(named_protocol("lns"))
    root = k.initial(G)
    seen, todo, out = {root}, [root], []
    while todo:
        st_ = todo.pop()
        perm = k.permitted(st_)
        if not perm:
            out.append(st_)
        for x, y in perm:
            nxt = k.apply(st_, x, y)
            if nxt not in seen:
                seen.add(nxt)
                todo.append(nxt)
    return out


def check_lns_terminal(G, N, S):
    n = G.n
    Nr, Sr = Relation(n, N), Relation(n, S)
    complete = all(r == (1 << n) - 1 for r in S)
    if not complete:
        assert Nr == Sr
    # with all secrets known N may still grow beyond S; S ∘ N* = S holds either way
    assert Sr.compose(closure(G)) == Sr


def test_lns_maximal_exhaustive_n4():
    states = 0
    for n in range(1, 5):
        for G in enumerate_initial_graphs(n):
            for st_ in terminal_lns_states(G):
                check_lns_terminal(G, st_[0], st_[1])
                states += 1
    record(7, True, f"LNS-maximal S=N, S∘N*=S: {states} terminal states, n≤4")


@settings(max_examples=1000, deadline=None)
@given(graphs(2, 7), st.integers(0, 2**64 - 1))
def test_lns_maximal_random(G, seed):
    s, outcome = random_run(G, "lns", seed=seed)
    H = G
    for c in s:
        H = apply_call(H, c)
    if outcome == "successful":
        assert H.is_complete()
    else:
        assert outcome == "stuck"
    check_lns_terminal(G, H.N.rows, H.S.rows)


# -- bush invariants --------------------------------------------------------------------


def check_bush_state(G, root, Nstar, N, S):
    n = G.n
    for x in range(n):
        gap = N[x] & ~S[x]
        size = bin(gap).count("1")
        knows_root = bool(S[x] >> root & 1)
        assert size == (0 if knows_root else 1)  # claim 1
        if size == 1:
            z = gap.bit_length() - 1
            assert Nstar.rows[x] >> z & 1  # claim 2
            for u in bits(Nstar.rows[z]):
                assert not S[x] >> u & 1
            for w in range(n):
                if Nstar.rows[x] >> w & 1 and G.N.rows[w] >> root & 1 and w != root:
                    for t in bits(N[x]):
                        if t != root:
                            assert Nstar.rows[t] >> w & 1  # claim 3


def bush_reachable_states(G):
    k = kernel(named_protocol("lns"))
    root = k.initial(G)
    seen, todo = {root}, [root]
    while todo:
        st_ = todo.pop()
        yield st_
        for x, y in k.permitted(st_):
            nxt = k.apply(st_, x, y)
            if nxt not in seen:
                seen.add(nxt)
                todo.append(nxt)


def test_bush_invariants_all_bushes_n5():
    bushes = states = 0
    for n in range(3, 6):
        for m in enumerate_masks(n):
            if bin(m).count("1") != n - 1:  # a bush is a tree
                continue
            G = graph_from_mask(n, m)
            c = classify(G)
            if not c.bush:
                continue
            bushes += 1
            Nstar = closure(G)
            for st_ in bush_reachable_states(G):
                check_bush_state(G, c.tree_root, Nstar, st_[0], st_[1])
                states += 1
    assert bushes > 0
    record(7, True, f"bush invariants: {bushes} bushes, {states} reachable states, n≤5")


def random_bush(rng, n):
    """In-tree rooted at agent 0 with at least two root predecessors."""
    while True:
        parent = [None] + [rng.randrange(i) for i in range(1, n)]
        if sum(p == 0 for p in parent) >= 2:
            break
    perm = list(range(n))
    rng.shuffle(perm)
    return make_initial(n, [(perm[i], perm[parent[i]]) for i in range(1, n)]), perm[0]


@settings(max_examples=1000, deadline=None)
@given(st.integers(3, 9), st.integers(0, 2**64 - 1))
def test_bush_invariants_random_runs(n, seed):
    rng = random.Random(seed)
    G, root = random_bush(rng, n)
    assert classify(G).bush
    Nstar = closure(G)
    k = kernel(named_protocol("lns"))
    st_ = k.initial(G)
    while True:
        check_bush_state(G, root, Nstar, st_[0], st_[1])
        perm = k.permitted(st_)
        if not perm:
            break
        st_ = k.apply(st_, *rng.choice(perm))
    assert not all(r == (1 << n) - 1 for r in st_[1])


# -- per-call refinement LNS ⇒ CO ⇒ wCO ⇒ ANY -------------------------------------


def check_refinement(state):
    sets = [set(permitted_calls(state, p)) for p in CHAIN]
    for small, big in zip(sets, sets[1:]):
        assert small <= big


def full_memory_states(G, s):
    st_ = ExecutionState.initial(G)
    yield st_
    for c in s:
        if st_.graph.is_complete():
            return
        st_ = step(st_, c, "any")
        yield st_


@settings(max_examples=1000, deadline=None)
@given(graph_and_sequence(min_n=2, max_n=6, max_len=12))
def test_refinement_random(case):
    G, s = case
    for st_ in full_memory_states(G, s):
        check_refinement(st_)


def test_refinement_exhaustive():
    count = 0
    for n in range(2, 4):
        for G in enumerate_initial_graphs(n):
            stack = [ExecutionState.initial(G)]
            while stack:
                st_ = stack.pop()
                check_refinement(st_)
                count += 1
                if len(st_.trace) < EXHAUSTIVE_LEN:
                    stack.extend(step(st_, c, "any") for c in permitted_calls(st_, "any"))
    record(7, True, f"per-call refinement: {count} exhaustive states")


# -- ¬LNS ∩ SPI ∩ TOK = ∅ and extension inclusions ------------------------------------


def check_membership(m):
    assert "lns" not in m or "co" in m
    assert "co" not in m or "wco" in m
    assert "wco" not in m or "any" in m
    assert not ({"spi", "tok"} <= m and "lns" not in m)


@settings(max_examples=1000, deadline=None)
@given(graphs(2, 5), st.integers(0, 2**64 - 1), st.integers(0, 6))
def test_hierarchy_random(G, seed, length):
    rng = random.Random(seed)
    st_ = ExecutionState.initial(G)
    calls = []
    for _ in range(length):
        perm = permitted_calls(st_, "any")
        if not perm:
            break
        c = rng.choice(perm)
        calls.append(c)
        st_ = step(st_, c, "any")
    check_membership(membership(G, CallSequence(tuple(calls))))


def test_hierarchy_exhaustive_n3():
    r = check_hierarchy(3, max_len=4)
    ok = r.confirmed
    record(7, ok, f"hierarchy: {r.details['sequences_checked']} sequences, n=3, length≤4, {len(r.counterexamples)} violations")
    assert ok, r.to_dict()

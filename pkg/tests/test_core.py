import random
from collections import Counter

import pytest
from hypothesis import given, settings

from conftest import graph_and_sequence, random_graph, seq
from dyngossip.core import (
    Call,
    CallSequence,
    GossipError,
    GossipGraph,
    ImpossibleCall,
    Relation,
    agent_name,
    apply_call,
    apply_sequence,
    experts,
    is_possible,
    local_history,
    make_initial,
)
from dyngossip.verifier import builtin_graph


def test_make_initial_line(L3):
    assert L3.N.row(0) == {0, 1}
    assert L3.S.row(0) == {0}
    assert L3.is_initial() and not L3.is_complete()


def test_single_agent_is_complete():
    assert make_initial(1).is_complete()


def test_complete_graph_relations():
    K4 = builtin_graph("complete(4)")
    assert K4.N == Relation.complete(4)
    assert K4.S == Relation.identity(4)


def test_out_of_range_edge():
    with pytest.raises(GossipError):
        make_initial(3, [(0, 3)])


def test_self_loops_are_redundant():
    assert make_initial(2, [(0, 0)]) == make_initial(2)


def test_self_call_rejected():
    with pytest.raises(GossipError):
        Call(1, 1)


def test_identity_required():
    with pytest.raises(GossipError):
        GossipGraph(2, Relation(2, (1, 0)), Relation.identity(2))


def test_agent_names():
    assert [agent_name(i) for i in (0, 1, 25, 26, 27, 52)] == ["a", "b", "z", "a1", "b1", "a2"]


def test_call_bc_on_line(L3):
    G = apply_call(L3, Call(1, 2))
    assert G.N.row(1) == G.N.row(2) == {1, 2}
    assert G.S.row(1) == G.S.row(2) == {1, 2}
    assert G.N.row(0) == {0, 1} and G.S.row(0) == {0}


def test_two_agents_one_call():
    G = apply_call(make_initial(2, [(0, 1), (1, 0)]), Call(0, 1))
    assert experts(G) == {0, 1}


def test_impossible_call(L3):
    assert not is_possible(L3, Call(0, 2))
    assert is_possible(L3, Call(0, 1))
    with pytest.raises(ImpossibleCall):
        apply_call(L3, Call(0, 2))


def test_apply_sequence_reports_index(L3):
    with pytest.raises(ImpossibleCall) as e:
        apply_sequence(L3, seq(L3, "ab;ca"))
    assert e.value.index == 2


def test_stuck_run_state(L3):
    G = apply_sequence(L3, seq(L3, "bc;ab"))
    assert experts(G) == {0, 1}
    assert G.S.row(2) == {1, 2} and 0 not in G.N.row(2)


def test_empty_sequence(L3):
    assert apply_sequence(L3, CallSequence()) == L3


def test_success_run(L3):
    assert apply_sequence(L3, seq(L3, "ab;bc;ac")).is_complete()


def test_experts_initial():
    assert experts(make_initial(3, [(0, 1)])) == frozenset()


def test_k4_four_calls():
    K4 = builtin_graph("complete(4)")
    assert experts(apply_sequence(K4, seq(K4, "ab;cd;ac;bd"))) == {0, 1, 2, 3}


def test_local_history():
    s = CallSequence.of([(0, 1), (2, 3), (0, 2)])
    assert local_history(s, 0) == CallSequence.of([(0, 1), (0, 2)])
    assert local_history(s, 3) == CallSequence.of([(2, 3)])


def test_sequence_ops():
    s = CallSequence.of([(0, 1), (1, 2)])
    assert s.prefix(1).is_prefix_of(s)
    assert (s + s)[2:] == s
    assert str(CallSequence()) == "ε"
    assert s.format() == "ab;bc"
    assert Call(0, 1).format(["x1", "y"]) == "x1>y"


def test_relation_algebra():
    R = Relation.from_pairs(3, [(0, 1), (1, 2)]) | Relation.identity(3)
    assert (0, 2) in R.transitive_closure()
    assert R.converse() == Relation.from_pairs(3, [(1, 0), (2, 1), (0, 0), (1, 1), (2, 2)])
    assert R.compose(R) == R.transitive_closure()
    assert (R - Relation.identity(3)) & R == Relation.from_pairs(3, [(0, 1), (1, 2)])
    assert R.restrict([2, 1]).rows == (1, 3)


def _prop1_oracle(G, x, y):
    """N ∪ {(x,y),(y,x)} ∘ N, computed pairwise; same for S."""

    def upd(R):
        pairs = set(R)
        for a, b in ((x, y), (y, x)):
            for u, v in R:
                if u == b:
                    pairs.add((a, v))
        return Relation.from_pairs(G.n, pairs)

    return upd(G.N), upd(G.S)


@settings(max_examples=1000, deadline=None)
@given(graph_and_sequence(min_n=2, max_n=4, max_len=6))
def test_apply_call_matches_union_composition(case):
    G, s = case
    G = apply_sequence(G, s)
    for x, y in G.edges():
        N2, S2 = _prop1_oracle(G, x, y)
        H = apply_call(G, Call(x, y))
        assert H.N == N2 and H.S == S2


@settings(max_examples=1000, deadline=None)
@given(graph_and_sequence(min_n=2, max_n=5, max_len=10))
def test_call_monotone_and_symmetric(case):
    G, s = case
    for c in s:
        H = apply_call(G, c)
        assert G.N <= H.N and G.S <= H.S
        assert H.N.rows[c.caller] == H.N.rows[c.callee]
        assert H.S.rows[c.caller] == H.S.rows[c.callee]
        G = H


def test_local_histories_count_each_call_twice():
    rng = random.Random(5)
    for _ in range(1000):
        G = random_graph(rng, rng.randint(2, 6))
        from conftest import random_possible_sequence

        s = random_possible_sequence(rng, G, rng.randint(0, 12))
        counts = Counter()
        for x in G.agents:
            counts.update(local_history(s, x).calls)
        assert counts == Counter({c: 2 * k for c, k in Counter(s.calls).items()})


def test_graph_text(L3):
    assert str(L3) == "a: b\nb: c\nc:"

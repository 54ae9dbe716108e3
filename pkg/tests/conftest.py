import random

import pytest
from hypothesis import strategies as st

from dyngossip.core import Call, CallSequence, apply_call, is_possible, make_initial
from dyngossip.verifier import builtin_graph, graph_from_mask

ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def record(criterion: int, ok: bool, note: str) -> None:
    prev = ACCEPTANCE.get(criterion)
    if prev is not None:
        ok = ok and prev[0]
        note = prev[1] + "; " + note
    ACCEPTANCE[criterion] = (ok, note)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    k = marker.args[0]
    if rep.failed:
        record(k, False, f"{item.name} failed")
    elif rep.when == "call" and k not in ACCEPTANCE:
        record(k, True, f"{item.name} passed")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, note = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'} - {note}")


def seq(G, text):
    """Sequence literal over single-letter names."""
    idx = {v: i for i, v in enumerate(G.names)}
    return CallSequence.of((idx[t[0]], idx[t[1]]) for t in text.split(";") if t)


def random_graph(rng: random.Random, n: int, p: float = None):
    p = rng.random() if p is None else p
    return make_initial(n, [(x, y) for x in range(n) for y in range(n) if x != y and rng.random() < p])


def random_possible_sequence(rng: random.Random, G, length: int):
    calls = []
    for _ in range(length):
        options = [(x, y) for x in G.agents for y in G.agents if x != y and is_possible(G, Call(x, y))]
        if not options:
            break
        c = Call(*rng.choice(options))
        calls.append(c)
        G = apply_call(G, c)
    return CallSequence(tuple(calls))


@st.composite
def graphs(draw, min_n=1, max_n=5):
    n = draw(st.integers(min_n, max_n))
    mask = draw(st.integers(0, (1 << (n * (n - 1))) - 1))
    return graph_from_mask(n, mask)


@st.composite
def graph_and_sequence(draw, min_n=2, max_n=5, max_len=12):
    G = draw(graphs(min_n, max_n))
    seed = draw(st.integers(0, 2**32))
    length = draw(st.integers(0, max_len))
    return G, random_possible_sequence(random.Random(seed), G, length)


@pytest.fixture
def L3():
    return builtin_graph("line3")


@pytest.fixture
def bush3():
    return builtin_graph("bush3")

"""Protocol conditions, the named protocols, and execution states.

A condition is a boolean combination of six local atoms about the caller
``x`` and callee ``y``.  For execution it is compiled to a function that,
for a caller ``x``, returns the bitmask of callees ``y`` satisfying it;
the permitted calls of ``x`` are then that mask intersected with ``x``'s
number row.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Union

from .core import (
    Call,
    CallSequence,
    GossipError,
    GossipGraph,
    Relation,
    bits,
    full_mask,
    local_history,
)

ATOMS = ("true", "knows-secret", "called", "was-called-by", "fresh", "last-out", "last-in")

# per-agent last call direction
NONE, OUT, IN = 0, 1, 2


@dataclass(frozen=True)
class Atom:
    kind: str

    def __post_init__(self):
        if self.kind not in ATOMS:
            raise GossipError(f"unknown atom {self.kind!r}")


@dataclass(frozen=True)
class Not:
    arg: "Condition"


@dataclass(frozen=True)
class And:
    left: "Condition"
    right: "Condition"


@dataclass(frozen=True)
class Or:
    left: "Condition"
    right: "Condition"


Condition = Union[Atom, Not, And, Or]

TRUE = Atom("true")


# -- surface syntax ---------------------------------------------------------


class ConditionSyntaxError(GossipError):
    def __init__(self, offset: int, expected, found: str):
        self.offset = offset
        self.expected = frozenset(expected)
        self.found = found
        exp = ", ".join(sorted(self.expected))
        super().__init__(f"at byte {offset}: expected one of {{{exp}}}, found {found}")


_TOKEN = re.compile(r"\s*(?:([()])|([A-Za-z][A-Za-z-]*)|(\S))")
_PRIMARY_START = set(ATOMS) | {"not", "("}


def _tokenize(text: str):
    toks = []
    pos = 0
    while True:
        m = _TOKEN.match(text, pos)
        if m is None:
            break
        start = m.start(m.lastindex)
        word = m.group(m.lastindex)
        offset = len(text[:start].encode())
        if m.lastindex == 3:
            raise ConditionSyntaxError(offset, _PRIMARY_START | {")", "and", "or"}, repr(word))
        toks.append((word.lower(), offset))
        pos = m.end()
    toks.append(("<end>", len(text.encode())))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i][0]

    def fail(self, expected):
        tok, off = self.toks[self.i]
        found = "end of input" if tok == "<end>" else repr(tok)
        raise ConditionSyntaxError(off, expected, found)

    def parse(self) -> Condition:
        cond = self.or_expr()
        if self.peek() != "<end>":
            self.fail({"and", "or", "<end>"})
        return cond

    def or_expr(self):
        left = self.and_expr()
        while self.peek() == "or":
            self.i += 1
            left = Or(left, self.and_expr())
        return left

    def and_expr(self):
        left = self.not_expr()
        while self.peek() == "and":
            self.i += 1
            left = And(left, self.not_expr())
        return left

    def not_expr(self):
        tok = self.peek()
        if tok == "not":
            self.i += 1
            return Not(self.not_expr())
        if tok == "(":
            self.i += 1
            inner = self.or_expr()
            if self.peek() != ")":
                self.fail({")", "and", "or"})
            self.i += 1
            return inner
        if tok in ATOMS:
            self.i += 1
            return Atom(tok)
        self.fail(_PRIMARY_START)


def parse_condition(text: str) -> Condition:
    """Parse e.g. ``"not called and not was-called-by"``.

    ``not`` binds tighter than ``and``, which binds tighter than ``or``;
    both binary operators associate to the left.
    """
    return _Parser(text).parse()


_PREC = {Or: 1, And: 2, Not: 3, Atom: 4}


def format_condition(cond: Condition) -> str:
    """Canonical text; ``parse_condition(format_condition(c)) == c``."""

    def fmt(c, min_prec):
        if isinstance(c, Atom):
            s = c.kind
        elif isinstance(c, Not):
            s = "not " + fmt(c.arg, 3)
        else:
            op = "and" if isinstance(c, And) else "or"
            p = _PREC[type(c)]
            s = f"{fmt(c.left, p)} {op} {fmt(c.right, p + 1)}"
        return f"({s})" if _PREC[type(c)] < min_prec else s

    return fmt(cond, 0)


PROTOCOLS = {
    "any": "true",
    "tok": "fresh or last-in",
    "spi": "fresh or last-out",
    "co": "not called and not was-called-by",
    "wco": "not called",
    "lns": "not knows-secret",
}


def named_protocol(pid: str) -> Condition:
    try:
        return parse_condition(PROTOCOLS[pid.lower()])
    except KeyError:
        raise GossipError(
            f"unknown protocol {pid!r}; choose from {', '.join(PROTOCOLS)}"
        ) from None


def as_condition(cond) -> Condition:
    """Accept a Condition, a protocol id, or condition text."""
    if isinstance(cond, (Atom, Not, And, Or)):
        return cond
    if cond.lower() in PROTOCOLS:
        return named_protocol(cond)
    return parse_condition(cond)


def atoms_of(cond: Condition) -> frozenset[str]:
    if isinstance(cond, Atom):
        return frozenset([cond.kind])
    if isinstance(cond, Not):
        return atoms_of(cond.arg)
    return atoms_of(cond.left) | atoms_of(cond.right)


@dataclass(frozen=True)
class MemorySignature:
    needs_secret_relation: bool
    needs_call_set: bool
    needs_last_direction: bool

    @classmethod
    def of(cls, cond: Condition) -> "MemorySignature":
        a = atoms_of(cond)
        return cls(
            needs_secret_relation="knows-secret" in a,
            needs_call_set=bool(a & {"called", "was-called-by"}),
            needs_last_direction=bool(a & {"fresh", "last-out", "last-in"}),
        )

    def __or__(self, other: "MemorySignature") -> "MemorySignature":
        return MemorySignature(
            self.needs_secret_relation or other.needs_secret_relation,
            self.needs_call_set or other.needs_call_set,
            self.needs_last_direction or other.needs_last_direction,
        )


# -- compiled evaluation ----------------------------------------------------


def _mask_source(c: Condition) -> str:
    if isinstance(c, Atom):
        return {
            "true": "-1",
            "knows-secret": "S[x]",
            "called": "O[x]",
            "was-called-by": "I[x]",
            "fresh": "(-1 if D[x] == 0 else 0)",
            "last-out": "(-1 if D[x] == 1 else 0)",
            "last-in": "(-1 if D[x] == 2 else 0)",
        }[c.kind]
    if isinstance(c, Not):
        return f"~{_mask_source(c.arg)}"
    op = "&" if isinstance(c, And) else "|"
    return f"({_mask_source(c.left)} {op} {_mask_source(c.right)})"


def entails_not(c: Condition, kind: str) -> bool:
    """Sufficient syntactic test that ``c`` implies ``not <kind>``."""
    if isinstance(c, Not):
        return c.arg == Atom(kind)
    if isinstance(c, And):
        return entails_not(c.left, kind) or entails_not(c.right, kind)
    if isinstance(c, Or):
        return entails_not(c.left, kind) and entails_not(c.right, kind)
    return False


# A raw state is the tuple (N, S, D, O, I) of row tuples; D holds the last
# call direction per agent, O/I the made-call set by caller / by callee.
# Components the condition does not read are None.


class Kernel:
    """Permitted calls and successor states for one condition on raw states."""

    def __init__(self, cond: Condition):
        self.cond = cond
        sig = MemorySignature.of(cond)
        self.signature = sig
        # Every permitted call grows S (or the made-call set), so all
        # permitted sequences are finite and the state graph is acyclic.
        self.terminating = entails_not(cond, "knows-secret") or entails_not(cond, "called")
        self.use_dir = sig.needs_last_direction
        self.use_calls = sig.needs_call_set
        src = _mask_source(cond)
        self.mask = eval(f"lambda x, S, D, O, I: {src}", {})
        self.source = src
        # Without memory the successor of xy and yx is the same state.
        self.memoryless = not (self.use_dir or self.use_calls)

    def initial(self, G: GossipGraph):
        n = G.n
        D = (NONE,) * n if self.use_dir else None
        O = I = (0,) * n if self.use_calls else None
        return (G.N.rows, G.S.rows, D, O, I)

    def permitted(self, st) -> list[tuple[int, int]]:
        N, S, D, O, I = st
        n = len(N)
        full = (1 << n) - 1
        out = []
        if all(r == full for r in S):
            return out
        mask = self.mask
        for x in range(n):
            m = N[x] & mask(x, S, D, O, I) & ~(1 << x)
            while m:
                low = m & -m
                out.append((x, low.bit_length() - 1))
                m ^= low
        return out

    def allowed(self, st, x: int, y: int) -> bool:
        """The condition alone (no possibility or stop check)."""
        N, S, D, O, I = st
        return bool(self.mask(x, S, D, O, I) >> y & 1)

    def apply(self, st, x: int, y: int):
        N, S, D, O, I = st
        Nl, Sl = list(N), list(S)
        Nl[x] = Nl[y] = N[x] | N[y]
        Sl[x] = Sl[y] = S[x] | S[y]
        if D is not None:
            Dl = list(D)
            Dl[x] = OUT
            Dl[y] = IN
            D = tuple(Dl)
        if O is not None:
            Ol, Il = list(O), list(I)
            Ol[x] |= 1 << y
            Il[y] |= 1 << x
            O, I = tuple(Ol), tuple(Il)
        return (tuple(Nl), tuple(Sl), D, O, I)


@lru_cache(maxsize=256)
def kernel(cond: Condition) -> Kernel:
    return Kernel(cond)


def is_complete_raw(st) -> bool:
    S = st[1]
    full = (1 << len(S)) - 1
    return all(r == full for r in S)


# -- execution states -------------------------------------------------------


@dataclass(frozen=True)
class ExecutionState:
    graph: GossipGraph
    last_direction: Optional[tuple[int, ...]] = None
    made_calls: Optional[frozenset[tuple[int, int]]] = None
    trace: Optional[CallSequence] = None

    @classmethod
    def initial(cls, G: GossipGraph, cond=None, keep_trace: bool = True) -> "ExecutionState":
        sig = MemorySignature.of(as_condition(cond)) if cond is not None else MemorySignature(True, True, True)
        return cls(
            G,
            (NONE,) * G.n if sig.needs_last_direction else None,
            frozenset() if sig.needs_call_set else None,
            CallSequence() if keep_trace else None,
        )

    def raw(self):
        n = self.graph.n
        O = I = None
        if self.made_calls is not None:
            Ol, Il = [0] * n, [0] * n
            for x, y in self.made_calls:
                Ol[x] |= 1 << y
                Il[y] |= 1 << x
            O, I = tuple(Ol), tuple(Il)
        return (self.graph.N.rows, self.graph.S.rows, self.last_direction, O, I)

    def abstract(self):
        """Graph plus memory, without the trace."""
        return (self.graph.N.rows, self.graph.S.rows, self.last_direction, self.made_calls)


def _raw_for(state: ExecutionState, k: Kernel):
    N, S, D, O, I = state.raw()
    if k.use_dir and D is None:
        raise GossipError("state does not track last call directions")
    if k.use_calls and O is None:
        raise GossipError("state does not track made calls")
    return (N, S, D, O, I)


def permitted_calls(state: ExecutionState, cond) -> list[Call]:
    k = kernel(as_condition(cond))
    return [Call(x, y) for x, y in k.permitted(_raw_for(state, k))]


class NotPermitted(GossipError):
    def __init__(self, call: str, reason: str, index: Optional[int] = None):
        self.call = call
        self.reason = reason  # "possibility", "stop condition" or "condition"
        self.index = index
        super().__init__(f"call {call} not permitted: fails {reason}")


def check_call(state: ExecutionState, c: Call, cond) -> Optional[str]:
    """Name of the failed conjunct of permittedness, or None."""
    k = kernel(as_condition(cond))
    G = state.graph
    if c.caller >= G.n or c.callee >= G.n or (c.caller, c.callee) not in G.N:
        return "possibility"
    if G.is_complete():
        return "stop condition"
    if not k.allowed(_raw_for(state, k), c.caller, c.callee):
        return "condition"
    return None


def step(state: ExecutionState, c: Call, cond) -> ExecutionState:
    reason = check_call(state, c, cond)
    if reason is not None:
        raise NotPermitted(c.format(state.graph.names), reason)
    G = state.graph
    x, y = c.caller, c.callee
    N, S = list(G.N.rows), list(G.S.rows)
    N[x] = N[y] = N[x] | N[y]
    S[x] = S[y] = S[x] | S[y]
    graph = GossipGraph(G.n, Relation(G.n, tuple(N)), Relation(G.n, tuple(S)), G.names)
    D = state.last_direction
    if D is not None:
        Dl = list(D)
        Dl[x], Dl[y] = OUT, IN
        D = tuple(Dl)
    made = state.made_calls
    if made is not None:
        made = made | {(x, y)}
    trace = state.trace + CallSequence((c,)) if state.trace is not None else None
    return ExecutionState(graph, D, made, trace)


@dataclass(frozen=True)
class SequenceReport:
    permitted: bool
    failing_index: Optional[int]
    successful: bool
    stuck: bool
    reason: Optional[str] = None

    @property
    def maximal(self) -> bool:
        return self.successful or self.stuck

    def to_dict(self) -> dict:
        return {
            "permitted": self.permitted,
            "failing_index": self.failing_index,
            "successful": self.successful,
            "stuck": self.stuck,
            "reason": self.reason,
        }


def validate_sequence(G: GossipGraph, seq: CallSequence, cond) -> SequenceReport:
    """Check a finite sequence against the protocol; indices are 1-based."""
    cond = as_condition(cond)
    state = ExecutionState.initial(G, cond, keep_trace=False)
    for i, c in enumerate(seq, start=1):
        reason = check_call(state, c, cond)
        if reason is not None:
            return SequenceReport(False, i, False, False, reason)
        state = step(state, c, cond)
    done = state.graph.is_complete()
    stuck = not done and not permitted_calls(state, cond)
    return SequenceReport(True, None, done, stuck)


def in_extension(G: GossipGraph, seq: CallSequence, cond) -> bool:
    return validate_sequence(G, seq, cond).permitted


# -- reference semantics over full traces -----------------------------------


def holds_on_trace(cond: Condition, G_sigma: GossipGraph, sigma: CallSequence, x: int, y: int) -> bool:
    """Evaluate the condition straight from its definition, given S^σ and σ."""
    hist = local_history(sigma, x)
    last = hist[len(hist) - 1] if len(hist) else None

    def ev(c):
        if isinstance(c, Atom):
            k = c.kind
            if k == "true":
                return True
            if k == "knows-secret":
                return (x, y) in G_sigma.S
            if k == "called":
                return Call(x, y) in hist.calls
            if k == "was-called-by":
                return Call(y, x) in hist.calls
            if k == "fresh":
                return len(hist) == 0
            if k == "last-out":
                return last is not None and last.caller == x
            return last is not None and last.callee == x
        if isinstance(c, Not):
            return not ev(c.arg)
        if isinstance(c, And):
            return ev(c.left) and ev(c.right)
        return ev(c.left) or ev(c.right)

    return ev(cond)


def permitted_on_trace(cond: Condition, G: GossipGraph, sigma: CallSequence) -> list[Call]:
    """Permitted calls after σ computed without any abstract memory."""
    from .core import apply_sequence

    Gs = apply_sequence(G, sigma)
    if Gs.is_complete():
        return []
    return [
        Call(x, y)
        for x in Gs.agents
        for y in bits(Gs.N.rows[x])
        if x != y and holds_on_trace(cond, Gs, sigma, x, y)
    ]

"""Gossip graphs, calls and call sequences.

Relations over ``n`` agents are stored as one integer bitmask per row:
bit ``y`` of ``rows[x]`` is set iff ``(x, y)`` is in the relation.  Agents
are plain integer indices; letter names are only used for printing.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

MAX_AGENTS = 64


class GossipError(ValueError):
    """Bad input to one of the gossip operations."""


class ImpossibleCall(GossipError):
    """A call ``xy`` was attempted although ``x`` lacks ``y``'s number."""

    def __init__(self, call, index=None):
        self.call = call
        self.index = index
        where = "" if index is None else f" at position {index}"
        super().__init__(f"call {call} is not possible{where}")


def agent_name(i: int) -> str:
    """a, b, ..., z, a1, b1, ..., z1, a2, ..."""
    letter = chr(ord("a") + i % 26)
    return letter if i < 26 else f"{letter}{i // 26}"


def default_names(n: int) -> tuple[str, ...]:
    return tuple(agent_name(i) for i in range(n))


def full_mask(n: int) -> int:
    return (1 << n) - 1


def bits(mask: int) -> Iterator[int]:
    """Indices of the set bits of ``mask`` in ascending order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


@dataclass(frozen=True)
class Relation:
    n: int
    rows: tuple[int, ...]

    def __post_init__(self):
        if len(self.rows) != self.n:
            raise GossipError(f"expected {self.n} rows, got {len(self.rows)}")
        limit = full_mask(self.n)
        if any(r & ~limit for r in self.rows):
            raise GossipError("relation mentions an agent out of range")

    @classmethod
    def from_pairs(cls, n: int, pairs: Iterable[tuple[int, int]]) -> "Relation":
        rows = [0] * n
        for x, y in pairs:
            if not (0 <= x < n and 0 <= y < n):
                raise GossipError(f"pair ({x}, {y}) out of range for {n} agents")
            rows[x] |= 1 << y
        return cls(n, tuple(rows))

    @classmethod
    def identity(cls, n: int) -> "Relation":
        return cls(n, tuple(1 << i for i in range(n)))

    @classmethod
    def complete(cls, n: int) -> "Relation":
        return cls(n, (full_mask(n),) * n)

    def __contains__(self, pair) -> bool:
        x, y = pair
        return bool(self.rows[x] >> y & 1)

    def __iter__(self) -> Iterator[tuple[int, int]]:
        for x, r in enumerate(self.rows):
            for y in bits(r):
                yield x, y

    def __len__(self) -> int:
        return sum(r.bit_count() for r in self.rows)

    def __le__(self, other: "Relation") -> bool:
        return all(a & ~b == 0 for a, b in zip(self.rows, other.rows))

    def __or__(self, other: "Relation") -> "Relation":
        return Relation(self.n, tuple(a | b for a, b in zip(self.rows, other.rows)))

    def __and__(self, other: "Relation") -> "Relation":
        return Relation(self.n, tuple(a & b for a, b in zip(self.rows, other.rows)))

    def __sub__(self, other: "Relation") -> "Relation":
        return Relation(self.n, tuple(a & ~b for a, b in zip(self.rows, other.rows)))

    def row(self, x: int) -> frozenset[int]:
        return frozenset(bits(self.rows[x]))

    def compose(self, other: "Relation") -> "Relation":
        """``self ∘ other``: pairs (x, y) with some z, self(x, z) and other(z, y)."""
        out = []
        for r in self.rows:
            acc = 0
            for z in bits(r):
                acc |= other.rows[z]
            out.append(acc)
        return Relation(self.n, tuple(out))

    def converse(self) -> "Relation":
        return Relation.from_pairs(self.n, ((y, x) for x, y in self))

    def transitive_closure(self) -> "Relation":
        """``N*``, the union of all positive powers (Warshall over bit rows)."""
        rows = list(self.rows)
        for k in range(self.n):
            bit = 1 << k
            rk = rows[k]
            for x in range(self.n):
                if rows[x] & bit:
                    rows[x] |= rk
        return Relation(self.n, tuple(rows))

    def restrict(self, keep: Sequence[int]) -> "Relation":
        """Induced sub-relation on ``keep``, re-indexed in the given order."""
        pos = {a: i for i, a in enumerate(keep)}
        return Relation.from_pairs(
            len(keep), ((pos[x], pos[y]) for x, y in self if x in pos and y in pos)
        )

    def is_complete(self) -> bool:
        full = full_mask(self.n)
        return all(r == full for r in self.rows)


@dataclass(frozen=True)
class Call:
    caller: int
    callee: int

    def __post_init__(self):
        if self.caller == self.callee:
            raise GossipError(f"agent {self.caller} cannot call itself")
        if self.caller < 0 or self.callee < 0:
            raise GossipError("agent indices must be non-negative")

    def involves(self, x: int) -> bool:
        return x == self.caller or x == self.callee

    def format(self, names: Sequence[str] | None = None) -> str:
        if names is None:
            return agent_name(self.caller) + agent_name(self.callee)
        a, b = names[self.caller], names[self.callee]
        if len(a) == 1 and len(b) == 1:
            return a + b
        return f"{a}>{b}"

    def __str__(self) -> str:
        return self.format()


@dataclass(frozen=True)
class CallSequence:
    calls: tuple[Call, ...] = ()

    @classmethod
    def of(cls, pairs: Iterable) -> "CallSequence":
        out = []
        for c in pairs:
            out.append(c if isinstance(c, Call) else Call(*c))
        return cls(tuple(out))

    def __len__(self) -> int:
        return len(self.calls)

    def __iter__(self) -> Iterator[Call]:
        return iter(self.calls)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return CallSequence(self.calls[i])
        return self.calls[i]

    def __add__(self, other: "CallSequence") -> "CallSequence":
        return CallSequence(self.calls + tuple(other))

    def prefix(self, k: int) -> "CallSequence":
        return CallSequence(self.calls[:k])

    def is_prefix_of(self, other: "CallSequence") -> bool:
        return other.calls[: len(self.calls)] == self.calls

    def restrict(self, x: int) -> "CallSequence":
        return local_history(self, x)

    def pairs(self) -> tuple[tuple[int, int], ...]:
        return tuple((c.caller, c.callee) for c in self.calls)

    def format(self, names: Sequence[str] | None = None) -> str:
        return ";".join(c.format(names) for c in self.calls)

    def __str__(self) -> str:
        return self.format() or "ε"


@dataclass(frozen=True)
class GossipGraph:
    """The triple (A, N, S); ``A`` is ``range(n)``."""

    n: int
    N: Relation
    S: Relation
    names: tuple[str, ...] = ()

    def __post_init__(self):
        if not 0 <= self.n <= MAX_AGENTS:
            raise GossipError(f"agent count must be in [0, {MAX_AGENTS}], got {self.n}")
        if self.N.n != self.n or self.S.n != self.n:
            raise GossipError("relation size does not match agent count")
        if not self.names and self.n:
            object.__setattr__(self, "names", default_names(self.n))
        if len(self.names) != self.n or len(set(self.names)) != self.n:
            raise GossipError("agent names must be unique, one per agent")
        ident = Relation.identity(self.n)
        if not (ident <= self.N and ident <= self.S):
            raise GossipError("every agent must know its own number and secret")

    @property
    def agents(self) -> range:
        return range(self.n)

    def is_initial(self) -> bool:
        return self.S == Relation.identity(self.n)

    def is_complete(self) -> bool:
        """All agents are experts, i.e. S = A²."""
        return self.S.is_complete()

    def edges(self) -> list[tuple[int, int]]:
        """Off-diagonal number edges."""
        return [(x, y) for x, y in self.N if x != y]

    def with_edges(self, extra: Iterable[tuple[int, int]]) -> "GossipGraph":
        """``G + xy`` for each given pair."""
        return GossipGraph(self.n, self.N | Relation.from_pairs(self.n, extra), self.S, self.names)

    def name(self, x: int) -> str:
        return self.names[x]

    def __str__(self) -> str:
        lines = []
        for x in self.agents:
            succ = " ".join(self.names[y] for y in bits(self.N.rows[x]) if y != x)
            lines.append(f"{self.names[x]}: {succ}".rstrip())
        return "\n".join(lines)


def make_initial(n: int, number_edges: Iterable[tuple[int, int]] = (), names=None) -> GossipGraph:
    N = Relation.identity(n) | Relation.from_pairs(n, number_edges)
    return GossipGraph(n, N, Relation.identity(n), tuple(names or ()))


def is_possible(G: GossipGraph, c: Call) -> bool:
    return c.caller < G.n and c.callee < G.n and (c.caller, c.callee) in G.N


def apply_call(G: GossipGraph, c: Call) -> GossipGraph:
    if not is_possible(G, c):
        raise ImpossibleCall(c.format(G.names) if c.caller < G.n and c.callee < G.n else c)
    x, y = c.caller, c.callee
    N, S = list(G.N.rows), list(G.S.rows)
    N[x] = N[y] = N[x] | N[y]
    S[x] = S[y] = S[x] | S[y]
    return GossipGraph(G.n, Relation(G.n, tuple(N)), Relation(G.n, tuple(S)), G.names)


def apply_sequence(G: GossipGraph, seq: Iterable[Call]) -> GossipGraph:
    for i, c in enumerate(seq, start=1):
        if not is_possible(G, c):
            raise ImpossibleCall(c.format(G.names), index=i)
        G = apply_call(G, c)
    return G


def experts(G: GossipGraph) -> frozenset[int]:
    full = full_mask(G.n)
    return frozenset(x for x, r in enumerate(G.S.rows) if r == full)


def local_history(seq: CallSequence, x: int) -> CallSequence:
    return CallSequence(tuple(c for c in seq if c.involves(x)))

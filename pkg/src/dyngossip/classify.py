"""Structural predicates on the number relation of initial gossip graphs."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from .core import GossipError, GossipGraph, Relation, bits


def _off_diag(G: GossipGraph) -> list[int]:
    return [r & ~(1 << x) for x, r in enumerate(G.N.rows)]


def out_degree(G: GossipGraph, x: int) -> int:
    return (G.N.rows[x] & ~(1 << x)).bit_count()


def in_degree(G: GossipGraph, x: int) -> int:
    return sum(1 for y, r in enumerate(G.N.rows) if y != x and r >> x & 1)


def predecessors(G: GossipGraph, x: int) -> list[int]:
    return [y for y, r in enumerate(G.N.rows) if y != x and r >> x & 1]


def terminals(G: GossipGraph) -> frozenset[int]:
    return frozenset(x for x, r in enumerate(G.N.rows) if r == 1 << x)


def weak_components(n: int, rows: Sequence[int]) -> list[int]:
    """Component label (smallest member) for every agent, w.r.t. N ∪ N⁻¹."""
    sym = list(rows)
    for x, r in enumerate(rows):
        for y in bits(r):
            sym[y] |= 1 << x
    label = [-1] * n
    for s in range(n):
        if label[s] != -1:
            continue
        seen = 1 << s
        frontier = 1 << s
        while frontier:
            nxt = 0
            for v in bits(frontier):
                nxt |= sym[v]
            frontier = nxt & ~seen
            seen |= nxt
        for v in bits(seen):
            label[v] = s
    return label


def is_weakly_connected(G: GossipGraph) -> bool:
    return G.n <= 1 or len(set(weak_components(G.n, G.N.rows))) == 1


def strongly_connected_components(n: int, rows: Sequence[int]) -> list[list[int]]:
    """Tarjan's algorithm, iterative; components listed by smallest member."""
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    comps: list[list[int]] = []
    counter = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, iter(bits(rows[root])))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if index[w] == -1:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, iter(bits(rows[w]))))
                    advanced = True
                    break
                if on_stack[w]:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                comps.append(sorted(comp))
    comps.sort(key=lambda c: c[0])
    return comps


def is_strongly_connected(G: GossipGraph) -> bool:
    return G.n <= 1 or len(strongly_connected_components(G.n, G.N.rows)) == 1


def skin(G: GossipGraph) -> GossipGraph:
    """Remove the terminal agents once (not iterated to a fixpoint)."""
    T = terminals(G)
    keep = [x for x in G.agents if x not in T]
    return GossipGraph(
        len(keep), G.N.restrict(keep), G.S.restrict(keep), tuple(G.names[x] for x in keep)
    )


def tree_root(n: int, rows: Sequence[int]) -> Optional[int]:
    """Root of the in-tree formed by ``rows`` (loops ignored), or None.

    Exactly one node has no successor; every other node has exactly one,
    and following successors from any node reaches the root.
    """
    succ = []
    root = None
    for x, r in enumerate(rows):
        r &= ~(1 << x)
        c = r.bit_count()
        if c == 0:
            if root is not None:
                return None
            root = x
            succ.append(-1)
        elif c == 1:
            succ.append(r.bit_length() - 1)
        else:
            return None
    if root is None:
        return None
    for x in range(n):
        v, steps = x, 0
        while v != root:
            v = succ[v]
            steps += 1
            if steps > n:
                return None
    return root


def is_bush_rows(n: int, rows: Sequence[int]) -> bool:
    r = tree_root(n, rows)
    if r is None:
        return False
    indeg = sum(1 for y, row in enumerate(rows) if y != r and row >> r & 1)
    return indeg >= 2


def double_bush_witness(G: GossipGraph) -> Optional[tuple[int, int, int]]:
    """A linking triple (c, b, d) with b < d, or None."""
    n = G.n
    if n < 5:
        return None
    rows = _off_diag(G)
    for c in range(n):
        if any(rows[y] >> c & 1 for y in range(n)):
            continue
        if rows[c].bit_count() != 2:
            continue
        b, d = bits(rows[c])
        rest = [x for x in range(n) if x != c]
        sub = G.N.restrict(rest)
        label = weak_components(len(rest), sub.rows)
        if len(set(label)) != 2:
            continue
        lb, ld = label[rest.index(b)], label[rest.index(d)]
        if lb == ld:
            continue
        ok = True
        for root, lab in ((b, lb), (d, ld)):
            part = [c] + [x for i, x in enumerate(rest) if label[i] == lab]
            # c sits at index 0; its edge to the other root falls outside the part
            prow = G.N.restrict(part).rows
            if tree_root(len(part), prow) != part.index(root) or not is_bush_rows(len(part), prow):
                ok = False
                break
        if ok:
            return (c, b, d)
    return None


@dataclass(frozen=True)
class GraphClass:
    weakly_connected: bool
    strongly_connected: bool
    complete: bool
    terminals: frozenset[int]
    skin: tuple[int, ...]
    sun: bool
    tree: bool
    tree_root: Optional[int]
    bush: bool
    double_bush: bool
    double_bush_witness: Optional[tuple[int, int, int]]
    component_count: int
    scc_count: int
    in_degrees: tuple[int, ...] = field(default=(), compare=False)
    out_degrees: tuple[int, ...] = field(default=(), compare=False)

    def to_dict(self, names: Sequence[str]) -> dict:
        nm = lambda xs: [names[x] for x in sorted(xs)]
        return {
            "weakly_connected": self.weakly_connected,
            "strongly_connected": self.strongly_connected,
            "complete": self.complete,
            "terminals": nm(self.terminals),
            "skin": nm(self.skin),
            "sun": self.sun,
            "tree": self.tree,
            "tree_root": None if self.tree_root is None else names[self.tree_root],
            "bush": self.bush,
            "double_bush": self.double_bush,
            "double_bush_witness": None
            if self.double_bush_witness is None
            else [names[x] for x in self.double_bush_witness],
            "component_count": self.component_count,
            "scc_count": self.scc_count,
            "in_degrees": dict(zip(names, self.in_degrees)),
            "out_degrees": dict(zip(names, self.out_degrees)),
        }


def classify(G: GossipGraph) -> GraphClass:
    if not G.is_initial():
        raise GossipError("classification is defined on initial gossip graphs only")
    n = G.n
    rows = G.N.rows
    comps = len(set(weak_components(n, rows)))
    sccs = len(strongly_connected_components(n, rows))
    T = terminals(G)
    skin_nodes = tuple(x for x in range(n) if x not in T)
    if skin_nodes:
        sk = G.N.restrict(skin_nodes)
        skin_sc = len(strongly_connected_components(len(skin_nodes), sk.rows)) == 1
    else:
        skin_sc = True
    weak = comps <= 1
    root = tree_root(n, rows)
    indeg = tuple(in_degree(G, x) for x in range(n))
    bush = root is not None and indeg[root] >= 2
    witness = None if root is not None else double_bush_witness(G)
    return GraphClass(
        weakly_connected=weak,
        strongly_connected=sccs <= 1,
        complete=G.N.is_complete(),
        terminals=T,
        skin=skin_nodes,
        sun=weak and skin_sc,
        tree=root is not None,
        tree_root=root,
        bush=bush,
        double_bush=witness is not None,
        double_bush_witness=witness,
        component_count=comps,
        scc_count=sccs,
        in_degrees=indeg,
        out_degrees=tuple(out_degree(G, x) for x in range(n)),
    )


def is_sun(G: GossipGraph) -> bool:
    return classify(G).sun


def lns_blocked(G: GossipGraph) -> bool:
    """Bush or double bush, the graphs where LNS has no successful run."""
    c = classify(G)
    return c.bush or c.double_bush

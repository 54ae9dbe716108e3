"""Agent permutations: graph canonical forms and state-orbit keys.

Both work on packed bitmasks with per-permutation lookup tables, so a
whole batch of graphs (or states) is canonicalised by a few numpy
gathers instead of a Python loop over permutations.
"""

from __future__ import annotations

import itertools
from functools import lru_cache

import numpy as np

from .core import GossipError, GossipGraph

MAX_CANON_AGENTS = 7
CHUNK_BITS = 10


def off_diagonal_cells(n: int) -> list[tuple[int, int]]:
    """Cell order of the graph bitmask: for x, then for y != x."""
    return [(x, y) for x in range(n) for y in range(n) if x != y]


def graph_mask(G: GossipGraph) -> int:
    m = 0
    for i, (x, y) in enumerate(off_diagonal_cells(G.n)):
        if G.N.rows[x] >> y & 1:
            m |= 1 << i
    return m


def mask_edges(n: int, mask: int) -> list[tuple[int, int]]:
    return [c for i, c in enumerate(off_diagonal_cells(n)) if mask >> i & 1]


@lru_cache(maxsize=None)
def all_permutations(n: int) -> np.ndarray:
    return np.array(list(itertools.permutations(range(n))), dtype=np.int64).reshape(-1, n)


class GraphCanonizer:
    """Minimum off-diagonal bitmask over all relabellings of n agents."""

    def __init__(self, n: int):
        if not 0 <= n <= MAX_CANON_AGENTS:
            raise GossipError(f"canonical forms are supported for n <= {MAX_CANON_AGENTS}")
        self.n = n
        cells = off_diagonal_cells(n)
        index = {c: i for i, c in enumerate(cells)}
        perms = all_permutations(n)
        self.bits = len(cells)
        nchunks = max(1, -(-self.bits // CHUNK_BITS))
        self.nchunks = nchunks
        # target[p, i]: bit position of cell i after relabelling by p
        target = np.zeros((len(perms), max(1, self.bits)), dtype=np.int64)
        for i, (x, y) in enumerate(cells):
            target[:, i] = [index[(int(p[x]), int(p[y]))] for p in perms]
        tables = np.zeros((nchunks, len(perms), 1 << CHUNK_BITS), dtype=np.int64)
        local = np.arange(1 << CHUNK_BITS, dtype=np.int64)
        for c in range(nchunks):
            for j in range(CHUNK_BITS):
                i = c * CHUNK_BITS + j
                if i >= self.bits:
                    break
                on = (local >> j) & 1
                tables[c] |= on[None, :] << target[:, i][:, None]
        self.tables = tables

    def canon(self, masks: np.ndarray, batch: int = 4096) -> np.ndarray:
        masks = np.asarray(masks, dtype=np.int64).reshape(-1)
        out = np.empty_like(masks)
        for s in range(0, len(masks), batch):
            m = masks[s : s + batch]
            acc = np.zeros((self.tables.shape[1], len(m)), dtype=np.int64)
            for c in range(self.nchunks):
                acc |= self.tables[c][:, (m >> (c * CHUNK_BITS)) & ((1 << CHUNK_BITS) - 1)]
            out[s : s + batch] = acc.min(axis=0)
        return out

    def canon_one(self, mask: int) -> int:
        return int(self.canon(np.array([mask]))[0])


@lru_cache(maxsize=None)
def graph_canonizer(n: int) -> GraphCanonizer:
    return GraphCanonizer(n)


def canonical_form(G: GossipGraph) -> int:
    """Canonical number-relation bitmask; equal iff the graphs are isomorphic."""
    return graph_canonizer(G.n).canon_one(graph_mask(G))


# -- automorphisms and state orbits ----------------------------------------

MAX_ORBIT_AGENTS = 7


def _permute_rows(rows, p, inv):
    n = len(rows)
    out = []
    for i in range(n):
        r = rows[inv[i]]
        m = 0
        for b in range(n):
            if r >> b & 1:
                m |= 1 << p[b]
        out.append(m)
    return tuple(out)


def automorphisms(G: GossipGraph) -> list[tuple[int, ...]]:
    """Agent permutations fixing both N and S (identity included)."""
    n = G.n
    if n > MAX_ORBIT_AGENTS:
        return [tuple(range(n))]
    out = []
    N, S = G.N.rows, G.S.rows
    outdeg = [r.bit_count() for r in N]
    for p in itertools.permutations(range(n)):
        if any(outdeg[p[i]] != outdeg[i] for i in range(n)):
            continue
        inv = [0] * n
        for i, q in enumerate(p):
            inv[q] = i
        if _permute_rows(N, p, inv) == N and _permute_rows(S, p, inv) == S:
            out.append(p)
    return out


class StateOrbits:
    """Orbit keys of (N, S) states under a group of agent permutations.

    Two states with the same key are related by a group element; when the
    group fixes the initial graph, such states have isomorphic futures.
    """

    def __init__(self, n: int, perms):
        if n * n > 63:
            raise GossipError("orbit keys need n <= 7")
        self.n = n
        P = np.array(perms, dtype=np.int64).reshape(-1, n)
        inv = np.argsort(P, axis=1)
        self.inv = inv
        rowvals = np.arange(1 << n, dtype=np.int64)
        tab = np.zeros((len(P), 1 << n), dtype=np.int64)
        for b in range(n):
            tab |= ((rowvals >> b) & 1)[None, :] << P[:, b][:, None]
        self.tab = tab
        self.shift = (np.arange(n, dtype=np.int64) * n)[None, None, :]
        self.pidx = np.arange(len(P))[None, :, None]
        self.batch = max(1, 2_000_000 // (len(P) * n))

    def _packed(self, rows: np.ndarray) -> np.ndarray:
        g = rows[:, self.inv]  # (B, P, n): row inv[p][i] moves to slot i
        g = self.tab[self.pidx, g]
        return (g << self.shift).sum(axis=2)

    def keys(self, states) -> list[tuple[int, int]]:
        out = []
        for s in range(0, len(states), self.batch):
            chunk = states[s : s + self.batch]
            N = np.array([st[0] for st in chunk], dtype=np.int64)
            S = np.array([st[1] for st in chunk], dtype=np.int64)
            kn, ks = self._packed(N), self._packed(S)
            m1 = ks.min(axis=1)
            big = np.iinfo(np.int64).max
            m2 = np.where(ks == m1[:, None], kn, big).min(axis=1)
            out.extend(zip(m1.tolist(), m2.tolist()))
        return out

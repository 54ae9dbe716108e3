"""Compiled search kernels for graphs of up to seven agents.

Each relation is packed into a single int64, with row x in bits
[x*n, x*n + n).  The last-call directions take two bits per agent.  The
condition becomes a short postfix program that is interpreted inside
the compiled loop, so one compiled kernel serves every condition.

These kernels cover the hot loops of exhaustive verification: strong
success, weak success, and random runs.  ``explorer`` holds the
reference implementations, which also produce witnesses.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .core import GossipGraph
from .protocol import And, Atom, Not, Or, as_condition, entails_not

MAX_FAST_AGENTS = 7

OP_TRUE, OP_S, OP_O, OP_I, OP_FRESH, OP_LOUT, OP_LIN, OP_NOT, OP_AND, OP_OR = range(10)
_ATOM_OP = {
    "true": OP_TRUE,
    "knows-secret": OP_S,
    "called": OP_O,
    "was-called-by": OP_I,
    "fresh": OP_FRESH,
    "last-out": OP_LOUT,
    "last-in": OP_LIN,
}

STRONG, STUCK_FOUND, CYCLE_FOUND = 0, 1, 2

def compile_program(cond) -> np.ndarray:
    out = []

    def emit(c):
        if isinstance(c, Atom):
            out.append(_ATOM_OP[c.kind])
        elif isinstance(c, Not):
            emit(c.arg)
            out.append(OP_NOT)
        else:
            emit(c.left)
            emit(c.right)
            out.append(OP_AND if isinstance(c, And) else OP_OR)

    emit(as_condition(cond))
    return np.array(out, dtype=np.int64)


def pack(rows, n: int) -> int:
    v = 0
    for x, r in enumerate(rows):
        v |= r << (x * n)
    return v


def supports(G: GossipGraph) -> bool:
    return 2 <= G.n <= MAX_FAST_AGENTS


# -- compiled core ----------------------------------------------------------


@njit(cache=True, inline="always")
def _row(R, x, n, full):
    return (R >> (x * n)) & full


@njit(cache=True)
def _mask(prog, stack, x, n, full, S, O, D):
    sp = 0
    for op in prog:
        if op == OP_NOT:
            stack[sp - 1] = ~stack[sp - 1]
            continue
        if op == OP_AND:
            sp -= 1
            stack[sp - 1] &= stack[sp]
            continue
        if op == OP_OR:
            sp -= 1
            stack[sp - 1] |= stack[sp]
            continue
        if op == OP_TRUE:
            v = -1
        elif op == OP_S:
            v = (S >> (x * n)) & full
        elif op == OP_O:
            v = (O >> (x * n)) & full
        elif op == OP_I:
            v = 0
            for y in range(n):
                if (O >> (y * n + x)) & 1:
                    v |= 1 << y
        else:
            d = (D >> (2 * x)) & 3
            want = 0 if op == OP_FRESH else (1 if op == OP_LOUT else 2)
            v = -1 if d == want else 0
        stack[sp] = v
        sp += 1
    return stack[0]


@njit(cache=True)
def _permitted(prog, stack, n, full, fullS, N, S, O, D, outx, outy):
    """Fill outx/outy with the permitted calls; return their count."""
    if S == fullS:
        return 0
    k = 0
    for x in range(n):
        m = ((N >> (x * n)) & full) & _mask(prog, stack, x, n, full, S, O, D) & ~(1 << x)
        m &= full
        while m:
            low = m & -m
            y = 0
            while (low >> y) != 1:
                y += 1
            outx[k] = x
            outy[k] = y
            k += 1
            m ^= low
    return k


@njit(cache=True)
def _apply(n, full, use_calls, use_dir, N, S, O, D, x, y):
    sx, sy = x * n, y * n
    nr = ((N >> sx) | (N >> sy)) & full
    sr = ((S >> sx) | (S >> sy)) & full
    clear = ~((full << sx) | (full << sy))
    N = (N & clear) | (nr << sx) | (nr << sy)
    S = (S & clear) | (sr << sx) | (sr << sy)
    if use_calls:
        O |= 1 << (sx + y)
    if use_dir:
        D = (D & ~((3 << (2 * x)) | (3 << (2 * y)))) | (1 << (2 * x)) | (2 << (2 * y))
    return N, S, O, D


@njit(cache=True)
def _grow(a, cap):
    b = np.empty((cap,) + a.shape[1:], dtype=a.dtype)
    b[: a.shape[0]] = a
    return b


@njit(cache=True)
def _hash_slot(keys, vals, mask, a, b, c, d):
    """Slot holding key (a, b, c, d), or the empty slot where it belongs."""
    h = a * -7046029254386353131 + b * -4417276706812531889 + c * 1609587929392839161 + d
    h ^= h >> 31
    h *= -7723592293110705685
    h ^= h >> 29
    i = h & mask
    while vals[i] != 0:
        if keys[i, 0] == a and keys[i, 1] == b and keys[i, 2] == c and keys[i, 3] == d:
            return i
        i = (i + 1) & mask
    return i


@njit(cache=True)
def _rehash(keys, vals):
    cap = 2 * len(vals)
    nk = np.empty((cap, 4), dtype=np.int64)
    nv = np.zeros(cap, dtype=np.int8)
    mask = cap - 1
    for i in range(len(vals)):
        if vals[i] != 0:
            j = _hash_slot(nk, nv, mask, keys[i, 0], keys[i, 1], keys[i, 2], keys[i, 3])
            nk[j, 0], nk[j, 1], nk[j, 2], nk[j, 3] = keys[i, 0], keys[i, 1], keys[i, 2], keys[i, 3]
            nv[j] = vals[i]
    return nk, nv


@njit(cache=True)
def _strong_search(prog, n, N0, S0, use_calls, use_dir):
    """(verdict, states): verdict STRONG, STUCK_FOUND or CYCLE_FOUND.

    States are coloured 1 while on the DFS stack and 2 once finished.
    """
    full = (1 << n) - 1
    fullS = 0
    for x in range(n):
        fullS |= full << (x * n)
    width = n * (n - 1)
    stack = np.empty(len(prog) + 1, dtype=np.int64)
    hk = np.empty((1024, 4), dtype=np.int64)
    hv = np.zeros(1024, dtype=np.int8)
    used = 0
    cap = 64
    st = np.empty((cap, 4), dtype=np.int64)
    cx = np.empty((cap, width), dtype=np.int64)
    cy = np.empty((cap, width), dtype=np.int64)
    cnt = np.empty(cap, dtype=np.int64)
    pos = np.empty(cap, dtype=np.int64)
    st[0, 0], st[0, 1], st[0, 2], st[0, 3] = N0, S0, 0, 0
    cnt[0] = _permitted(prog, stack, n, full, fullS, N0, S0, 0, 0, cx[0], cy[0])
    pos[0] = 0
    if cnt[0] == 0:
        return (STRONG if S0 == fullS else STUCK_FOUND), 1
    j = _hash_slot(hk, hv, len(hv) - 1, N0, S0, 0, 0)
    hk[j, 0], hk[j, 1], hk[j, 2], hk[j, 3] = N0, S0, 0, 0
    hv[j] = 1
    used = 1
    d = 0
    while d >= 0:
        if pos[d] == cnt[d]:
            j = _hash_slot(hk, hv, len(hv) - 1, st[d, 0], st[d, 1], st[d, 2], st[d, 3])
            hv[j] = 2
            d -= 1
            continue
        i = pos[d]
        pos[d] = i + 1
        N, S, O, D = _apply(n, full, use_calls, use_dir, st[d, 0], st[d, 1], st[d, 2], st[d, 3], cx[d, i], cy[d, i])
        j = _hash_slot(hk, hv, len(hv) - 1, N, S, O, D)
        c = hv[j]
        if c == 1:
            return CYCLE_FOUND, used
        if c == 2:
            continue
        if d + 1 == cap:
            cap *= 2
            st, cx, cy = _grow(st, cap), _grow(cx, cap), _grow(cy, cap)
            cnt, pos = _grow(cnt, cap), _grow(pos, cap)
        k = _permitted(prog, stack, n, full, fullS, N, S, O, D, cx[d + 1], cy[d + 1])
        if k == 0 and S != fullS:
            return STUCK_FOUND, used + 1
        hk[j, 0], hk[j, 1], hk[j, 2], hk[j, 3] = N, S, O, D
        hv[j] = 2 if k == 0 else 1
        used += 1
        if 2 * used > len(hv):
            hk, hv = _rehash(hk, hv)
        if k == 0:
            continue
        d += 1
        st[d, 0], st[d, 1], st[d, 2], st[d, 3] = N, S, O, D
        cnt[d] = k
        pos[d] = 0
    return STRONG, used


@njit(cache=True)
def _weak_search(prog, n, N0, S0, use_calls, use_dir):
    """(success reachable, states visited)."""
    full = (1 << n) - 1
    fullS = 0
    for x in range(n):
        fullS |= full << (x * n)
    if S0 == fullS:
        return True, 1
    width = n * (n - 1)
    stack = np.empty(len(prog) + 1, dtype=np.int64)
    hk = np.empty((1024, 4), dtype=np.int64)
    hv = np.zeros(1024, dtype=np.int8)
    j = _hash_slot(hk, hv, len(hv) - 1, N0, S0, 0, 0)
    hk[j, 0], hk[j, 1], hk[j, 2], hk[j, 3] = N0, S0, 0, 0
    hv[j] = 1
    used = 1
    cap = 1024
    todo = np.empty((cap, 4), dtype=np.int64)
    todo[0, 0], todo[0, 1], todo[0, 2], todo[0, 3] = N0, S0, 0, 0
    top = 1
    cx = np.empty(width, dtype=np.int64)
    cy = np.empty(width, dtype=np.int64)
    while top:
        top -= 1
        N, S, O, D = todo[top, 0], todo[top, 1], todo[top, 2], todo[top, 3]
        k = _permitted(prog, stack, n, full, fullS, N, S, O, D, cx, cy)
        for i in range(k):
            N2, S2, O2, D2 = _apply(n, full, use_calls, use_dir, N, S, O, D, cx[i], cy[i])
            if S2 == fullS:
                return True, used + 1
            j = _hash_slot(hk, hv, len(hv) - 1, N2, S2, O2, D2)
            if hv[j] != 0:
                continue
            hk[j, 0], hk[j, 1], hk[j, 2], hk[j, 3] = N2, S2, O2, D2
            hv[j] = 1
            used += 1
            if 2 * used > len(hv):
                hk, hv = _rehash(hk, hv)
            if top == cap:
                cap *= 2
                todo = _grow(todo, cap)
            todo[top, 0], todo[top, 1], todo[top, 2], todo[top, 3] = N2, S2, O2, D2
            top += 1
    return False, used


_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


@njit(cache=True)
def _random_runs(prog, n, N0, S0, use_calls, use_dir, runs, cap, seed):
    """SplitMix64 stream; call i of k permitted is picked as ((z >> 11) * k) >> 53."""
    full = (1 << n) - 1
    fullS = 0
    for x in range(n):
        fullS |= full << (x * n)
    width = max(1, n * (n - 1))
    stack = np.empty(len(prog) + 1, dtype=np.int64)
    cx = np.empty(width, dtype=np.int64)
    cy = np.empty(width, dtype=np.int64)
    state = np.uint64(seed)
    successes = stuck = capped = longest = 0
    for _ in range(runs):
        N, S, O, D = N0, S0, 0, 0
        steps = 0
        while True:
            k = _permitted(prog, stack, n, full, fullS, N, S, O, D, cx, cy)
            if k == 0:
                if S == fullS:
                    successes += 1
                else:
                    stuck += 1
                break
            if steps >= cap:
                capped += 1
                break
            state += _GOLDEN
            z = state
            z = (z ^ (z >> np.uint64(30))) * _MIX1
            z = (z ^ (z >> np.uint64(27))) * _MIX2
            z = z ^ (z >> np.uint64(31))
            i = np.int64(((z >> np.uint64(11)) * np.uint64(k)) >> np.uint64(53))
            N, S, O, D = _apply(n, full, use_calls, use_dir, N, S, O, D, cx[i], cy[i])
            steps += 1
        if steps > longest:
            longest = steps
    return successes, stuck, capped, longest


# -- Python-facing wrappers ---------------------------------------------------


class FastKernel:
    def __init__(self, cond):
        cond = as_condition(cond)
        self.prog = compile_program(cond)
        from .protocol import MemorySignature

        sig = MemorySignature.of(cond)
        self.use_calls = sig.needs_call_set
        self.use_dir = sig.needs_last_direction
        self.terminating = entails_not(cond, "knows-secret") or entails_not(cond, "called")

    def _args(self, G: GossipGraph):
        n = G.n
        return self.prog, n, pack(G.N.rows, n), pack(G.S.rows, n), self.use_calls, self.use_dir

    def strong(self, G: GossipGraph) -> tuple[int, int]:
        v, states = _strong_search(*self._args(G))
        return int(v), int(states)

    def weak(self, G: GossipGraph) -> tuple[bool, int]:
        ok, states = _weak_search(*self._args(G))
        return bool(ok), int(states)

    def random_runs(self, G: GossipGraph, runs: int, cap: int, seed: int):
        s, st, c, m = _random_runs(*self._args(G), runs, cap, np.uint64(seed & ((1 << 64) - 1)))
        return int(s), int(st), int(c), int(m)


_KERNELS: dict = {}


def fast_kernel(cond) -> FastKernel:
    cond = as_condition(cond)
    k = _KERNELS.get(cond)
    if k is None:
        k = _KERNELS[cond] = FastKernel(cond)
    return k


# Pure-Python twin of the compiled generator, for runs on larger graphs.


class SplitMix64:
    MASK = (1 << 64) - 1

    def __init__(self, seed: int):
        self.state = seed & self.MASK

    def next(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & self.MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & self.MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & self.MASK
        return z ^ (z >> 31)

    def below(self, k: int) -> int:
        return ((self.next() >> 11) * k) >> 53

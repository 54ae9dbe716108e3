"""Random graphs beyond exhaustive reach: does LNS weak success match the
bush / double-bush characterisation?"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field

from common import parse_config, save
from dyngossip import fast
from dyngossip.core import make_initial
from dyngossip.protocol import named_protocol
from dyngossip.verifier import predicate_holds


@dataclass
class Config:
    """Sample random graphs per size and edge density."""

    agents: list = field(default_factory=lambda: [6, 7])
    samples: int = 2000
    densities: list = field(default_factory=lambda: [0.15, 0.25, 0.4])
    sparse_trees: int = 500
    seed: int = 20240601


def random_tree_plus(rng, n, extra):
    parent = [None] + [rng.randrange(i) for i in range(1, n)]
    edges = {(i, parent[i]) for i in range(1, n)}
    for _ in range(extra):
        x, y = rng.sample(range(n), 2)
        edges.add((x, y))
    perm = list(range(n))
    rng.shuffle(perm)
    return make_initial(n, [(perm[x], perm[y]) for x, y in edges])


def main(argv=None):
    cfg = parse_config(Config, argv)
    rng = random.Random(cfg.seed)
    kernel = fast.fast_kernel(named_protocol("lns"))
    rows = []
    for n in cfg.agents:
        t0 = time.perf_counter()
        checked = positives = 0
        cex = []
        graphs = []
        for p in cfg.densities:
            for _ in range(cfg.samples // len(cfg.densities)):
                graphs.append(make_initial(n, [(x, y) for x in range(n) for y in range(n) if x != y and rng.random() < p]))
        # trees with an extra edge or two sit next to the bush boundary
        for _ in range(cfg.sparse_trees):
            graphs.append(random_tree_plus(rng, n, rng.randint(0, 2)))
        for G in graphs:
            pred = predicate_holds("lns-weak-class", G)
            ok, _ = kernel.weak(G)
            checked += 1
            positives += pred
            if ok != pred:
                cex.append(str(G))
        dt = time.perf_counter() - t0
        rows.append({"n": n, "graphs_checked": checked, "predicate_true": positives, "counterexamples": cex, "seconds": round(dt, 1)})
        print(f"n={n}  graphs={checked}  predicate_true={positives}  counterexamples={len(cex)}  {dt:.1f}s", flush=True)
    save("lns_weak_sample", cfg, rows)
    return 0 if not any(r["counterexamples"] for r in rows) else 1


if __name__ == "__main__":
    raise SystemExit(main())

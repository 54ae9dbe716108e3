"""How often does the maximal bottom-up sequence leave the root of a tree
an expert, and does the single-predecessor construction always succeed?"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass, field

from common import parse_config, save
from dyngossip.core import apply_sequence, make_initial
from dyngossip.explorer import bottom_up_sequence, decide_success, gather_sequence, solve_tree


@dataclass
class Config:
    """Random in-trees per size."""

    sizes: list = field(default_factory=lambda: [3, 4, 5, 6, 7, 8, 9, 10])
    trees: int = 500
    seed: int = 7
    keep_examples: int = 3


def random_tree(rng, n, single_root_pred):
    parent = [None] + [rng.randrange(1, i) if single_root_pred and i > 1 else rng.randrange(i) for i in range(1, n)]
    perm = list(range(n))
    rng.shuffle(perm)
    return make_initial(n, [(perm[i], perm[parent[i]]) for i in range(1, n)]), perm[0]


def main(argv=None):
    cfg = parse_config(Config, argv)
    rng = random.Random(cfg.seed)
    rows = []
    for n in cfg.sizes:
        missed = 0
        gather_ok = 0
        constructions = Counter()
        solved = 0
        examples = []
        for _ in range(cfg.trees):
            G, root = random_tree(rng, n, False)
            full = (1 << n) - 1
            if apply_sequence(G, bottom_up_sequence(G)).S.rows[root] != full:
                missed += 1
                if len(examples) < cfg.keep_examples:
                    examples.append(str(G))
            gather_ok += apply_sequence(G, gather_sequence(G)).S.rows[root] == full
            H, _ = random_tree(rng, n, True)
            sol = solve_tree(H)
            solved += sol.successful
            constructions[sol.construction] += 1
            if n <= 6 and not sol.successful:
                assert not decide_success(H, "lns").weakly_successful
        rows.append(
            {
                "n": n,
                "trees": cfg.trees,
                "bottom_up_root_not_expert": missed,
                "gather_root_expert": gather_ok,
                "single_predecessor_solved": solved,
                "constructions": dict(constructions),
                "examples": examples,
            }
        )
        print(
            f"n={n:2d}  bottom-up misses root: {missed:4d}/{cfg.trees}  gather ok: {gather_ok}/{cfg.trees}  "
            f"single-pred solved: {solved}/{cfg.trees}  {dict(constructions)}",
            flush=True,
        )
    save("tree_constructions", cfg, rows)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

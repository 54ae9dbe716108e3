"""Minimum number of calls to make every agent an expert, by breadth-first search."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from common import parse_config, save
from dyngossip.explorer import shortest_successful_sequence
from dyngossip.verifier import builtin_graph


@dataclass
class Config:
    """Shortest successful ANY sequence on complete graphs and the pentagon."""

    sizes: list = field(default_factory=lambda: [2, 3, 4, 5, 6])
    protocols: list = field(default_factory=lambda: ["any"])
    pentagon: bool = True


def main(argv=None):
    cfg = parse_config(Config, argv)
    graphs = [(f"K{n}", builtin_graph(f"complete({n})"), 2 * n - 4 if n >= 4 else {1: 0, 2: 1, 3: 3}[n]) for n in cfg.sizes]
    if cfg.pentagon:
        graphs.append(("pentagon", builtin_graph("pentagon"), 6))
    rows = []
    for name, G, expected in graphs:
        for p in cfg.protocols:
            t0 = time.perf_counter()
            s = shortest_successful_sequence(G, p)
            dt = time.perf_counter() - t0
            length = None if s is None else len(s)
            rows.append(
                {
                    "graph": name,
                    "protocol": p,
                    "min_length": length,
                    "reference": expected if p == "any" else None,
                    "witness": None if s is None else s.format(G.names),
                    "seconds": round(dt, 3),
                }
            )
            print(f"{name:9s} {p:4s} min={length}  reference={expected if p == 'any' else '-'}  {dt:7.2f}s  {rows[-1]['witness']}", flush=True)
    save("minimum_calls", cfg, rows)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

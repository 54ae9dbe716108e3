"""Uniformly random scheduling as a fairness surrogate for ANY, TOK and SPI."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from common import parse_config, save
from dyngossip.classify import classify
from dyngossip.explorer import random_fair_runs
from dyngossip.verifier import DEFAULT_SEED, builtin_graph


@dataclass
class Config:
    """Success rate and longest run over the built-in graphs."""

    graphs: list = field(
        default_factory=lambda: ["line3", "bush3", "doublebush5", "pentagon", "sun-a", "sun-b", "tree6", "complete(6)"]
    )
    protocols: list = field(default_factory=lambda: ["any", "tok", "spi", "co", "wco", "lns"])
    runs: int = 1000
    cap: int = 100_000
    seed: int = DEFAULT_SEED


def main(argv=None):
    cfg = parse_config(Config, argv)
    rows = []
    for name in cfg.graphs:
        G = builtin_graph(name)
        wc = classify(G).weakly_connected
        for p in cfg.protocols:
            t0 = time.perf_counter()
            s = random_fair_runs(G, p, runs=cfg.runs, cap=cfg.cap, seed=cfg.seed)
            dt = time.perf_counter() - t0
            rows.append({"graph": name, "weakly_connected": wc, "protocol": p, **s.to_dict(), "seconds": round(dt, 2)})
            print(
                f"{name:12s} {p:4s} success={s.success_rate:6.1%}  stuck={s.stuck_runs:5d}  capped={s.capped_runs:5d}  "
                f"longest={s.max_calls_observed:6d}  {dt:6.2f}s",
                flush=True,
            )
    save("fair_runs", cfg, rows)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

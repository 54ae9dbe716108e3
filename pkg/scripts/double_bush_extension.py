"""Add one node to the five-agent double bush and see which attachments keep
the graph LNS-unsuccessful."""

from __future__ import annotations

from dataclasses import dataclass

from common import parse_config, save
from dyngossip.classify import classify
from dyngossip.core import make_initial
from dyngossip.explorer import decide_success
from dyngossip.verifier import builtin_graph


@dataclass
class Config:
    """Attach a new agent f to doublebush5 by one edge in either direction,
    then also try every single extra edge between the original agents."""

    extra_edges: bool = True


def main(argv=None):
    cfg = parse_config(Config, argv)
    base = builtin_graph("doublebush5")
    n = base.n
    names = list(base.names) + ["f"]
    cases = []
    for v in range(n):
        cases.append((f"f>{names[v]}", base.edges() + [(n, v)], n + 1))
        cases.append((f"{names[v]}>f", base.edges() + [(v, n)], n + 1))
    if cfg.extra_edges:
        for x in range(n):
            for y in range(n):
                if x != y and (x, y) not in base.edges():
                    cases.append((f"{names[x]}>{names[y]}", base.edges() + [(x, y)], n))
    rows = []
    for label, edges, size in cases:
        G = make_initial(size, edges, names[:size])
        c = classify(G)
        r = decide_success(G, "lns")
        rows.append(
            {
                "added": label,
                "agents": size,
                "double_bush": c.double_bush,
                "bush": c.bush,
                "verdict": r.verdict,
                "witness": None if r.witness is None else r.witness.format(G.names),
            }
        )
        agree = (r.verdict == "unsuccessful") == (c.bush or c.double_bush or not c.weakly_connected)
        print(f"{label:6s} n={size}  double_bush={c.double_bush!s:5s}  {r.verdict:24s}  {'ok' if agree else 'MISMATCH'}", flush=True)
    save("double_bush_extension", cfg, rows)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

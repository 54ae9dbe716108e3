"""Shared plumbing for the experiment scripts: dataclass configs with
command-line overrides, and JSON result files."""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time
from pathlib import Path

RESULTS = Path(__file__).resolve().parent.parent / "results"


def parse_config(cls, argv=None):
    """Build ``cls`` from its defaults, overridden by ``--field value`` flags."""
    p = argparse.ArgumentParser(description=(cls.__doc__ or "").strip())
    for f in dataclasses.fields(cls):
        default = f.default if f.default is not dataclasses.MISSING else f.default_factory()
        flag = "--" + f.name.replace("_", "-")
        if isinstance(default, bool):
            p.add_argument(flag, action=argparse.BooleanOptionalAction, default=default)
        elif isinstance(default, (list, tuple)):
            kind = type(default[0]) if default else str
            p.add_argument(flag, nargs="+", type=kind, default=list(default))
        else:
            p.add_argument(flag, type=lambda s, t=type(default): t(int(s, 0)) if t is int else t(s), default=default)
    return cls(**vars(p.parse_args(argv)))


def save(name: str, config, payload) -> Path:
    RESULTS.mkdir(exist_ok=True)
    path = RESULTS / f"{name}.json"
    record = {
        "experiment": name,
        "config": dataclasses.asdict(config),
        "created": time.strftime("%Y-%m-%dT%H:%M:%S"),
        "results": payload,
    }
    path.write_text(json.dumps(record, indent=2, ensure_ascii=False) + "\n")
    print(f"wrote {path}", file=sys.stderr)
    return path

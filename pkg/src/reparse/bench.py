"""Benchmark loop: run engines over generated instances, emit JSON lines.

Each case runs under its own ledger, so the records carry the tracked peak
workspace and its category breakdown alongside wall time.  A case that
raises is recorded (match false, an "error" marker in the breakdown) and
the run continues.
"""

from __future__ import annotations

import json
import sys
import time
from dataclasses import dataclass

from .engine import parse
from .gen import gen_instance
from .ledger import CATEGORIES, SpaceLedger
from .syntax import literal_count, parse_pattern


@dataclass
class BenchRecord:
    engine: str
    n: int
    m: int
    t: int | None
    seed: int
    millis: float
    peak_bytes: int
    by_category: dict
    match: bool

    def to_json(self) -> str:
        return json.dumps(
            {
                "engine": self.engine,
                "n": self.n,
                "m": self.m,
                "t": self.t,
                "seed": self.seed,
                "millis": self.millis,
                "peak_bytes": self.peak_bytes,
                "by_category": self.by_category,
                "match": self.match,
            },
            separators=(",", ":"),
        )

    @classmethod
    def from_json(cls, line: str) -> "BenchRecord":
        return cls(**json.loads(line))


def run_case(engine: str, n_target: int, m_target: int, seed: int,
             t: int = None) -> BenchRecord:
    inst = gen_instance(seed, m_target, n_target)
    ledger = SpaceLedger()
    m_actual = literal_count(parse_pattern(inst.pattern))
    t_used = t if engine == "bitparallel" else None
    start = time.perf_counter()
    try:
        result = parse(inst.pattern, inst.text, engine, t=t_used, ledger=ledger)
        matched = result is not None
        by_category = dict(ledger.peak_by_category)
    except Exception as exc:  # noqa: BLE001 - record and continue
        print(f"bench case failed ({engine}, seed {seed}): {exc!r}", file=sys.stderr)
        matched = False
        by_category = dict.fromkeys(CATEGORIES, 0)
        by_category["error"] = 1
    millis = (time.perf_counter() - start) * 1000.0
    return BenchRecord(
        engine=engine,
        n=len(inst.text),
        m=m_actual,
        t=t_used,
        seed=seed,
        millis=millis,
        peak_bytes=ledger.peak,
        by_category=by_category,
        match=matched,
    )


def bench(engines, n_targets, m_targets, seeds, t: int = None):
    """Yield one record per (engine, n, m, seed) combination."""
    from .bitparallel import DEFAULT_T

    for engine in engines:
        t_used = (t if t is not None else DEFAULT_T) if engine == "bitparallel" else None
        for n_target in n_targets:
            for m_target in m_targets:
                for seed in range(seeds):
                    yield run_case(engine, n_target, m_target, seed, t_used)

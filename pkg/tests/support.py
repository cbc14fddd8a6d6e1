"""Shared state for the acceptance suite: a solve cache and the criterion log."""

from __future__ import annotations

import json
import time
from functools import lru_cache

from tnn.cli import report_to_document
from tnn.fixtures import FIXTURES, nonsym_example
from tnn.norms import NormReport, Options, nuclear_norm, nuclear_norm_nonsym3

SEED = 0
LINES: list[str] = []


def record(label: str, ok: bool, detail: str = "") -> None:
    """Log one criterion line; the terminal summary replays them."""
    line = f"{'PASS' if ok else 'FAIL'}  {label}" + (f"  ({detail})" if detail else "")
    LINES.append(line)
    print(line)


class Checks:
    """Collects failed sub-checks of one criterion."""

    def __init__(self):
        self.failed: list[str] = []
        self.count = 0

    def __call__(self, ok: bool, what: str) -> bool:
        self.count += 1
        if not ok:
            self.failed.append(what)
        return ok

    @property
    def ok(self) -> bool:
        return not self.failed

    def detail(self) -> str:
        return f"{self.count} checks" if self.ok else "; ".join(self.failed[:6])


def fresh(name: str, field: str) -> tuple[NormReport, float]:
    """Solve a fixture (or the nonsymmetric example) without the cache."""
    opts = Options(seed=SEED)
    t0 = time.perf_counter()
    if name == "nonsym":
        rep = nuclear_norm_nonsym3(nonsym_example(), opts=opts)
    else:
        rep = nuclear_norm(FIXTURES[name].tensor(), field, opts)
    return rep, time.perf_counter() - t0


@lru_cache(maxsize=None)
def solved(name: str, field: str) -> tuple[NormReport, float]:
    return fresh(name, field)


def document(rep: NormReport) -> str:
    return json.dumps(report_to_document(rep, SEED, Options(seed=SEED)), sort_keys=True)


def suite() -> list[tuple[str, str]]:
    """Every (fixture, field) pair with a reference value, plus the nonsymmetric example."""
    out = []
    for name, fx in FIXTURES.items():
        for field, ref in (("real", fx.real), ("complex", fx.complex)):
            if ref is not None:
                out.append((name, field))
    return out + [("nonsym", "real")]

"""Monte-Carlo sweep: solve many random instances per (d, k) cell."""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from statistics import median

import numpy as np

from .instances import DEGENERACIES, gen_degenerate, gen_random
from .solver import SolveFailed, SolverConfig, solve

__all__ = ["SweepRow", "CellSummary", "SweepReport", "derive_seed", "parse_cells", "run_sweep"]

_KIND_CODE = {"random": 0, **{k: i + 1 for i, k in enumerate(DEGENERACIES)}}


def derive_seed(seed: int, d: int, k: int, kind: str, trial: int) -> int:
    ss = np.random.SeedSequence([seed, d, k, _KIND_CODE[kind], trial])
    return int(ss.generate_state(1, dtype=np.uint32)[0])


def parse_cells(text: str) -> list[tuple[int, int]]:
    """``"2:1,3:1"`` -> ``[(2, 1), (3, 1)]``."""
    cells = []
    for item in filter(None, (s.strip() for s in text.split(","))):
        try:
            d, k = (int(v) for v in item.split(":"))
        except ValueError:
            raise ValueError(f"bad cell {item!r}, expected d:k") from None
        if not 0 <= k < d:
            raise ValueError(f"bad cell {item!r}, need 0 <= k < d")
        cells.append((d, k))
    return cells


@dataclass
class SweepRow:
    d: int
    k: int
    kind: str
    trial: int
    seed: int
    success: bool
    residual: float
    restarts: int
    strategy: str
    elapsed: float = 0.0

    def record(self, timing=False):
        out = {"d": self.d, "k": self.k, "kind": self.kind, "trial": self.trial,
               "seed": self.seed, "success": self.success, "residual": self.residual,
               "restarts": self.restarts, "strategy": self.strategy}
        if timing:
            out["elapsed"] = self.elapsed
        return out


@dataclass
class CellSummary:
    d: int
    k: int
    seed: int
    rows: list = field(default_factory=list)

    @property
    def trials(self):
        return len(self.rows)

    @property
    def successes(self):
        return sum(r.success for r in self.rows)

    @property
    def failures(self):
        return self.trials - self.successes

    def _stats(self, values):
        if not values:
            return None
        return {"min": min(values), "median": median(values), "max": max(values)}

    @property
    def residual(self):
        return self._stats([r.residual for r in self.rows])

    @property
    def restarts(self):
        vals = [r.restarts for r in self.rows]
        if not vals:
            return None
        return {"min": min(vals), "mean": sum(vals) / len(vals), "max": max(vals), "total": sum(vals)}

    @property
    def mean_time(self):
        return sum(r.elapsed for r in self.rows) / self.trials if self.rows else 0.0

    def record(self, timing=False):
        out = {"d": self.d, "k": self.k, "seed": self.seed, "trials": self.trials,
               "successes": self.successes, "failures": self.failures,
               "residual": self.residual, "restarts": self.restarts}
        if timing:
            out["mean_time"] = self.mean_time
        return out


@dataclass
class SweepReport:
    seed: int
    config: dict
    cells: list

    @property
    def failures(self):
        return sum(c.failures for c in self.cells)

    @property
    def rows(self):
        return [r for c in self.cells for r in c.rows]

    def to_json(self, timing=False) -> dict:
        """Machine-readable form; stable across runs unless ``timing``."""
        return {
            "seed": self.seed,
            "config": self.config,
            "cells": [c.record(timing) for c in self.cells],
            "rows": [r.record(timing) for r in self.rows],
        }

    def text_lines(self):
        yield f"sweep seed={self.seed} cells={len(self.cells)} rows={len(self.rows)}"
        for c in self.cells:
            res = c.residual
            rs = c.restarts
            head = f"cell {c.d}:{c.k} trials={c.trials} successes={c.successes} failures={c.failures}"
            if res is None:
                yield head
                continue
            yield (f"{head} residual[min/median/max]={res['min']:.3e}/{res['median']:.3e}/"
                   f"{res['max']:.3e} restarts[mean/max]={rs['mean']:.2f}/{rs['max']} "
                   f"mean_time={c.mean_time:.3f}s")
        for r in self.rows:
            if not r.success:
                yield (f"FAIL {r.d}:{r.k} kind={r.kind} trial={r.trial} seed={r.seed} "
                       f"residual={r.residual:.3e}")
        yield f"total failures: {self.failures}"


def _trial(d, k, kind, trial, seed, distribution, cfg):
    s = derive_seed(seed, d, k, kind, trial)
    if kind == "random":
        inst = gen_random(d, k, distribution, seed=s)
    else:
        inst = gen_degenerate(d, k, kind, seed=s)
    t0 = time.monotonic()
    try:
        cert = solve(inst, replace(cfg, seed=s))
        ok, res = True, float(cert.residual)
        restarts = int(cert.meta.get("restarts", 0))
        strategy = str(cert.meta.get("strategy", "?"))
    except SolveFailed as fail:
        ok, res = False, float(fail.report.best_residual)
        restarts, strategy = fail.report.restarts, "failed"
    return SweepRow(d, k, kind, trial, s, ok, res, restarts, strategy, time.monotonic() - t0)


def run_sweep(cells, trials: int, seed: int = 42, config: SolverConfig | None = None,
              degenerate: int = 0, distribution: str = "unit-cube", progress=None) -> SweepReport:
    """``trials`` random instances plus ``degenerate`` of each degenerate kind per cell."""
    cfg = config or SolverConfig()
    if trials < 0 or degenerate < 0:
        raise ValueError("trial counts must be nonnegative")
    summaries = []
    for d, k in cells:
        cell = CellSummary(d, k, seed)
        jobs = [("random", t) for t in range(trials)]
        jobs += [(kind, t) for kind in DEGENERACIES for t in range(degenerate)]
        for kind, t in jobs:
            row = _trial(d, k, kind, t, seed, distribution, cfg)
            cell.rows.append(row)
            if progress is not None:
                progress(row)
        summaries.append(cell)
    conf = {"strategy": cfg.strategy, "restarts": cfg.restarts, "max_iters": cfg.max_iters,
            "tol_success": cfg.tol_success, "time_budget": cfg.time_budget,
            "threads": cfg.threads, "distribution": distribution,
            "trials": trials, "degenerate": degenerate}
    return SweepReport(seed, conf, summaries)

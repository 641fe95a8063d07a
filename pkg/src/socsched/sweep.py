"""Frame-rate sweeps: many independent seeded simulations, averaged per cell."""
from __future__ import annotations

import dataclasses
import math
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .metrics import SweepPoint, average_points, saturation_point, sweep_point
from .model import Platform, WorkloadSpec
from .schedulers import SchedulerKind
from .sim import SimConfig, run


def default_reps(kind: SchedulerKind | str) -> int:
    return 3 if SchedulerKind.parse(str(getattr(kind, "value", kind))) == SchedulerKind.CP else 10


def log_rates(lo: float, hi: float, n: int = 18) -> list[float]:
    return [float(x) for x in np.geomspace(lo, hi, n)]


@dataclass(frozen=True)
class Cell:
    scheduler: str
    rate: float
    rep: int


@dataclass
class CellResult:
    cell: Cell
    point: SweepPoint | None
    error: str | None = None
    sched_wall: float = 0.0


@dataclass
class SweepResult:
    points: dict[str, list[SweepPoint]] = field(default_factory=dict)
    failures: list[CellResult] = field(default_factory=list)
    runs: int = 0

    def saturation(self, tol: float = 0.05) -> dict[str, float]:
        return {k: saturation_point(v, tol).rate for k, v in self.points.items() if len(v) >= 2}

    def all_points(self) -> list[SweepPoint]:
        return [p for k in self.points for p in self.points[k]]


def rep_seed(base_seed: int, rep: int) -> int:
    """Seed of repetition ``rep``; shared by every scheduler so cells are paired."""
    return base_seed * 1_000_003 + rep


def _run_cell(platform: Platform, workload: WorkloadSpec, cfg: SimConfig, cell: Cell) -> CellResult:
    try:
        wl = workload.replace(target_frame_rate=cell.rate, seed=rep_seed(workload.seed, cell.rep))
        res = run(platform, wl, cell.scheduler, dataclasses.replace(cfg, seed=None))
        wall = sum(c.wall for c in res.scheduler_calls)
        return CellResult(cell, sweep_point(res, platform), None, wall)
    except Exception as exc:  # recorded per cell; the sweep goes on
        return CellResult(cell, None, f"{type(exc).__name__}: {exc}\n{traceback.format_exc(limit=3)}")


def run_sweep(
    platform: Platform,
    workload: WorkloadSpec,
    schedulers: Sequence[str],
    rates: Sequence[float],
    reps: int | dict[str, int] | None = None,
    config: SimConfig | None = None,
    jobs: int = 1,
) -> SweepResult:
    """Run every (scheduler, rate, rep) cell and average repetitions per (scheduler, rate).

    The arrival trace of a cell depends only on (workload seed, rep, rate), so all
    schedulers see the same frames. Results are collected in a fixed order
    regardless of ``jobs``.
    """
    if not rates:
        raise ValueError("rates must be non-empty")
    cfg = config or SimConfig()
    kinds = [SchedulerKind.parse(s).value for s in schedulers]
    rates = sorted(float(r) for r in rates)

    def n_reps(k):
        if reps is None:
            return default_reps(k)
        if isinstance(reps, dict):
            return reps.get(k, default_reps(k))
        return reps

    cells = [Cell(k, r, i) for k in kinds for r in rates for i in range(n_reps(k))]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_run_cell, [platform] * len(cells), [workload] * len(cells),
                                  [cfg] * len(cells), cells, chunksize=1))
    else:
        results = [_run_cell(platform, workload, cfg, c) for c in cells]

    out = SweepResult(runs=len(cells))
    for k in kinds:
        pts = []
        for r in rates:
            group = [res for res in results if res.cell.scheduler == k and res.cell.rate == r]
            ok = [res.point for res in group if res.point is not None]
            out.failures.extend(res for res in group if res.point is None)
            if ok:
                pts.append(average_points(ok))
            else:
                pts.append(SweepPoint(k, r, math.nan, math.nan, math.nan))
        out.points[k] = pts
    return out

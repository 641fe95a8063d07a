"""Evaluation quantities derived from simulation results."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .model import Platform
from .sim import SimResult

CSV_HEADER = (
    "scheduler", "target_rate", "achieved_rate", "avg_exec",
    "energy_dynamic", "energy_static", "energy_total", "energy_per_frame",
)


@dataclass(frozen=True)
class SweepPoint:
    scheduler: str
    target_rate: float
    achieved_rate: float
    avg_frame_exec_time: float
    total_energy_j: float
    energy_dynamic: float = 0.0
    energy_static: float = 0.0
    frames_completed: int = 0

    @property
    def energy_per_frame(self) -> float:
        return self.total_energy_j / self.frames_completed if self.frames_completed else math.nan


@dataclass(frozen=True)
class Saturation:
    rate: float
    saturated_everywhere: bool = False


@dataclass(frozen=True)
class Energy:
    dynamic: float
    static: float

    @property
    def total(self) -> float:
        return self.dynamic + self.static


def completed_in_window(result: SimResult) -> int:
    return sum(1 for f in result.frames if f.done and f.completion_time <= result.duration)


def achieved_rate(result: SimResult) -> float:
    """Frames completed within the simulated duration, per time unit."""
    if result.duration <= 0:
        return 0.0
    return completed_in_window(result) / result.duration


def avg_frame_exec(result: SimResult) -> float:
    """Mean of completion - injection over every completed frame, drain included."""
    done = [f.exec_time for f in result.frames if f.done]
    if not done:
        raise ValueError("no completed frames")
    return sum(done) / len(done)


def total_energy(result: SimResult, platform: Platform) -> Energy:
    """Dynamic energy from the busy log plus idle power over the configured duration."""
    dynamic = 0.0
    for rows in result.pe_busy.values():
        for b in rows:
            dynamic += (b.end - b.start) * b.power
    static = sum(pe.idle_power for pe in platform.pes) * result.duration
    return Energy(dynamic, static)


def sweep_point(result: SimResult, platform: Platform) -> SweepPoint:
    done = [f for f in result.frames if f.done]
    e = total_energy(result, platform)
    return SweepPoint(
        result.scheduler,
        result.target_rate,
        achieved_rate(result),
        avg_frame_exec(result) if done else math.nan,
        e.total,
        e.dynamic,
        e.static,
        completed_in_window(result),
    )


def average_points(points: Sequence[SweepPoint]) -> SweepPoint:
    """Mean over repetitions of one sweep cell (NaN exec times are skipped)."""
    if not points:
        raise ValueError("no points to average")
    n = len(points)
    execs = [p.avg_frame_exec_time for p in points if not math.isnan(p.avg_frame_exec_time)]
    return SweepPoint(
        points[0].scheduler,
        points[0].target_rate,
        sum(p.achieved_rate for p in points) / n,
        sum(execs) / len(execs) if execs else math.nan,
        sum(p.total_energy_j for p in points) / n,
        sum(p.energy_dynamic for p in points) / n,
        sum(p.energy_static for p in points) / n,
        round(sum(p.frames_completed for p in points) / n),
    )


def saturation_point(sweep: Sequence[SweepPoint], tol: float = 0.05) -> Saturation:
    """Largest achieved rate among points still tracking their target within ``tol``.

    If no point tracks its target, returns the maximum achieved rate with the
    ``saturated_everywhere`` flag set.
    """
    if len(sweep) < 2:
        raise ValueError("need at least two sweep points")
    targets = [p.target_rate for p in sweep]
    if targets != sorted(targets):
        raise ValueError("sweep must be sorted by target rate")
    ok = [p.achieved_rate for p in sweep if p.achieved_rate >= (1 - tol) * p.target_rate]
    if ok:
        return Saturation(max(ok))
    return Saturation(max(p.achieved_rate for p in sweep), True)


@dataclass(frozen=True)
class Improvement:
    base: str
    other: str
    metric: str
    avg_pct: float
    max_pct: float


def improvement(base: Sequence[float], other: Sequence[float]) -> tuple[float, float]:
    """Mean and max of 100 * (base - other) / base over paired values."""
    if len(base) != len(other) or not base:
        raise ValueError("improvement needs two equally long, non-empty vectors")
    pct = [100.0 * (b - o) / b for b, o in zip(base, other)]
    return sum(pct) / len(pct), max(pct)


_METRICS = {
    "avg_exec": lambda p: p.avg_frame_exec_time,
    "energy": lambda p: p.total_energy_j,
}


def improvement_table(
    results: Mapping[str, Sequence[SweepPoint]],
    pairs: Iterable[tuple[str, str]] | None = None,
    metrics: Sequence[str] = ("avg_exec", "energy"),
) -> list[Improvement]:
    """Avg% / Max% improvement of each ``other`` over ``base`` per metric.

    ``pairs`` defaults to every ordered pair of distinct schedulers, in the
    order the mapping lists them.
    """
    names = list(results)
    if pairs is None:
        pairs = [(a, b) for a in names for b in names if a != b]
    out = []
    for base, other in pairs:
        bs, os_ = results[base], results[other]
        if [p.target_rate for p in bs] != [p.target_rate for p in os_]:
            raise ValueError(f"target-rate grids of {base!r} and {other!r} differ")
        for m in metrics:
            get = _METRICS[m]
            avg, mx = improvement([get(p) for p in bs], [get(p) for p in os_])
            out.append(Improvement(base, other, m, avg, mx))
    return out


def format_improvement_table(rows: Sequence[Improvement]) -> str:
    lines = ["base,other,metric,avg_pct,max_pct"]
    lines += [f"{r.base},{r.other},{r.metric},{r.avg_pct:.3f},{r.max_pct:.3f}" for r in rows]
    return "\n".join(lines) + "\n"


def sweep_csv(points: Iterable[SweepPoint]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for p in points:
        w.writerow([p.scheduler, repr(p.target_rate), repr(p.achieved_rate), repr(p.avg_frame_exec_time),
                    repr(p.energy_dynamic), repr(p.energy_static), repr(p.total_energy_j),
                    repr(p.energy_per_frame)])
    return buf.getvalue()

"""List-scheduling building blocks shared by every scheduler."""
from __future__ import annotations

import bisect
import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Mapping, Sequence

from .model import AppDag, CycleError, Platform, TaskNode, mean_exec_time, mean_power, topological_sort

RANK_TOL = 1e-9
TIME_TOL = 1e-9


@dataclass(frozen=True)
class Assignment:
    task: Hashable
    pe: int
    start: float
    end: float


@dataclass
class ScheduleTable:
    assignments: dict[Hashable, Assignment] = field(default_factory=dict)
    dynamic_deps: set[tuple[Hashable, Hashable]] = field(default_factory=set)

    def add(self, a: Assignment) -> None:
        self.assignments[a.task] = a

    @property
    def makespan(self) -> float:
        if not self.assignments:
            return 0.0
        return max(a.end for a in self.assignments.values()) - min(a.start for a in self.assignments.values())

    @property
    def finish(self) -> float:
        return max((a.end for a in self.assignments.values()), default=0.0)

    def by_pe(self) -> dict[int, list[Assignment]]:
        out: dict[int, list[Assignment]] = {}
        for a in self.assignments.values():
            out.setdefault(a.pe, []).append(a)
        for rows in out.values():
            rows.sort(key=lambda a: (a.start, a.end))
        return out


@dataclass
class PeTimeline:
    """Sorted, disjoint busy intervals of one PE.

    ``copy`` is copy-on-write: both timelines share the interval list until
    either one inserts.
    """

    pe: int
    busy: list[tuple[float, float, Hashable]] = field(default_factory=list)
    _shared: bool = field(default=False, repr=False, compare=False)

    def insert(self, start: float, end: float, task: Hashable) -> None:
        if self._shared:
            self.busy = list(self.busy)
            self._shared = False
        bisect.insort(self.busy, (start, end, task), key=lambda iv: (iv[0], iv[1]))

    def remove(self, start: float, end: float, task: Hashable) -> None:
        if self._shared:
            self.busy = list(self.busy)
            self._shared = False
        self.busy.remove((start, end, task))

    @property
    def available(self) -> float:
        return self.busy[-1][1] if self.busy else 0.0

    def copy(self) -> "PeTimeline":
        self._shared = True
        return PeTimeline(self.pe, self.busy, True)


def empty_timelines(platform: Platform) -> dict[int, PeTimeline]:
    return {k: PeTimeline(k) for k in range(platform.n_pes)}


def tie_key(task: Hashable) -> tuple:
    """Smaller task id first, then smaller DAG instance."""
    if isinstance(task, tuple):
        return (task[1], task[0])
    return (task, 0)


def rank_order(ranks: Mapping[Hashable, float]) -> list[Hashable]:
    """Tasks by non-increasing rank; ranks within RANK_TOL count as equal."""
    items = sorted(ranks.items(), key=lambda kv: (-kv[1], tie_key(kv[0])))
    # stable fix-up so that near-equal ranks fall back to the id tie-break
    out: list[Hashable] = []
    i = 0
    while i < len(items):
        j = i + 1
        while j < len(items) and items[i][1] - items[j][1] <= RANK_TOL:
            j += 1
        out.extend(sorted((k for k, _ in items[i:j]), key=tie_key))
        i = j
    return out


# --------------------------------------------------------------------------
# ranking


def _upward(dag: AppDag, platform: Platform, weight: Callable[[TaskNode], float]) -> dict[Hashable, float]:
    mean_bw = platform.mean_bandwidth
    single = platform.n_pes == 1
    rank: dict[Hashable, float] = {}
    for tid in reversed(dag.topo_order):
        best = 0.0
        for succ, vol in dag.succs[tid]:
            c = 0.0 if single or vol == 0 else vol / mean_bw
            best = max(best, c + rank[succ])
        rank[tid] = weight(dag.task_map[tid]) + best
    return rank


def upward_rank(dag: AppDag, platform: Platform) -> dict[Hashable, float]:
    return _upward(dag, platform, mean_exec_time)


def upward_rank_edp(dag: AppDag, platform: Platform) -> dict[Hashable, float]:
    """Upward rank with node weight mean_exec^2 * mean_power (energy-delay product)."""
    return _upward(dag, platform, edp_weight)


def edp_weight(task: TaskNode) -> float:
    return mean_exec_time(task) ** 2 * mean_power(task)


# --------------------------------------------------------------------------
# slot search


class MissingParentError(KeyError):
    pass


def earliest_start(
    preds: Iterable[tuple[Hashable, float]],
    pe: int,
    table: ScheduleTable | None,
    parent_finish: Mapping[Hashable, tuple[float, int]],
    platform: Platform,
    now: float = 0.0,
) -> float:
    """Time at which all parent data has reached ``pe``, never earlier than ``now``.

    Parents are looked up first in ``table`` (tasks placed in this invocation),
    then in ``parent_finish`` (running or completed tasks: finish time and PE).
    """
    t = now
    for parent, vol in preds:
        a = table.assignments.get(parent) if table is not None else None
        if a is not None:
            fin, ppe = a.end, a.pe
        else:
            try:
                fin, ppe = parent_finish[parent]
            except KeyError:
                raise MissingParentError(f"no finish time known for parent {parent!r}") from None
        arr = fin + platform.comm_time(vol, ppe, pe)
        if arr > t:
            t = arr
    return t


def eft_insertion(duration: float, timeline: PeTimeline, ready: float) -> tuple[float, float]:
    """Earliest [start, start+duration) with start >= ready fitting an idle gap or the tail.

    Candidate starts are ``ready`` and the end of each busy interval. The
    timeline is not modified.
    """
    start = ready
    busy = timeline.busy
    # intervals are disjoint and sorted, so their ends are sorted too
    first = bisect.bisect_right(busy, ready, key=lambda iv: iv[1])
    for s, e, _ in itertools.islice(busy, first, None):
        if start + duration <= s:
            break
        if e > start:
            start = e
    return start, start + duration


def exec_on(task: TaskNode, pe: int) -> float:
    t = task.exec_time[pe]
    if t is None:
        raise ValueError(f"task {task.id!r} is not supported on PE {pe}")
    return t


# --------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class Violation:
    kind: str
    detail: str

    def __str__(self) -> str:
        return f"{self.kind}: {self.detail}"


def _overlaps(rows: Sequence[tuple[float, float, Hashable]]) -> list[Violation]:
    out = []
    rows = sorted(rows, key=lambda r: (r[0], r[1]))
    for (s1, e1, a), (s2, e2, b) in zip(rows, rows[1:]):
        if s2 < e1 - TIME_TOL and e2 > s2 and e1 > s1:
            out.append(Violation("overlap", f"{a!r} [{s1}, {e1}) overlaps {b!r} [{s2}, {e2})"))
    return out


def validate_schedule(
    table: ScheduleTable,
    dags: Sequence[AppDag],
    platform: Platform,
    running: Iterable[Assignment] = (),
    parent_finish: Mapping[Hashable, tuple[float, int]] | None = None,
    now: float | None = None,
    full_dags: Mapping[Hashable, AppDag] | None = None,
) -> list[Violation]:
    """Check a schedule table; an empty list means the schedule is valid.

    ``dags`` are the (possibly partial) DAGs whose tasks the table must cover.
    For partial DAGs, ``full_dags`` maps instance -> complete DAG so that edges from
    already finished parents (given in ``parent_finish``) are also checked.
    """
    out: list[Violation] = []
    running = list(running)
    parent_finish = dict(parent_finish or {})
    for r in running:
        parent_finish.setdefault(r.task, (r.end, r.pe))
    node_of: dict[Hashable, TaskNode] = {}
    for dag in dags:
        for t in dag.tasks:
            node_of[dag.key(t.id)] = t

    for key, node in node_of.items():
        a = table.assignments.get(key)
        if a is None:
            out.append(Violation("unassigned", f"{key!r} has no assignment"))
            continue
        if not node.supports(a.pe):
            out.append(Violation("unsupported", f"{key!r} placed on PE {a.pe} which cannot run it"))
            continue
        if not math.isclose(a.end - a.start, node.exec_time[a.pe], rel_tol=1e-9, abs_tol=TIME_TOL):
            out.append(Violation("duration", f"{key!r} length {a.end - a.start} != {node.exec_time[a.pe]}"))
        if now is not None and a.start < now - TIME_TOL:
            out.append(Violation("past", f"{key!r} starts at {a.start} before now={now}"))
    for key in table.assignments:
        if key not in node_of:
            out.append(Violation("unknown", f"assignment for unknown task {key!r}"))

    per_pe: dict[int, list] = {}
    for a in table.assignments.values():
        per_pe.setdefault(a.pe, []).append((a.start, a.end, a.task))
    for r in running:
        per_pe.setdefault(r.pe, []).append((r.start, r.end, r.task))
    for pe in sorted(per_pe):
        out.extend(_overlaps(per_pe[pe]))

    def finish_of(key):
        a = table.assignments.get(key)
        if a is not None:
            return a.end, a.pe
        return parent_finish.get(key)

    dep_edges: list[tuple[Hashable, Hashable]] = []
    for dag in dags:
        source = dag
        if full_dags is not None and dag.instance in full_dags:
            source = full_dags[dag.instance]
        for t in dag.tasks:
            dst = dag.key(t.id)
            a = table.assignments.get(dst)
            for parent, vol in source.preds[t.id]:
                src = dag.key(parent)
                if parent in dag.task_map:
                    dep_edges.append((src, dst))
                if a is None:
                    continue
                fin = finish_of(src)
                if fin is None:
                    if parent in dag.task_map:
                        continue  # reported as unassigned
                    out.append(Violation("precedence", f"parent {src!r} of {dst!r} has no known finish"))
                    continue
                need = fin[0] + platform.comm_time(vol, fin[1], a.pe)
                if a.start < need - TIME_TOL:
                    out.append(Violation(
                        "precedence", f"{dst!r} starts at {a.start} before parent {src!r} data at {need}"))

    for a, b in table.dynamic_deps:
        if a in table.assignments and b in table.assignments:
            if table.assignments[b].start < table.assignments[a].end - TIME_TOL:
                out.append(Violation("dynamic_dep", f"{b!r} starts before dynamic predecessor {a!r} ends"))
    nodes = list(node_of)
    known = set(nodes)
    all_edges = [(a, b) for a, b in dep_edges] + [
        (a, b) for a, b in table.dynamic_deps if a in known and b in known
    ]
    try:
        topological_sort(nodes, all_edges)
    except CycleError as exc:
        out.append(Violation("cycle", f"dependency cycle among {exc.nodes}"))
    return out

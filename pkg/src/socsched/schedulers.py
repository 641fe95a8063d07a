"""The scheduler family.

Whole-DAG schedulers (``heft_base``, ``heft_dyn``, ``peft_base``, ``cp``) run when a
frame is injected and produce a lookup table for the dispatcher. Ready-queue
schedulers (``met``, ``heft_rt``, ``heft_edp``, ``heft_edp_lb``, ``peft_rt``) run at
scheduling epochs and only see independent ready tasks.
"""
from __future__ import annotations

import enum
import heapq
from dataclasses import dataclass, field
from typing import Callable, Hashable, Mapping, Sequence

from .core import (
    Assignment,
    PeTimeline,
    ScheduleTable,
    earliest_start,
    edp_weight,
    eft_insertion,
    empty_timelines,
    rank_order,
    upward_rank,
)
from .model import AppDag, Edge, Platform, TaskNode, mean_exec_time, topological_sort

TaskKey = tuple[int, Hashable]

ENTRY: TaskKey = (-1, -1)
EXIT: TaskKey = (-1, -2)


class SchedulerKind(str, enum.Enum):
    MET = "met"
    HEFT_BASE = "heft_base"
    HEFT_DYN = "heft_dyn"
    HEFT_RT = "heft_rt"
    HEFT_EDP = "heft_edp"
    HEFT_EDP_LB = "heft_edp_lb"
    PEFT_BASE = "peft_base"
    PEFT_RT = "peft_rt"
    CP = "cp"

    @property
    def whole_dag(self) -> bool:
        return self in WHOLE_DAG

    @classmethod
    def parse(cls, name: str) -> "SchedulerKind":
        try:
            return cls(name.lower())
        except ValueError:
            raise ValueError(
                f"unknown scheduler {name!r}; choose from {', '.join(k.value for k in cls)}"
            ) from None


WHOLE_DAG = frozenset({SchedulerKind.HEFT_BASE, SchedulerKind.HEFT_DYN, SchedulerKind.PEFT_BASE, SchedulerKind.CP})


@dataclass(frozen=True)
class ReadyTask:
    """A task whose predecessors have all finished.

    ``parents`` holds (finish time, PE, data volume) of each predecessor so that
    data-arrival time on any candidate PE can be computed.
    """

    key: TaskKey
    node: TaskNode
    parents: tuple[tuple[float, int, float], ...] = ()

    def data_ready(self, pe: int, platform: Platform, now: float) -> float:
        t = now
        for fin, ppe, vol in self.parents:
            t = max(t, fin + platform.comm_time(vol, ppe, pe))
        return t


@dataclass(frozen=True)
class FrameView:
    """The not-yet-started part of one frame (a partial DAG)."""

    instance: int
    dag: AppDag
    pending: frozenset

    def partial(self) -> AppDag:
        return self.dag.subgraph(self.pending).with_instance(self.instance)

    @classmethod
    def whole(cls, dag: AppDag, instance: int = 0) -> "FrameView":
        return cls(instance, dag, frozenset(t.id for t in dag.tasks))


@dataclass
class SchedulerInput:
    platform: Platform
    mode: str = "ready_queue"  # or "whole_dag"
    now: float = 0.0
    ready_tasks: Sequence[ReadyTask] = ()
    outstanding: Sequence[FrameView] = ()
    running: Sequence[Assignment] = ()
    timelines: dict[int, PeTimeline] | None = None
    parent_finish: dict[Hashable, tuple[float, int]] = field(default_factory=dict)

    def working_timelines(self) -> dict[int, PeTimeline]:
        if self.timelines is None:
            tls = empty_timelines(self.platform)
            for r in self.running:
                tls[r.pe].insert(r.start, r.end, r.task)
            return tls
        return _Copies(self.timelines)


class _Copies(dict):
    """Scratch copies of the given timelines, made on first access."""

    def __init__(self, source: Mapping[int, PeTimeline]):
        super().__init__()
        self.source = source

    def __missing__(self, pe: int) -> PeTimeline:
        tl = self[pe] = self.source[pe].copy()
        return tl


# --------------------------------------------------------------------------
# ready-queue schedulers


def met_schedule(inp: SchedulerInput) -> list[Assignment]:
    """FIFO over the ready queue; each task to its fastest PE, appended (no insertion)."""
    tls = inp.working_timelines()
    out = []
    for rt in inp.ready_tasks:
        times = rt.node.exec_time
        pe = min(rt.node.supported_pes, key=lambda k: (times[k], k))
        start = max(tls[pe].available, rt.data_ready(pe, inp.platform, inp.now))
        a = Assignment(rt.key, pe, start, start + times[pe])
        tls[pe].insert(a.start, a.end, a.task)
        out.append(a)
    return out


def _ready_order(tasks: Sequence[ReadyTask], weight: Callable[[ReadyTask], float]) -> list[ReadyTask]:
    if len(tasks) < 2:
        return list(tasks)
    by_key = {rt.key: rt for rt in tasks}
    return [by_key[k] for k in rank_order({rt.key: weight(rt) for rt in tasks})]


def _slots(rt: ReadyTask, inp: SchedulerInput, tls) -> list[tuple[int, float, float]]:
    out = []
    for pe in rt.node.supported_pes:
        ready = rt.data_ready(pe, inp.platform, inp.now)
        s, e = eft_insertion(rt.node.exec_time[pe], tls[pe], ready)
        out.append((pe, s, e))
    return out


def _commit(out: list, tls, rt: ReadyTask, pe: int, s: float, e: float) -> None:
    tls[pe].insert(s, e, rt.key)
    out.append(Assignment(rt.key, pe, s, e))


def heft_rt(inp: SchedulerInput) -> list[Assignment]:
    """Ready tasks by mean exec time (upward rank of successor-free tasks), min EFT PE."""
    tls = inp.working_timelines()
    out: list[Assignment] = []
    for rt in _ready_order(inp.ready_tasks, lambda r: mean_exec_time(r.node)):
        best = None
        for pe, s, e in _slots(rt, inp, tls):
            if best is None or e < best[2]:
                best = (pe, s, e)
        _commit(out, tls, rt, *best)
    return out


def _edp_pick(rt: ReadyTask, slots, ref_start: Callable[[float], float]):
    best = None
    best_edp = float("inf")
    for pe, s, e in slots:
        edp = (e - ref_start(s)) ** 2 * rt.node.power[pe]
        if edp < best_edp:
            best_edp, best = edp, (pe, s, e)
        elif edp == best_edp and e < best[2]:
            best = (pe, s, e)
    return best


def heft_edp(inp: SchedulerInput) -> list[Assignment]:
    """Per task, the PE whose slot minimises (end - start)^2 * power."""
    tls = inp.working_timelines()
    out: list[Assignment] = []
    for rt in _ready_order(inp.ready_tasks, lambda r: edp_weight(r.node)):
        slots = _slots(rt, inp, tls)
        _commit(out, tls, rt, *_edp_pick(rt, slots, lambda s: s))
    return out


def heft_edp_lb(inp: SchedulerInput) -> list[Assignment]:
    """Like heft_edp, but the delay is measured from the earliest start over all PEs."""
    tls = inp.working_timelines()
    out: list[Assignment] = []
    for rt in _ready_order(inp.ready_tasks, lambda r: edp_weight(r.node)):
        slots = _slots(rt, inp, tls)
        min_start = min(s for _, s, _ in slots)
        _commit(out, tls, rt, *_edp_pick(rt, slots, lambda s: min_start))
    return out


def peft_rt(inp: SchedulerInput, oct_rows: Mapping[TaskKey, Sequence[float]] | None = None) -> list[Assignment]:
    """Ready tasks by mean OCT row; PE minimising EFT + OCT. Missing rows count as zero."""
    oct_rows = oct_rows or {}
    tls = inp.working_timelines()

    def row(rt):
        return oct_rows.get(rt.key) or (0.0,) * inp.platform.n_pes

    out: list[Assignment] = []
    for rt in _ready_order(inp.ready_tasks, lambda r: _oct_rank(r.node, row(r))):
        r = row(rt)
        best = None
        for pe, s, e in _slots(rt, inp, tls):
            if best is None or e + r[pe] < best[2] + r[best[0]]:
                best = (pe, s, e)
        _commit(out, tls, rt, *best)
    return out


# --------------------------------------------------------------------------
# DAG merging and whole-DAG list scheduling


def merge_dags(partials: Sequence[AppDag], n_pes: int | None = None) -> AppDag:
    """Join partial DAGs under a common zero-cost entry and exit node.

    Nodes are re-keyed ``(instance, task_id)``; a partial without an instance tag
    uses its position in ``partials``.
    """
    if n_pes is None:
        widths = {d.n_pes for d in partials if d.tasks}
        if len(widths) != 1:
            raise ValueError("cannot infer PE count; pass n_pes")
        n_pes = widths.pop()
    zero = (0.0,) * n_pes
    tasks = [TaskNode(ENTRY, "entry", zero, zero)]
    edges = []
    for i, d in enumerate(partials):
        inst = d.instance if d.instance is not None else i
        for t in d.tasks:
            key = (inst, t.id)
            tasks.append(TaskNode(key, t.name, t.exec_time, t.power))
            if not d.preds[t.id]:
                edges.append(Edge(ENTRY, key, 0.0))
            if not d.succs[t.id]:
                edges.append(Edge(key, EXIT, 0.0))
        edges.extend(Edge((inst, e.src), (inst, e.dst), e.data_volume) for e in d.edges)
    tasks.append(TaskNode(EXIT, "exit", zero, zero))
    if len(tasks) == 2:
        edges.append(Edge(ENTRY, EXIT, 0.0))
    return AppDag("merged", tuple(tasks), tuple(edges))


def _plan(
    views: Sequence[FrameView],
    platform: Platform,
    ranks: Mapping[TaskKey, float],
    timelines: dict[int, PeTimeline],
    parent_finish: Mapping[Hashable, tuple[float, int]],
    now: float,
    score: Callable[[TaskKey, int, float, float], float] | None = None,
) -> ScheduleTable:
    """Rank-ordered list scheduling with insertion over the pending tasks of ``views``.

    Tasks are taken from a ready list in rank order (for upward rank this is the
    plain sorted order). Each goes to the PE minimising ``score`` (default: EFT);
    ties go to the lower PE index.
    """
    view_of = {v.instance: v for v in views}
    priority = {k: i for i, k in enumerate(rank_order(ranks))}
    table = ScheduleTable()
    missing: dict[TaskKey, int] = {}
    children: dict[TaskKey, list[TaskKey]] = {}
    ready = []
    for v in views:
        for tid in v.pending:
            key = (v.instance, tid)
            n = 0
            for p, _ in v.dag.preds[tid]:
                if p in v.pending:
                    n += 1
                    children.setdefault((v.instance, p), []).append(key)
            missing[key] = n
            if n == 0:
                ready.append(key)

    heap = [(priority[k], k) for k in ready]
    heapq.heapify(heap)
    while heap:
        _, key = heapq.heappop(heap)
        inst, tid = key
        v = view_of[inst]
        node = v.dag.task_map[tid]
        preds = [((inst, p), vol) for p, vol in v.dag.preds[tid]]
        best = None
        for pe in node.supported_pes:
            r = earliest_start(preds, pe, table, parent_finish, platform, now)
            s, e = eft_insertion(node.exec_time[pe], timelines[pe], r)
            val = e if score is None else score(key, pe, s, e)
            if best is None or val < best[0]:
                best = (val, pe, s, e)
        _, pe, s, e = best
        table.add(Assignment(key, pe, s, e))
        timelines[pe].insert(s, e, key)
        for c in children.get(key, ()):
            missing[c] -= 1
            if missing[c] == 0:
                heapq.heappush(heap, (priority[c], c))
    return table


def slot_order_deps(table: ScheduleTable, keys=None) -> set[tuple[Hashable, Hashable]]:
    """Dependencies forcing same-PE tasks to run in their planned order."""
    deps = set()
    for rows in table.by_pe().values():
        rows = [a for a in rows if keys is None or a.task in keys]
        for a, b in zip(rows, rows[1:]):
            deps.add((a.task, b.task))
    return deps


def _check_acyclic(views: Sequence[FrameView], table: ScheduleTable) -> None:
    nodes = list(table.assignments)
    edges = list(table.dynamic_deps)
    for v in views:
        for e in v.dag.edges:
            if e.src in v.pending and e.dst in v.pending:
                edges.append(((v.instance, e.src), (v.instance, e.dst)))
    topological_sort(nodes, edges)


def heft_base(dag: AppDag, platform: Platform, now: float = 0.0) -> ScheduleTable:
    """Classic HEFT on one DAG and an idle machine. Keys are ``dag.key(task_id)``."""
    inst = dag.instance if dag.instance is not None else 0
    view = FrameView.whole(dag, inst)
    ranks = {(inst, k): r for k, r in upward_rank(dag, platform).items()}
    table = _plan([view], platform, ranks, empty_timelines(platform), {}, now)
    return _rekey(table, dag)


def _rekey(table: ScheduleTable, dag: AppDag) -> ScheduleTable:
    if dag.instance is not None:
        return table
    out = ScheduleTable()
    for (_, tid), a in table.assignments.items():
        out.add(Assignment(tid, a.pe, a.start, a.end))
    out.dynamic_deps = {(a[1], b[1]) for a, b in table.dynamic_deps}
    return out


_RANK_CACHE: dict[tuple[int, int], tuple[AppDag, Platform, dict]] = {}


def dag_ranks(dag: AppDag, platform: Platform) -> dict[Hashable, float]:
    """Memoised ``upward_rank`` keyed on object identity."""
    hit = _RANK_CACHE.get((id(dag), id(platform)))
    if hit is not None and hit[0] is dag and hit[1] is platform:
        return hit[2]
    if len(_RANK_CACHE) > 256:
        _RANK_CACHE.clear()
    ranks = upward_rank(dag, platform)
    _RANK_CACHE[(id(dag), id(platform))] = (dag, platform, ranks)
    return ranks


def heft_dyn(
    inp: SchedulerInput,
    incoming: FrameView | None = None,
    *,
    merge: bool = True,
    running_constraints: bool = True,
    dynamic_deps: bool = True,
) -> ScheduleTable:
    """HEFT over the merged set of outstanding frames.

    ``merge`` schedules every pending task of every outstanding frame together with
    the incoming one (otherwise only the incoming frame). ``running_constraints``
    blocks PEs with the running tasks. ``dynamic_deps`` emits same-PE ordering
    edges; any previous ones are superseded by the returned table.
    With all three off this is HEFT_Base applied to the incoming frame.
    """
    views = list(inp.outstanding) if merge else []
    if incoming is not None and all(v.instance != incoming.instance for v in views):
        views.append(incoming)
    # The merge adds only zero-cost nodes and zero-volume edges, and a pending set
    # is closed under successors, so the upward rank of every pending task equals
    # its rank in the frame's full DAG; those are computed once per DAG.
    ranks = {}
    for v in views:
        full = dag_ranks(v.dag, inp.platform)
        for tid in v.pending:
            ranks[(v.instance, tid)] = full[tid]
    if running_constraints:
        tls = inp.working_timelines()
    else:
        tls = empty_timelines(inp.platform)
    table = _plan(views, inp.platform, ranks, tls, inp.parent_finish, inp.now)
    if dynamic_deps:
        table.dynamic_deps = slot_order_deps(table)
        _check_acyclic(views, table)
    return table


# --------------------------------------------------------------------------
# PEFT


def oct_table(dag: AppDag, platform: Platform) -> dict[Hashable, tuple[float, ...]]:
    """Optimistic cost table: per task, per PE, the optimistic remaining time to exit."""
    z = platform.n_pes
    mean_bw = platform.mean_bandwidth
    oct_: dict[Hashable, tuple[float, ...]] = {}
    for tid in reversed(dag.topo_order):
        row = []
        for pk in range(z):
            worst = 0.0
            for succ, vol in dag.succs[tid]:
                c = 0.0 if z == 1 or vol == 0 else vol / mean_bw
                node = dag.task_map[succ]
                best = min(
                    oct_[succ][pw] + node.exec_time[pw] + (c if pw != pk else 0.0)
                    for pw in node.supported_pes
                )
                worst = max(worst, best)
            row.append(worst)
        oct_[tid] = tuple(row)
    return oct_


def _oct_rank(node: TaskNode, row: Sequence[float]) -> float:
    sup = node.supported_pes
    return sum(row[k] for k in sup) / len(sup)


def peft_base(dag: AppDag, platform: Platform, now: float = 0.0) -> ScheduleTable:
    """PEFT on one DAG and an idle machine: rank by mean OCT, PE by min EFT + OCT."""
    inst = dag.instance if dag.instance is not None else 0
    view = FrameView.whole(dag, inst)
    table = _peft_plan(view, platform, oct_table(dag, platform), empty_timelines(platform), {}, now)
    return _rekey(table, dag)


def _peft_plan(view: FrameView, platform, octs, timelines, parent_finish, now) -> ScheduleTable:
    inst = view.instance
    ranks = {(inst, tid): _oct_rank(view.dag.task_map[tid], octs[tid]) for tid in view.pending}
    return _plan([view], platform, ranks, timelines, parent_finish, now,
                 score=lambda key, pe, s, e: e + octs[key[1]][pe])

"""Exact scheduling of a set of (partial) DAGs by depth-first branch and bound.

The model is the interval formulation used by CP schedulers: every task is an
interval placed on exactly one supporting PE (alternative), tasks sharing a PE do
not overlap (no_overlap, enforced per PE across all DAGs), a successor starts no
earlier than its predecessor's end plus the transfer delay (end_before_start),
and the objective is the sum over DAGs of their span (max end - min start).

Search space: every left-justified schedule, i.e. every assignment plus per-PE
execution order, with each task starting as soon as its PE and its input data
are available. That is exactly the set of schedules a dispatcher honouring
per-PE order can execute. Branching picks a ready task and a PE and appends the
task to that PE, so placed tasks never move and the span of every DAG can only
grow; this makes the partial objective a valid lower bound.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Hashable, Mapping, Sequence

from .core import Assignment, ScheduleTable, upward_rank
from .model import AppDag, Platform
from .schedulers import FrameView, SchedulerInput, heft_dyn, slot_order_deps

OPTIMAL = "optimal"
FEASIBLE = "feasible_time_limit"
INFEASIBLE = "infeasible"


class InstanceTooLarge(ValueError):
    pass


@dataclass
class CpInstance:
    dags: Sequence[AppDag]
    platform: Platform
    running: Sequence[Assignment] = ()
    now: float = 0.0
    parent_finish: Mapping[Hashable, tuple[float, int]] = field(default_factory=dict)
    full_dags: Mapping[int, AppDag] | None = None

    @classmethod
    def from_views(cls, views: Sequence[FrameView], platform: Platform, running=(), now=0.0,
                   parent_finish=None) -> "CpInstance":
        return cls([v.partial() for v in views], platform, running, now, dict(parent_finish or {}),
                   {v.instance: v.dag for v in views})

    @property
    def n_tasks(self) -> int:
        return sum(len(d.tasks) for d in self.dags)


@dataclass
class CpSolution:
    table: ScheduleTable
    objective: float
    status: str
    nodes: int = 0
    elapsed: float = 0.0
    incumbents: list[tuple[float, float]] = field(default_factory=list)


def span_objective(table: ScheduleTable, dags: Sequence[AppDag]) -> float:
    total = 0.0
    for d in dags:
        rows = [table.assignments[d.key(t.id)] for t in d.tasks if d.key(t.id) in table.assignments]
        if rows:
            total += max(a.end for a in rows) - min(a.start for a in rows)
    return total


class _Compiled:
    """Integer-indexed view of an instance."""

    def __init__(self, inst: CpInstance):
        plat = inst.platform
        self.platform = plat
        self.z = z = plat.n_pes
        self.keys: list[Hashable] = []
        self.dag_of: list[int] = []
        self.exec: list[list[float | None]] = []
        index: dict[Hashable, int] = {}
        for g, d in enumerate(inst.dags):
            if d.n_pes not in (0, z):
                raise ValueError(f"DAG {d.app_name!r} has {d.n_pes} PE columns, platform has {z}")
            for tid in d.topo_order:
                index[d.key(tid)] = len(self.keys)
                self.keys.append(d.key(tid))
                self.dag_of.append(g)
                self.exec.append(list(d.task_map[tid].exec_time))
        n = self.n = len(self.keys)
        self.n_dags = len(inst.dags)
        self.preds: list[list[tuple[int, float]]] = [[] for _ in range(n)]
        self.succs: list[list[int]] = [[] for _ in range(n)]
        finish = dict(inst.parent_finish)
        for r in inst.running:
            finish.setdefault(r.task, (r.end, r.pe))
        self.ext = [[inst.now] * z for _ in range(n)]
        for d in inst.dags:
            full = d
            if inst.full_dags is not None and d.instance in inst.full_dags:
                full = inst.full_dags[d.instance]
            for tid in d.topo_order:
                i = index[d.key(tid)]
                for p, vol in full.preds[tid]:
                    pk = d.key(p)
                    if pk in index:
                        self.preds[i].append((index[pk], vol))
                        self.succs[index[pk]].append(i)
                    else:
                        fin, ppe = finish[pk]
                        for k in range(z):
                            self.ext[i][k] = max(self.ext[i][k], fin + plat.comm_time(vol, ppe, k))
        self.avail0 = [inst.now] * z
        for r in inst.running:
            self.avail0[r.pe] = max(self.avail0[r.pe], r.end)
        self.min_exec = [min(t for t in row if t is not None) if any(t is not None for t in row) else math.inf
                         for row in self.exec]
        self.supported = [[k for k in range(z) if row[k] is not None] for row in self.exec]
        ranks = {}
        for d in inst.dags:
            for tid, r in upward_rank(d, plat).items():
                ranks[d.key(tid)] = r
        self.rank = [ranks[k] for k in self.keys]


def _comm(plat: Platform, vol: float, a: int, b: int) -> float:
    return plat.comm_time(vol, a, b)


def cp_solve(
    instance: CpInstance,
    time_limit: float = 10.0,
    max_width: int | None = None,
    warm_start: bool = True,
) -> CpSolution:
    """Minimise the summed DAG spans; returns the best schedule found.

    Status is ``optimal`` when the search space was exhausted,
    ``feasible_time_limit`` when the time limit or ``max_width`` cut the search
    short, ``infeasible`` when some task has no PE able to run it.
    """
    t0 = time.perf_counter()
    c = _Compiled(instance)
    n, plat = c.n, c.platform
    if any(not s for s in c.supported):
        return CpSolution(ScheduleTable(), math.inf, INFEASIBLE)
    if n == 0:
        return CpSolution(ScheduleTable(), 0.0, OPTIMAL)

    best_obj = math.inf
    best_sched: list[tuple[int, float, float]] | None = None
    incumbents: list[tuple[float, float]] = []
    if warm_start:
        views = _views_of(instance)
        inp = SchedulerInput(plat, "whole_dag", instance.now, outstanding=views,
                             running=list(instance.running), parent_finish=dict(instance.parent_finish))
        for r in instance.running:
            inp.parent_finish.setdefault(r.task, (r.end, r.pe))
        table = heft_dyn(inp, None, dynamic_deps=False)
        best_obj = sum(
            max(table.assignments[(v.instance, t)].end for t in v.pending)
            - min(table.assignments[(v.instance, t)].start for t in v.pending)
            for v in views if v.pending)
        warm_keys = [(v.instance, tid) for v, d in zip(views, instance.dags) for tid in d.topo_order]
        best_sched = [(table.assignments[k].pe, table.assignments[k].start, table.assignments[k].end)
                      for k in warm_keys]
        incumbents.append((time.perf_counter() - t0, best_obj))

    pe_of = [-1] * n
    start = [0.0] * n
    end = [0.0] * n
    avail = list(c.avail0)
    missing = [len(p) for p in c.preds]
    placed_in = [0] * c.n_dags
    min_start = [math.inf] * c.n_dags
    max_end = [-math.inf] * c.n_dags
    succ_set = [set(s) for s in c.succs]
    order_pos = sorted(range(n), key=lambda i: (-c.rank[i], i))
    chains = [_chain(c, g) for g in range(c.n_dags)]
    nodes = 0
    timed_out = False
    truncated = False
    eps = 1e-9

    def data_ready(i: int, k: int) -> float:
        t = c.ext[i][k]
        if avail[k] > t:
            t = avail[k]
        for j, vol in c.preds[i]:
            a = end[j] + (0.0 if pe_of[j] == k or not vol else vol / plat.link_bandwidth[pe_of[j]][k])
            if a > t:
                t = a
        return t

    def lower_bound() -> float:
        est = {}
        lb_end = list(max_end)
        for i in range(n):  # compiled order is topological within each DAG
            if pe_of[i] >= 0:
                continue
            best = math.inf
            for k in c.supported[i]:
                t = c.ext[i][k]
                if avail[k] > t:
                    t = avail[k]
                for j, vol in c.preds[i]:
                    if pe_of[j] >= 0:
                        a = end[j] + (0.0 if pe_of[j] == k or not vol else vol / plat.link_bandwidth[pe_of[j]][k])
                    else:
                        a = est[j] + c.min_exec[j]
                    if a > t:
                        t = a
                if t < best:
                    best = t
            est[i] = best
            g = c.dag_of[i]
            if best + c.min_exec[i] > lb_end[g]:
                lb_end[g] = best + c.min_exec[i]
        total = 0.0
        for g in range(c.n_dags):
            if placed_in[g]:
                # ends only grow and min start only shrinks from here on
                total += max(lb_end[g] - min_start[g], chains[g])
            else:
                total += chains[g]
        return total

    def dfs(depth: int, last: int, last_pe: int) -> None:
        nonlocal best_obj, best_sched, nodes, timed_out, truncated
        nodes += 1
        if nodes & 1023 == 0 and time.perf_counter() - t0 > time_limit:
            timed_out = True
        if timed_out:
            return
        if depth == n:
            obj = sum(max_end[g] - min_start[g] for g in range(c.n_dags) if placed_in[g])
            if obj < best_obj - eps:
                best_obj = obj
                best_sched = [(pe_of[i], start[i], end[i]) for i in range(n)]
                incumbents.append((time.perf_counter() - t0, obj))
            return
        if lower_bound() >= best_obj - eps:
            return
        children = []
        for i in order_pos:
            if pe_of[i] >= 0 or missing[i]:
                continue
            for k in c.supported[i]:
                if last >= 0 and k != last_pe and i not in succ_set[last] and (k, i) < (last_pe, last):
                    continue  # same state reachable with the two decisions swapped
                s = data_ready(i, k)
                children.append((s + c.exec[i][k], -c.rank[i], k, i, s))
        children.sort()
        if max_width is not None and len(children) > max_width:
            children = children[:max_width]
            truncated = True
        for e, _, k, i, s in children:
            g = c.dag_of[i]
            old_avail, old_min, old_max = avail[k], min_start[g], max_end[g]
            pe_of[i], start[i], end[i] = k, s, e
            avail[k] = e
            placed_in[g] += 1
            if s < min_start[g]:
                min_start[g] = s
            if e > max_end[g]:
                max_end[g] = e
            for j in c.succs[i]:
                missing[j] -= 1
            dfs(depth + 1, i, k)
            for j in c.succs[i]:
                missing[j] += 1
            placed_in[g] -= 1
            avail[k], min_start[g], max_end[g] = old_avail, old_min, old_max
            pe_of[i] = -1
            if timed_out:
                return

    dfs(0, -1, -1)
    table = ScheduleTable()
    for i, (k, s, e) in enumerate(best_sched):
        table.add(Assignment(c.keys[i], k, s, e))
    table.dynamic_deps = slot_order_deps(table)
    status = FEASIBLE if (timed_out or truncated) else OPTIMAL
    return CpSolution(table, best_obj, status, nodes, time.perf_counter() - t0, incumbents)


def _chain(c: _Compiled, g: int) -> float:
    longest = {}
    best = 0.0
    for i in reversed(range(c.n)):
        if c.dag_of[i] != g:
            continue
        longest[i] = c.min_exec[i] + max((longest[j] for j in c.succs[i]), default=0.0)
        best = max(best, longest[i])
    return best


def _views_of(inst: CpInstance) -> list[FrameView]:
    views = []
    for i, d in enumerate(inst.dags):
        full = d
        if inst.full_dags is not None and d.instance in inst.full_dags:
            full = inst.full_dags[d.instance]
        views.append(FrameView(d.instance if d.instance is not None else i, full,
                               frozenset(t.id for t in d.tasks)))
    if len(views) == 1 and inst.dags[0].instance is None:
        return views
    if any(d.instance is None for d in inst.dags):
        raise ValueError("multi-DAG instances need an instance tag on every DAG")
    return views


def brute_force_optimal(instance: CpInstance, max_tasks: int = 10, reduce: bool = True) -> float:
    """Minimum summed span over every task->PE map and topological order.

    Each (order, map) pair is simulated by appending tasks to their PE in order.
    With ``reduce`` (default), sequences that differ only by swapping two
    adjacent, independent placements on different PEs are enumerated once; they
    produce identical schedules. No bounding is applied.
    """
    dags = list(instance.dags)
    n = sum(len(d.tasks) for d in dags)
    if n > max_tasks:
        raise InstanceTooLarge(f"{n} tasks exceeds max_tasks={max_tasks}")
    plat = instance.platform
    z = plat.n_pes
    keys, dag_idx, rows = [], [], []
    pos = {}
    for g, d in enumerate(dags):
        for t in d.tasks:
            pos[d.key(t.id)] = len(keys)
            keys.append(d.key(t.id))
            dag_idx.append(g)
            rows.append(t.exec_time)
    finish = dict(instance.parent_finish)
    for r in instance.running:
        finish.setdefault(r.task, (r.end, r.pe))
    parents: list[list[tuple[int, float]]] = [[] for _ in range(n)]
    ext = [[instance.now] * z for _ in range(n)]
    for d in dags:
        full = instance.full_dags.get(d.instance, d) if instance.full_dags else d
        for t in d.tasks:
            i = pos[d.key(t.id)]
            for p, vol in full.preds[t.id]:
                if d.key(p) in pos:
                    parents[i].append((pos[d.key(p)], vol))
                else:
                    fin, ppe = finish[d.key(p)]
                    for k in range(z):
                        ext[i][k] = max(ext[i][k], fin + plat.comm_time(vol, ppe, k))
    children = [set() for _ in range(n)]
    for i in range(n):
        for j, _ in parents[i]:
            children[j].add(i)
    release = [instance.now] * z
    for r in instance.running:
        release[r.pe] = max(release[r.pe], r.end)

    avail = list(release)
    s_, e_, pe_ = [0.0] * n, [0.0] * n, [0] * n
    best = math.inf
    order: list[int] = []
    done = [False] * n

    def rec(last_pe: int):
        nonlocal best
        if len(order) == n:
            total = 0.0
            for g in range(len(dags)):
                idx = [i for i in range(n) if dag_idx[i] == g]
                if idx:
                    total += max(e_[i] for i in idx) - min(s_[i] for i in idx)
            best = min(best, total)
            return
        for i in range(n):
            if done[i] or any(not done[j] for j, _ in parents[i]):
                continue
            for k in range(z):
                if rows[i][k] is None:
                    continue
                if reduce and order:
                    li = order[-1]
                    if k != last_pe and i not in children[li] and (k, i) < (last_pe, li):
                        continue
                t = max(avail[k], ext[i][k])
                for j, vol in parents[i]:
                    t = max(t, e_[j] + plat.comm_time(vol, pe_[j], k))
                old = avail[k]
                s_[i], e_[i], pe_[i] = t, t + rows[i][k], k
                avail[k] = e_[i]
                done[i] = True
                order.append(i)
                rec(k)
                order.pop()
                done[i] = False
                avail[k] = old

    if n == 0:
        return 0.0
    rec(-1)
    return best

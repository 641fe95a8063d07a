"""Deterministic discrete-event simulation of frames flowing through an SoC.

Frames arrive per the workload's arrival trace. Whole-DAG schedulers plan at
each arrival and leave a lookup table (PE, planned start, dynamic dependencies)
for the dispatcher; ready-queue schedulers are invoked at every epoch in which
tasks have become ready and commit each task to a per-PE queue. The dispatcher
starts a task once its PE is idle, its parents' data has arrived and, for
lookup tables, its dynamic predecessors have finished.

Events at equal time are handled completions first, then arrivals, then data
wake-ups; scheduling and dispatch run once all events of that instant have
been applied.
"""
from __future__ import annotations

import heapq
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .core import Assignment, PeTimeline, ScheduleTable, empty_timelines, tie_key
from .cp import CpInstance, cp_solve
from .model import AppDag, Platform, WorkloadSpec
from .schedulers import (
    FrameView,
    ReadyTask,
    SchedulerInput,
    SchedulerKind,
    _peft_plan,
    heft_dyn,
    heft_edp,
    heft_edp_lb,
    heft_rt,
    met_schedule,
    oct_table,
    peft_rt,
)

COMPLETION, ARRIVAL, WAKE, END = 0, 1, 2, 3
STATUSES = ("blocked", "ready", "scheduled", "running", "done")


class DeadlockError(RuntimeError):
    pass


@dataclass(frozen=True)
class SimConfig:
    """Knobs for one simulation run.

    ``seed`` (when set) replaces the workload seed, so the arrival trace depends
    only on (seed, rate). ``noise`` perturbs actual run times by a seeded factor
    in [1 - noise, 1 + noise]. The three ``dyn_*`` flags select the HEFT_Dyn
    ingredients; with all off it degrades to per-frame HEFT.
    """

    seed: int | None = None
    duration: float | None = None
    noise: float = 0.0
    time_unit: str = "us"
    dyn_merge: bool = True
    dyn_running_constraints: bool = True
    dyn_dynamic_deps: bool = True
    cp_time_limit: float = 10.0
    cp_max_width: int | None = None
    record_timing: bool = True


@dataclass
class Frame:
    frame_id: int
    app: str
    injection_time: float
    status: dict[int, str] = field(default_factory=dict)
    completion_time: float | None = None

    def advance(self, tid, status: str) -> None:
        if STATUSES.index(status) > STATUSES.index(self.status[tid]):
            self.status[tid] = status

    @property
    def done(self) -> bool:
        return self.completion_time is not None

    @property
    def exec_time(self) -> float:
        return self.completion_time - self.injection_time


@dataclass(frozen=True)
class BusyInterval:
    pe: int
    start: float
    end: float
    frame: int
    task: int
    power: float = 0.0


@dataclass(frozen=True)
class SchedulerCall:
    time: float
    wall: float
    tasks: int


@dataclass
class SimResult:
    scheduler: str
    frames: list[Frame]
    pe_busy: dict[int, list[BusyInterval]]
    scheduler_calls: list[SchedulerCall]
    energy_dynamic: float
    energy_static: float
    duration: float
    time_unit: str = "us"
    target_rate: float = 0.0

    @property
    def energy_total(self) -> float:
        return self.energy_dynamic + self.energy_static

    def to_dict(self, timing: bool = False) -> dict:
        """Plain-data form. Wall-clock call durations are left out unless ``timing``;
        everything else is a deterministic function of the inputs."""
        calls = [asdict(c) if timing else {"time": c.time, "tasks": c.tasks} for c in self.scheduler_calls]
        return {
            "scheduler": self.scheduler,
            "duration": self.duration,
            "time_unit": self.time_unit,
            "target_rate": self.target_rate,
            "energy": {"dynamic": self.energy_dynamic, "static": self.energy_static, "total": self.energy_total},
            "frames": [
                {"frame_id": f.frame_id, "app": f.app, "injection_time": f.injection_time,
                 "completion_time": f.completion_time}
                for f in self.frames
            ],
            "pe_busy": {str(k): [[b.start, b.end, b.frame, b.task, b.power] for b in rows]
                        for k, rows in sorted(self.pe_busy.items())},
            "scheduler_calls": calls,
        }


@dataclass(frozen=True)
class OverheadProfile:
    mean: float
    p95: float
    count: int
    total: float
    cdf: tuple[tuple[float, float], ...]


def profile_scheduler_overhead(result: SimResult) -> OverheadProfile:
    """Summary of wall-clock time spent per scheduler call, plus its empirical CDF."""
    walls = np.array([c.wall for c in result.scheduler_calls], dtype=float)
    if walls.size == 0:
        raise ValueError("result has no scheduler calls")
    ordered = np.sort(walls)
    cdf = tuple((float(v), (i + 1) / len(ordered)) for i, v in enumerate(ordered))
    return OverheadProfile(
        float(walls.mean()),
        float(np.percentile(walls, 95, method="inverted_cdf")),
        int(walls.size),
        float(walls.sum()),
        cdf,
    )


class _Sim:
    def __init__(self, platform: Platform, workload: WorkloadSpec, kind: SchedulerKind, cfg: SimConfig):
        self.platform = platform
        self.kind = kind
        self.cfg = cfg
        if cfg.seed is not None:
            workload = workload.replace(seed=cfg.seed)
        if cfg.duration is not None:
            workload = workload.replace(duration=cfg.duration)
        self.workload = workload
        self.z = platform.n_pes
        for dag, _ in workload.mix:
            if dag.n_pes != self.z:
                raise ValueError(f"DAG {dag.app_name!r} has {dag.n_pes} PE columns, platform has {self.z}")
        self.events: list = []
        self.seq = 0
        self.now = 0.0
        self.frames: dict[int, Frame] = {}
        self.dags: dict[int, AppDag] = {}
        self.unfinished: dict[int, set] = {}  # frame -> tasks not done
        self.waiting_parents: dict[tuple, int] = {}
        self.finish: dict[tuple, tuple[float, int]] = {}  # done tasks: (end, pe)
        self.running: dict[int, Assignment] = {}  # pe -> running task (expected end)
        self.started: set = set()
        self.ready_unassigned: list[tuple] = []
        # lookup-table state (whole-DAG schedulers)
        self.plan: dict[tuple, Assignment] = {}
        self.dyn_preds: dict[tuple, set] = {}
        # ready-queue state
        self.queues: dict[int, list[tuple[float, int, tuple]]] = {k: [] for k in range(self.z)}
        self.queued: dict[tuple, Assignment] = {}
        self.queue_tl: dict[int, PeTimeline] = empty_timelines(platform)
        self.oct_cache: dict[int, dict] = {}
        self.wakes: set[float] = set()
        self.busy: dict[int, list[BusyInterval]] = {k: [] for k in range(self.z)}
        self.calls: list[SchedulerCall] = []
        self.energy_dynamic = 0.0
        self.noise_rng = np.random.default_rng([workload.seed, 7919])

    # -- events ------------------------------------------------------------

    def push(self, t: float, prio: int, payload) -> None:
        heapq.heappush(self.events, (t, prio, self.seq, payload))
        self.seq += 1

    def run(self) -> SimResult:
        for fid, (t, app) in enumerate(self.workload.arrival_trace()):
            self.push(t, ARRIVAL, (fid, app))
        self.push(self.workload.duration, END, None)
        while self.events:
            t = self.events[0][0]
            self.now = t
            while self.events and self.events[0][0] == t:
                _, prio, _, payload = heapq.heappop(self.events)
                if prio == COMPLETION:
                    self.complete(*payload)
                elif prio == ARRIVAL:
                    self.arrive(*payload)
                elif prio == WAKE:
                    self.wakes.discard(t)
            self.epoch()
        if any(self.unfinished.values()):
            raise DeadlockError(self.diagnose())
        static = sum(pe.idle_power for pe in self.platform.pes) * self.workload.duration
        return SimResult(
            self.kind.value,
            [self.frames[f] for f in sorted(self.frames)],
            self.busy,
            self.calls,
            self.energy_dynamic,
            static,
            self.workload.duration,
            self.cfg.time_unit,
            self.workload.target_frame_rate,
        )

    def arrive(self, fid: int, app: int) -> None:
        dag = self.workload.mix[app][0]
        self.dags[fid] = dag
        frame = Frame(fid, dag.app_name, self.now, {t.id: "blocked" for t in dag.tasks})
        self.frames[fid] = frame
        self.unfinished[fid] = {t.id for t in dag.tasks}
        for t in dag.tasks:
            n = len(dag.preds[t.id])
            self.waiting_parents[(fid, t.id)] = n
            if n == 0:
                self.make_ready((fid, t.id))
        if self.kind.whole_dag:
            self.plan_whole(fid)

    def make_ready(self, key) -> None:
        fid, tid = key
        self.frames[fid].advance(tid, "ready")
        if key in self.plan:
            self.frames[fid].advance(tid, "scheduled")
        if not self.kind.whole_dag:
            self.ready_unassigned.append(key)

    def complete(self, pe: int, key) -> None:
        a = self.running.pop(pe)
        fid, tid = key
        self.finish[key] = (a.end, pe)
        frame = self.frames[fid]
        frame.advance(tid, "done")
        self.unfinished[fid].discard(tid)
        if not self.unfinished[fid]:
            frame.completion_time = self.now
        self.plan.pop(key, None)
        for succ, _ in self.dags[fid].succs[tid]:
            sk = (fid, succ)
            self.waiting_parents[sk] -= 1
            if self.waiting_parents[sk] == 0:
                self.make_ready(sk)

    # -- scheduling ----------------------------------------------------------

    def pending_views(self) -> list[FrameView]:
        views = []
        for fid in sorted(self.unfinished):
            pending = frozenset(t for t in self.unfinished[fid] if (fid, t) not in self.started)
            if pending:
                views.append(FrameView(fid, self.dags[fid], pending))
        return views

    def parent_finish(self) -> dict:
        pf = dict(self.finish)
        for pe, a in self.running.items():
            pf[a.task] = (a.end, pe)
        return pf

    def timed(self, fn, n_tasks: int):
        t0 = time.perf_counter()
        out = fn()
        wall = time.perf_counter() - t0 if self.cfg.record_timing else 0.0
        self.calls.append(SchedulerCall(self.now, wall, n_tasks))
        return out

    def plan_whole(self, fid: int) -> None:
        kind, cfg = self.kind, self.cfg
        running = [self.running[k] for k in sorted(self.running)]
        incoming = FrameView.whole(self.dags[fid], fid)
        merge = kind == SchedulerKind.CP or (kind == SchedulerKind.HEFT_DYN and cfg.dyn_merge)
        views = self.pending_views() if merge else [incoming]
        n_tasks = sum(len(v.pending) for v in views)
        inp = SchedulerInput(self.platform, "whole_dag", self.now, outstanding=views,
                             running=running, parent_finish=self.parent_finish())
        if kind == SchedulerKind.HEFT_BASE:
            table = self.timed(lambda: heft_dyn(inp, incoming, merge=False, running_constraints=False,
                                                dynamic_deps=False), n_tasks)
        elif kind == SchedulerKind.HEFT_DYN:
            table = self.timed(lambda: heft_dyn(inp, incoming, merge=cfg.dyn_merge,
                                                running_constraints=cfg.dyn_running_constraints,
                                                dynamic_deps=cfg.dyn_dynamic_deps), n_tasks)
        elif kind == SchedulerKind.PEFT_BASE:
            octs = self.octs(self.dags[fid])
            table = self.timed(lambda: _peft_plan(incoming, self.platform, octs, empty_timelines(self.platform),
                                                  {}, self.now), n_tasks)
        else:
            inst = CpInstance.from_views(views, self.platform, running, self.now, self.parent_finish())
            table = self.timed(lambda: cp_solve(inst, cfg.cp_time_limit, cfg.cp_max_width).table, n_tasks)
        if merge:
            self.dyn_preds = {}
        for key, a in table.assignments.items():
            self.plan[key] = a
            f, t = key
            if self.frames[f].status[t] == "ready":
                self.frames[f].advance(t, "scheduled")
        for a, b in table.dynamic_deps:
            self.dyn_preds.setdefault(b, set()).add(a)

    def octs(self, dag: AppDag) -> dict:
        if id(dag) not in self.oct_cache:
            self.oct_cache[id(dag)] = oct_table(dag, self.platform)
        return self.oct_cache[id(dag)]

    def ready_task(self, key) -> ReadyTask:
        fid, tid = key
        dag = self.dags[fid]
        parents = tuple((*self.finish[(fid, p)], vol) for p, vol in dag.preds[tid])
        return ReadyTask(key, dag.task_map[tid], parents)

    def projected_timelines(self) -> dict[int, PeTimeline]:
        """Per PE: the running task, then the queued tasks at their expected times.

        Without noise every queued task runs exactly where it was planned, so the
        planned intervals are reused; with noise the queue is replayed from the
        running task's actual end.
        """
        tls = {}
        for pe in range(self.z):
            head = []
            t = self.now
            if pe in self.running:
                r = self.running[pe]
                head.append((r.start, r.end, r.task))
                t = max(t, r.end)
            if not self.cfg.noise:
                tls[pe] = PeTimeline(pe, head + self.queue_tl[pe].busy)
                continue
            tl = PeTimeline(pe, head)
            for _, _, key in sorted(self.queues[pe]):
                rt = self.ready_task(key)
                s = max(t, rt.data_ready(pe, self.platform, self.now))
                e = s + rt.node.exec_time[pe]
                tl.insert(s, e, key)
                t = e
            tls[pe] = tl
        return tls

    def plan_ready(self) -> None:
        keys = sorted(self.ready_unassigned, key=tie_key)
        self.ready_unassigned = []
        tasks = [self.ready_task(k) for k in keys]
        running = [self.running[k] for k in sorted(self.running)]
        inp = SchedulerInput(self.platform, "ready_queue", self.now, ready_tasks=tasks, running=running,
                             timelines=self.projected_timelines(), parent_finish=self.parent_finish())
        kind = self.kind
        if kind == SchedulerKind.MET:
            fn = lambda: met_schedule(inp)  # noqa: E731
        elif kind == SchedulerKind.HEFT_RT:
            fn = lambda: heft_rt(inp)  # noqa: E731
        elif kind == SchedulerKind.HEFT_EDP:
            fn = lambda: heft_edp(inp)  # noqa: E731
        elif kind == SchedulerKind.HEFT_EDP_LB:
            fn = lambda: heft_edp_lb(inp)  # noqa: E731
        else:
            rows = {k: self.octs(self.dags[k[0]])[k[1]] for k in keys}
            fn = lambda: peft_rt(inp, rows)  # noqa: E731
        for a in self.timed(fn, len(tasks)):
            heapq.heappush(self.queues[a.pe], (a.start, self.seq, a.task))
            self.seq += 1
            self.queued[a.task] = a
            self.queue_tl[a.pe].insert(a.start, a.end, a.task)
            self.frames[a.task[0]].advance(a.task[1], "scheduled")

    # -- dispatch ------------------------------------------------------------

    def data_ready(self, key, pe: int) -> float:
        fid, tid = key
        t = 0.0
        for p, vol in self.dags[fid].preds[tid]:
            end, ppe = self.finish[(fid, p)]
            t = max(t, end + self.platform.comm_time(vol, ppe, pe))
        return t

    def wake_at(self, t: float) -> None:
        if t > self.now and t not in self.wakes:
            self.wakes.add(t)
            self.push(t, WAKE, None)

    def epoch(self) -> None:
        if self.ready_unassigned:
            self.plan_ready()
        if self.kind.whole_dag:
            self.dispatch_table()
        else:
            self.dispatch_queues()

    def dispatch_queues(self) -> None:
        for pe in range(self.z):
            q = self.queues[pe]
            if pe in self.running or not q:
                continue
            key = q[0][2]
            ready = self.data_ready(key, pe)
            if ready > self.now + 1e-12:
                self.wake_at(ready)
                continue
            heapq.heappop(q)
            a = self.queued.pop(key)
            self.queue_tl[pe].remove(a.start, a.end, key)
            self.start(key, pe)

    def dispatch_table(self) -> None:
        free = [pe for pe in range(self.z) if pe not in self.running]
        if not free:
            return
        cands: dict[int, tuple] = {}
        for key, a in self.plan.items():
            if a.pe not in free or key in self.started or self.waiting_parents[key]:
                continue
            if any(p not in self.finish for p in self.dyn_preds.get(key, ())):
                continue
            ready = self.data_ready(key, a.pe)
            if ready > self.now + 1e-12:
                self.wake_at(ready)
                continue
            # without dynamic dependencies the runtime serves tasks in the order their
            # inputs became available; the plan only fixes the PE
            rank = (ready, a.start, tie_key(key))
            if a.pe not in cands or rank < cands[a.pe][0]:
                cands[a.pe] = (rank, key)
        for pe in sorted(cands):
            self.start(cands[pe][1], pe)

    def start(self, key, pe: int) -> None:
        fid, tid = key
        node = self.dags[fid].task_map[tid]
        dur = node.exec_time[pe]
        if self.cfg.noise:
            dur *= 1.0 + self.cfg.noise * float(self.noise_rng.uniform(-1.0, 1.0))
        end = self.now + dur
        self.running[pe] = Assignment(key, pe, self.now, end)
        self.started.add(key)
        self.frames[fid].advance(tid, "running")
        self.busy[pe].append(BusyInterval(pe, self.now, end, fid, tid, node.power[pe]))
        self.energy_dynamic += dur * node.power[pe]
        self.push(end, COMPLETION, (pe, key))

    def diagnose(self) -> str:
        stuck = []
        for fid in sorted(self.unfinished):
            for tid in sorted(self.unfinished[fid], key=repr):
                key = (fid, tid)
                if key in self.started:
                    continue
                why = []
                if self.waiting_parents[key]:
                    why.append(f"{self.waiting_parents[key]} parent(s) unfinished")
                blockers = [p for p in self.dyn_preds.get(key, ()) if p not in self.finish]
                if blockers:
                    why.append(f"dynamic predecessors {sorted(blockers)}")
                if self.kind.whole_dag and key not in self.plan:
                    why.append("no PE assigned")
                stuck.append(f"{key}: {', '.join(why) or 'starved'}")
        return "deadlock: no pending events but unfinished tasks remain: " + "; ".join(stuck[:20])


def run(platform: Platform, workload: WorkloadSpec, scheduler: SchedulerKind | str,
        config: SimConfig | None = None) -> SimResult:
    """Simulate ``workload`` on ``platform`` under ``scheduler`` until every frame drains."""
    kind = SchedulerKind.parse(scheduler) if isinstance(scheduler, str) else scheduler
    return _Sim(platform, workload, kind, config or SimConfig()).run()


def schedule_table_of(result: SimResult) -> ScheduleTable:
    """Executed schedule as a table keyed (frame, task)."""
    table = ScheduleTable()
    for rows in result.pe_busy.values():
        for b in rows:
            table.add(Assignment((b.frame, b.task), b.pe, b.start, b.end))
    return table


def frame_makespan(result: SimResult) -> float:
    """Last completion minus first injection over all frames."""
    if not result.frames:
        return 0.0
    return max(f.completion_time for f in result.frames) - min(f.injection_time for f in result.frames)



"""Platforms, application DAGs and workload descriptions.

Execution-time and power tables are stored per task as rows over the
platform's processing elements. ``None`` marks a PE that cannot run the task
(accelerators only run specific kernels).
"""
from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Hashable, Iterable, Sequence

import numpy as np

UNSUPPORTED = None
PE_KINDS = ("cpu", "accelerator")
ARRIVAL_DISTRIBUTIONS = ("exponential", "fixed")


class ModelError(ValueError):
    """Base class for malformed platform / DAG / workload input."""


class ParseError(ModelError):
    pass


class ValidationError(ModelError):
    def __init__(self, field_name: str, message: str):
        self.field = field_name
        super().__init__(f"{field_name}: {message}")


class CycleError(ModelError):
    def __init__(self, nodes: Sequence[Hashable]):
        self.nodes = list(nodes)
        super().__init__(f"dependency cycle among tasks {self.nodes}")


# --------------------------------------------------------------------------
# platform


@dataclass(frozen=True)
class ProcessingElement:
    id: int
    name: str
    kind: str = "cpu"
    idle_power: float = 0.0

    def __post_init__(self):
        if self.kind not in PE_KINDS:
            raise ValidationError(f"pes[{self.id}].kind", f"unknown kind {self.kind!r}")
        if not self.idle_power >= 0:
            raise ValidationError(f"pes[{self.id}].idle_power", "must be >= 0")


@dataclass(frozen=True)
class Platform:
    pes: tuple[ProcessingElement, ...]
    link_bandwidth: tuple[tuple[float, ...], ...]
    name: str = "platform"

    def __post_init__(self):
        object.__setattr__(self, "pes", tuple(self.pes))
        z = len(self.pes)
        if z < 1:
            raise ValidationError("pes", "platform needs at least one PE")
        for k, pe in enumerate(self.pes):
            if pe.id != k:
                raise ValidationError(f"pes[{k}].id", f"ids must be dense 0..{z - 1}, got {pe.id}")
        bw = self.link_bandwidth
        if len(bw) != z or any(len(row) != z for row in bw):
            raise ValidationError("link_bandwidth", f"must be a {z}x{z} matrix")
        rows = []
        for a in range(z):
            row = []
            for b in range(z):
                if a == b:
                    row.append(math.inf)
                    continue
                v = bw[a][b]
                if v is None or not isinstance(v, (int, float)) or not v > 0:
                    raise ValidationError(f"link_bandwidth[{a}][{b}]", f"must be > 0, got {v!r}")
                if bw[b][a] != v:
                    raise ValidationError(
                        f"link_bandwidth[{a}][{b}]",
                        f"asymmetric bandwidth ({v} vs link_bandwidth[{b}][{a}]={bw[b][a]})",
                    )
                row.append(float(v))
            rows.append(tuple(row))
        object.__setattr__(self, "link_bandwidth", tuple(rows))

    @property
    def n_pes(self) -> int:
        return len(self.pes)

    @cached_property
    def mean_bandwidth(self) -> float:
        z = self.n_pes
        vals = [self.link_bandwidth[a][b] for a in range(z) for b in range(z) if a != b]
        return sum(vals) / len(vals) if vals else math.inf

    def comm_time(self, volume: float, src_pe: int, dst_pe: int) -> float:
        if src_pe == dst_pe or volume == 0:
            return 0.0
        return volume / self.link_bandwidth[src_pe][dst_pe]

    @classmethod
    def uniform(cls, n_pes: int, bandwidth: float = 1.0, kinds: Sequence[str] | None = None,
                idle_power: Sequence[float] | None = None, name: str = "platform") -> "Platform":
        kinds = kinds or ["cpu"] * n_pes
        idle_power = idle_power or [0.0] * n_pes
        pes = tuple(
            ProcessingElement(k, f"P{k}", kinds[k], float(idle_power[k])) for k in range(n_pes)
        )
        bw = tuple(tuple(math.inf if a == b else bandwidth for b in range(n_pes)) for a in range(n_pes))
        return cls(pes, bw, name)

    def to_dict(self) -> dict:
        z = self.n_pes
        return {
            "name": self.name,
            "pes": [
                {"id": p.id, "name": p.name, "kind": p.kind, "idle_power": p.idle_power}
                for p in self.pes
            ],
            "link_bandwidth": [
                [None if a == b else self.link_bandwidth[a][b] for b in range(z)] for a in range(z)
            ],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Platform":
        if not isinstance(doc, dict):
            raise ParseError("platform document must be an object")
        try:
            raw_pes = doc["pes"]
            bw = doc["link_bandwidth"]
        except KeyError as exc:
            raise ParseError(f"platform: missing field {exc.args[0]!r}") from None
        pes = []
        for i, p in enumerate(raw_pes):
            try:
                pes.append(ProcessingElement(
                    int(p["id"]), str(p.get("name", f"P{p['id']}")), p.get("kind", "cpu"),
                    float(p.get("idle_power", 0.0)),
                ))
            except (KeyError, TypeError) as exc:
                raise ParseError(f"pes[{i}]: malformed entry ({exc})") from None
        if not isinstance(bw, list) or not all(isinstance(r, list) for r in bw):
            raise ParseError("link_bandwidth: must be a list of lists")
        return cls(tuple(pes), tuple(tuple(r) for r in bw), str(doc.get("name", "platform")))


# --------------------------------------------------------------------------
# tasks and DAGs


def _row(values: Iterable, name: str) -> tuple[float | None, ...]:
    out = []
    for k, v in enumerate(values):
        if v is None:
            out.append(None)
        elif isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v):
            out.append(float(v))
        else:
            raise ValidationError(f"{name}[{k}]", f"expected number or null, got {v!r}")
    return tuple(out)


@dataclass(frozen=True)
class TaskNode:
    id: Hashable
    name: str
    exec_time: tuple[float | None, ...]
    power: tuple[float | None, ...]

    def __post_init__(self):
        where = f"tasks[{self.id}]"
        object.__setattr__(self, "exec_time", _row(self.exec_time, where + ".exec_time"))
        object.__setattr__(self, "power", _row(self.power, where + ".power"))
        if len(self.exec_time) != len(self.power):
            raise ValidationError(where, "exec_time and power rows differ in length")
        sup_t = [v is not None for v in self.exec_time]
        sup_p = [v is not None for v in self.power]
        if sup_t != sup_p:
            raise ValidationError(where, "exec_time and power must be supported on the same PEs")
        if not any(sup_t):
            raise ValidationError(where + ".exec_time", "task is unsupported on every PE")
        for k, (t, p) in enumerate(zip(self.exec_time, self.power)):
            if t is None:
                continue
            if t < 0:
                raise ValidationError(f"{where}.exec_time[{k}]", "must be >= 0")
            if p < 0:
                raise ValidationError(f"{where}.power[{k}]", "must be >= 0")

    @property
    def supported_pes(self) -> tuple[int, ...]:
        return tuple(k for k, t in enumerate(self.exec_time) if t is not None)

    def supports(self, pe: int) -> bool:
        return 0 <= pe < len(self.exec_time) and self.exec_time[pe] is not None


@dataclass(frozen=True)
class Edge:
    src: Hashable
    dst: Hashable
    data_volume: float = 0.0

    def __post_init__(self):
        if self.src == self.dst:
            raise ValidationError(f"edges[{self.src}->{self.dst}]", "self-edge")
        if not self.data_volume >= 0:
            raise ValidationError(f"edges[{self.src}->{self.dst}].data_volume", "must be >= 0")


@dataclass(frozen=True)
class AppDag:
    """An application task graph.

    ``instance`` tags a DAG copy (a frame) so that several copies of the same
    application can be scheduled together; scheduling keys are then
    ``(instance, task_id)`` pairs.
    """

    app_name: str
    tasks: tuple[TaskNode, ...]
    edges: tuple[Edge, ...] = ()
    instance: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "tasks", tuple(self.tasks))
        object.__setattr__(self, "edges", tuple(self.edges))
        seen = set()
        for t in self.tasks:
            if t.id in seen:
                raise ValidationError(f"tasks[{t.id}].id", "duplicate task id")
            seen.add(t.id)
        widths = {len(t.exec_time) for t in self.tasks}
        if len(widths) > 1:
            raise ValidationError("tasks", f"exec_time rows have differing lengths {sorted(widths)}")
        pairs = set()
        for e in self.edges:
            for end in (e.src, e.dst):
                if end not in seen:
                    raise ValidationError(f"edges[{e.src}->{e.dst}]", f"unknown task {end!r}")
            if (e.src, e.dst) in pairs:
                raise ValidationError(f"edges[{e.src}->{e.dst}]", "duplicate edge")
            pairs.add((e.src, e.dst))
        self.topo_order  # raises CycleError

    # -- structure -----------------------------------------------------
    @cached_property
    def task_map(self) -> dict[Hashable, TaskNode]:
        return {t.id: t for t in self.tasks}

    @cached_property
    def preds(self) -> dict[Hashable, list[tuple[Hashable, float]]]:
        out: dict = {t.id: [] for t in self.tasks}
        for e in self.edges:
            out[e.dst].append((e.src, e.data_volume))
        return out

    @cached_property
    def succs(self) -> dict[Hashable, list[tuple[Hashable, float]]]:
        out: dict = {t.id: [] for t in self.tasks}
        for e in self.edges:
            out[e.src].append((e.dst, e.data_volume))
        return out

    @cached_property
    def topo_order(self) -> tuple[Hashable, ...]:
        return topological_sort([t.id for t in self.tasks], [(e.src, e.dst) for e in self.edges])

    @property
    def n_pes(self) -> int:
        return len(self.tasks[0].exec_time) if self.tasks else 0

    def key(self, task_id: Hashable) -> Hashable:
        return task_id if self.instance is None else (self.instance, task_id)

    def entry_tasks(self) -> list[Hashable]:
        return [t.id for t in self.tasks if not self.preds[t.id]]

    def exit_tasks(self) -> list[Hashable]:
        return [t.id for t in self.tasks if not self.succs[t.id]]

    def subgraph(self, task_ids: Iterable[Hashable]) -> "AppDag":
        keep = set(task_ids)
        return AppDag(
            self.app_name,
            tuple(t for t in self.tasks if t.id in keep),
            tuple(e for e in self.edges if e.src in keep and e.dst in keep),
            self.instance,
        )

    def with_instance(self, instance: int | None) -> "AppDag":
        return AppDag(self.app_name, self.tasks, self.edges, instance)

    def depth(self) -> int:
        level: dict = {}
        for tid in self.topo_order:
            level[tid] = 1 + max((level[p] for p, _ in self.preds[tid]), default=0)
        return max(level.values(), default=0)

    # -- serialization -------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "app_name": self.app_name,
            "tasks": [
                {"id": t.id, "name": t.name, "exec_time": list(t.exec_time), "power": list(t.power)}
                for t in self.tasks
            ],
            "edges": [{"src": e.src, "dst": e.dst, "data_volume": e.data_volume} for e in self.edges],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "AppDag":
        if not isinstance(doc, dict):
            raise ParseError("dag document must be an object")
        try:
            tasks = tuple(
                TaskNode(int(t["id"]), str(t.get("name", t["id"])), t["exec_time"], t["power"])
                for t in doc["tasks"]
            )
            edges = tuple(
                Edge(int(e["src"]), int(e["dst"]), float(e.get("data_volume", 0.0)))
                for e in doc.get("edges", [])
            )
        except KeyError as exc:
            raise ParseError(f"dag: missing field {exc.args[0]!r}") from None
        except TypeError as exc:
            raise ParseError(f"dag: malformed entry ({exc})") from None
        for t in tasks:
            if t.id < 0:
                raise ValidationError(f"tasks[{t.id}].id", "task ids must be >= 0")
            for k, w in enumerate(t.exec_time):
                if w is not None and w <= 0:
                    raise ValidationError(f"tasks[{t.id}].exec_time[{k}]", "must be > 0")
        return cls(str(doc.get("app_name", "app")), tasks, edges)


def topological_sort(nodes: Sequence[Hashable], edges: Iterable[tuple[Hashable, Hashable]]) -> tuple:
    """Kahn's algorithm; ties resolved by input order. Raises CycleError."""
    indeg = {n: 0 for n in nodes}
    out: dict = {n: [] for n in nodes}
    for a, b in edges:
        out[a].append(b)
        indeg[b] += 1
    pos = {n: i for i, n in enumerate(nodes)}

    heap = [(pos[n], n) for n in nodes if indeg[n] == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        _, n = heapq.heappop(heap)
        order.append(n)
        for m in out[n]:
            indeg[m] -= 1
            if indeg[m] == 0:
                heapq.heappush(heap, (pos[m], m))
    if len(order) != len(nodes):
        raise CycleError([n for n in nodes if indeg[n] > 0])
    return tuple(order)


# --------------------------------------------------------------------------
# cost helpers


def mean_exec_time(task: TaskNode) -> float:
    vals = [t for t in task.exec_time if t is not None]
    return sum(vals) / len(vals)


def mean_power(task: TaskNode) -> float:
    vals = [p for p in task.power if p is not None]
    return sum(vals) / len(vals)


def avg_comm_cost(edge: Edge, platform: Platform) -> float:
    if platform.n_pes == 1 or edge.data_volume == 0:
        return 0.0
    return edge.data_volume / platform.mean_bandwidth


# --------------------------------------------------------------------------
# workload


@dataclass(frozen=True)
class WorkloadSpec:
    mix: tuple[tuple[AppDag, float], ...]
    target_frame_rate: float
    duration: float
    arrival_distribution: str = "exponential"
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "mix", tuple((d, float(p)) for d, p in self.mix))
        total = sum(p for _, p in self.mix)
        if self.mix and abs(total - 1.0) > 1e-9:
            raise ValidationError("mix", f"probabilities sum to {total}, expected 1")
        if any(p < 0 for _, p in self.mix):
            raise ValidationError("mix", "negative probability")
        if not self.target_frame_rate > 0:
            raise ValidationError("target_frame_rate", "must be > 0")
        if not self.duration >= 0:
            raise ValidationError("duration", "must be >= 0")
        if self.arrival_distribution not in ARRIVAL_DISTRIBUTIONS:
            raise ValidationError("arrival_distribution", f"unknown {self.arrival_distribution!r}")

    def replace(self, **changes) -> "WorkloadSpec":
        import dataclasses

        return dataclasses.replace(self, **changes)

    def arrival_trace(self) -> list[tuple[float, int]]:
        """(time, mix index) pairs for every frame injected before ``duration``.

        Depends only on (seed, rate, duration, distribution, mix weights), so every
        scheduler sees the same frame sequence for a given sweep cell.
        """
        rng = np.random.default_rng(self.seed)
        probs = np.array([p for _, p in self.mix])
        trace = []
        mean_gap = 1.0 / self.target_frame_rate
        t = 0.0
        while True:
            if self.arrival_distribution == "fixed":
                t = len(trace) * mean_gap
            else:
                t += float(rng.exponential(mean_gap))
            if t >= self.duration or not self.mix:
                break
            app = int(rng.choice(len(self.mix), p=probs)) if len(self.mix) > 1 else 0
            trace.append((t, app))
        return trace


# --------------------------------------------------------------------------
# files


def _read_json(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno}: {exc.msg}") from None


def load_platform(path) -> Platform:
    return Platform.from_dict(_read_json(path))


def load_dag(path) -> AppDag:
    return AppDag.from_dict(_read_json(path))


def save_json(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=False) + "\n")


def load_workload(path) -> WorkloadSpec:
    """Workload document: {apps: [{dag: path|object, probability}], target_frame_rate,
    duration, arrival_distribution, seed}. Relative dag paths resolve against the file."""
    doc = _read_json(path)
    base = Path(path).parent
    try:
        mix = []
        for i, app in enumerate(doc["apps"]):
            src = app["dag"]
            dag = AppDag.from_dict(src) if isinstance(src, dict) else load_dag(base / src)
            mix.append((dag, float(app.get("probability", 1.0))))
        return WorkloadSpec(
            tuple(mix),
            float(doc["target_frame_rate"]),
            float(doc["duration"]),
            doc.get("arrival_distribution", "exponential"),
            int(doc.get("seed", 0)),
        )
    except KeyError as exc:
        raise ParseError(f"workload: missing field {exc.args[0]!r}") from None


def workload_to_dict(w: WorkloadSpec) -> dict:
    return {
        "apps": [{"dag": d.to_dict(), "probability": p} for d, p in w.mix],
        "target_frame_rate": w.target_frame_rate,
        "duration": w.duration,
        "arrival_distribution": w.arrival_distribution,
        "seed": w.seed,
    }


# --------------------------------------------------------------------------
# canonical example and synthetic profiles

# Topcuoglu et al. (2002) ten-task DAG: execution time on (P0, P1, P2).
_CANONICAL_EXEC = {
    1: (14, 16, 9),
    2: (13, 19, 18),
    3: (11, 13, 19),
    4: (13, 8, 17),
    5: (12, 13, 10),
    6: (13, 16, 9),
    7: (7, 15, 11),
    8: (5, 11, 14),
    9: (18, 12, 20),
    10: (21, 7, 16),
}
_CANONICAL_EDGES = (
    (1, 2, 18), (1, 3, 12), (1, 4, 9), (1, 5, 11), (1, 6, 14),
    (2, 8, 19), (2, 9, 16), (3, 7, 23), (4, 8, 27), (4, 9, 23),
    (5, 9, 13), (6, 8, 15), (7, 10, 17), (8, 10, 11), (9, 10, 13),
)


def canonical_dag() -> AppDag:
    tasks = tuple(
        TaskNode(tid, f"T{tid}", times, (1.0,) * len(times)) for tid, times in _CANONICAL_EXEC.items()
    )
    edges = tuple(Edge(a, b, float(v)) for a, b, v in _CANONICAL_EDGES)
    return AppDag("canonical", tasks, edges)


def canonical_platform() -> Platform:
    return Platform.uniform(3, 1.0, name="canonical")


@dataclass(frozen=True)
class SocProfile:
    """Relative speed / power of each PE, used to generate synthetic applications.

    ``kernel`` names the only kernel an accelerator runs (None for CPUs).
    """

    platform: Platform
    speed: tuple[float, ...]
    power: tuple[float, ...]
    kernel: tuple[str | None, ...] = field(default=())

    def __post_init__(self):
        if not self.kernel:
            object.__setattr__(self, "kernel", (None,) * self.platform.n_pes)


def biglittle_soc(n_big: int = 4, n_little: int = 4, bandwidth: float = 4.0) -> SocProfile:
    """Odroid-like big.LITTLE cluster: big cores ~2x faster at ~8x the power."""
    z = n_big + n_little
    pes = tuple(
        ProcessingElement(k, f"big{k}" if k < n_big else f"little{k - n_big}", "cpu",
                          0.1 if k < n_big else 0.02)
        for k in range(z)
    )
    bw = tuple(tuple(math.inf if a == b else bandwidth for b in range(z)) for a in range(z))
    speed = tuple(2.0 if k < n_big else 1.0 for k in range(z))
    power = tuple(2.0 if k < n_big else 0.25 for k in range(z))
    return SocProfile(Platform(pes, bw, "biglittle"), speed, power)


def accel_soc(n_cpu: int = 4, accels: Sequence[str] = ("fft", "fft", "viterbi", "viterbi", "mmult", "mmult"),
              bandwidth: float = 4.0) -> SocProfile:
    """ZCU102-like layout: general cores plus single-kernel accelerators."""
    z = n_cpu + len(accels)
    pes = []
    for k in range(z):
        if k < n_cpu:
            pes.append(ProcessingElement(k, f"cpu{k}", "cpu", 0.05))
        else:
            pes.append(ProcessingElement(k, f"{accels[k - n_cpu]}{k - n_cpu}", "accelerator", 0.01))
    bw = tuple(tuple(math.inf if a == b else bandwidth for b in range(z)) for a in range(z))
    speed = tuple(1.0 if k < n_cpu else 6.0 for k in range(z))
    power = tuple(1.0 if k < n_cpu else 0.3 for k in range(z))
    kernel = tuple(None if k < n_cpu else accels[k - n_cpu] for k in range(z))
    return SocProfile(Platform(tuple(pes), bw, "accel"), speed, power, kernel)


def synth_profile(
    n_tasks: int,
    width: int,
    n_pes: int,
    heterogeneity: float = 0.5,
    seed: int = 0,
    *,
    soc: SocProfile | None = None,
    accel_fraction: float = 0.0,
    base_cost: tuple[float, float] = (10.0, 40.0),
    volume: tuple[float, float] = (0.0, 20.0),
    name: str | None = None,
) -> AppDag:
    """Random layered DAG with one entry and one exit task.

    Exec time of task i on PE k is ``base_i / speed_k * U(1-h, 1+h)``, rounded to a
    positive integer; heterogeneity 0 gives identical times on every PE. Power is
    the PE's nominal power jittered by +-10 %. With ``soc`` and ``accel_fraction``,
    that fraction of tasks is tagged with an accelerator kernel and becomes
    runnable on the CPUs plus the matching accelerators; untagged tasks never run
    on accelerators.
    """
    if n_tasks < 2:
        raise ValueError("n_tasks must be >= 2")
    if n_pes < 1:
        raise ValueError("n_pes must be >= 1")
    if width < 1:
        raise ValueError("width must be >= 1")
    if not 0 <= heterogeneity < 1:
        raise ValueError("heterogeneity must be in [0, 1)")
    if not 0 <= accel_fraction <= 1:
        raise ValueError("accel_fraction must be in [0, 1]")
    if soc is not None and soc.platform.n_pes != n_pes:
        raise ValueError("soc platform size differs from n_pes")
    rng = np.random.default_rng(seed)
    speed = soc.speed if soc else (1.0,) * n_pes
    power = soc.power if soc else tuple(float(x) for x in rng.uniform(0.5, 2.0, n_pes))
    kernels = soc.kernel if soc else (None,) * n_pes
    cpu_pes = [k for k in range(n_pes) if kernels[k] is None]
    kernel_names = sorted({k for k in kernels if k is not None})

    # layers: entry, middle layers of at most `width`, exit
    middle = n_tasks - 2
    layers: list[list[int]] = [[0]]
    nxt = 1
    while middle > 0:
        w = int(rng.integers(1, min(width, middle) + 1)) if middle > width else middle
        if middle > width and rng.random() < 0.5:
            w = min(width, middle)
        layers.append(list(range(nxt, nxt + w)))
        nxt += w
        middle -= w
    layers.append([n_tasks - 1])

    edges = set()
    for upper, lower in zip(layers, layers[1:]):
        for t in lower:
            k = int(rng.integers(1, min(2, len(upper)) + 1))
            for p in rng.choice(upper, size=k, replace=False):
                edges.add((int(p), t))
        for p in upper:
            if not any(a == p for a, _ in edges):
                edges.add((p, int(rng.choice(lower))))

    tasks = []
    for i in range(n_tasks):
        base = rng.uniform(*base_cost)
        jitter = rng.uniform(1 - heterogeneity, 1 + heterogeneity, n_pes) if heterogeneity else np.ones(n_pes)
        pjit = rng.uniform(0.9, 1.1, n_pes)
        kernel = None
        if kernel_names and 0 < i < n_tasks - 1 and rng.random() < accel_fraction:
            kernel = kernel_names[int(rng.integers(len(kernel_names)))]
        times, pw = [], []
        for k in range(n_pes):
            ok = kernels[k] is None or kernels[k] == kernel
            if not ok:
                times.append(None)
                pw.append(None)
                continue
            times.append(float(max(1, round(base / speed[k] * jitter[k]))))
            pw.append(round(float(power[k] * pjit[k]), 4))
        if not cpu_pes and all(t is None for t in times):
            raise ValueError("platform has no PE able to run generic tasks")
        tasks.append(TaskNode(i, f"{kernel or 't'}{i}", tuple(times), tuple(pw)))
    elist = tuple(
        Edge(a, b, float(round(rng.uniform(*volume)))) for a, b in sorted(edges)
    )
    return AppDag(name or f"synth{seed}", tuple(tasks), elist)

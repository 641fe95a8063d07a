"""Command-line front end.

Exit codes: 0 success, 1 input error, 2 simulation deadlock, 3 solver infeasible.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

from .core import ScheduleTable, validate_schedule
from .cp import INFEASIBLE, CpInstance, cp_solve
from .metrics import (
    format_improvement_table,
    improvement_table,
    saturation_point,
    sweep_csv,
    sweep_point,
)
from .model import (
    AppDag,
    ModelError,
    Platform,
    canonical_dag,
    canonical_platform,
    load_dag,
    load_platform,
    load_workload,
)
from .schedulers import SchedulerKind, heft_base, peft_base
from .sim import DeadlockError, SimConfig, SimResult, profile_scheduler_overhead, run
from .sweep import log_rates, run_sweep

EXIT_OK, EXIT_INPUT, EXIT_DEADLOCK, EXIT_INFEASIBLE = 0, 1, 2, 3
STATIC_SCHEDULERS = ("heft_base", "peft_base", "cp")


class InputError(Exception):
    pass


# --------------------------------------------------------------------------
# documents


def _key_str(key) -> str:
    if isinstance(key, tuple):
        return f"{key[0]}:{key[1]}"
    return str(key)


def table_to_dict(table: ScheduleTable, names: dict | None = None) -> dict:
    names = names or {}
    rows = sorted(table.assignments.values(), key=lambda a: (a.start, a.pe, repr(a.task)))
    return {
        "assignments": [
            {"task": _key_str(a.task), "name": names.get(a.task, _key_str(a.task)), "pe": a.pe,
             "start": a.start, "end": a.end}
            for a in rows
        ],
        "dynamic_deps": sorted([_key_str(a), _key_str(b)] for a, b in table.dynamic_deps),
    }


def gantt_from_rows(rows, time_unit: str) -> dict:
    """rows: iterable of (pe, start, end, frame, task_name)."""
    per_pe: dict[int, list] = {}
    for pe, s, e, frame, name in rows:
        per_pe.setdefault(pe, []).append({"start": s, "end": e, "frame_id": frame, "task_name": name,
                                          "color": frame})
    for r in per_pe.values():
        r.sort(key=lambda x: (x["start"], x["end"]))
    return {"time_unit": time_unit, "rows": {str(k): per_pe[k] for k in sorted(per_pe)}}


def gantt_of_table(table: ScheduleTable, dag: AppDag, time_unit: str = "us") -> dict:
    rows = []
    for a in table.assignments.values():
        frame, tid = a.task if isinstance(a.task, tuple) else (0, a.task)
        rows.append((a.pe, a.start, a.end, frame, dag.task_map[tid].name))
    return gantt_from_rows(rows, time_unit)


def gantt_of_result(result: SimResult, dags: dict[str, AppDag]) -> dict:
    app_of = {f.frame_id: f.app for f in result.frames}
    rows = []
    for pe, busy in result.pe_busy.items():
        for b in busy:
            dag = dags.get(app_of[b.frame])
            name = dag.task_map[b.task].name if dag is not None else str(b.task)
            rows.append((pe, b.start, b.end, b.frame, name))
    return gantt_from_rows(rows, result.time_unit)


def _dump(obj, path: Path) -> None:
    path.write_text(json.dumps(obj, indent=2) + "\n")


def _fmt(x: float) -> str:
    return f"{x:g}"


# --------------------------------------------------------------------------
# inputs


def _platform(arg: str) -> Platform:
    if arg == "canonical":
        return canonical_platform()
    return load_platform(arg)


def _dag(arg: str) -> AppDag:
    if arg == "canonical":
        return canonical_dag()
    return load_dag(arg)


def _out_dir(arg: str | None) -> Path:
    out = Path(arg or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _need(args, *names: str) -> None:
    missing = [f"--{n.replace('_', '-')}" for n in names if getattr(args, n, None) is None]
    if missing:
        raise InputError(f"missing required option(s): {', '.join(missing)}")


def _check_widths(platform: Platform, dags: Sequence[AppDag]) -> None:
    for d in dags:
        if d.n_pes != platform.n_pes:
            raise InputError(f"DAG {d.app_name!r} has {d.n_pes} PE columns but the platform has {platform.n_pes} PEs")


# --------------------------------------------------------------------------
# commands


def cmd_validate(args) -> int:
    platform = _platform(args.platform) if args.platform else None
    dags = []
    if args.dag:
        dags.append(_dag(args.dag))
    if args.workload:
        dags.extend(d for d, _ in load_workload(args.workload).mix)
    if platform is not None:
        _check_widths(platform, dags)
    print(f"ok: platform={'yes' if platform else 'no'} dags={len(dags)}")
    return EXIT_OK


def cmd_schedule(args) -> int:
    kind = SchedulerKind.parse(args.scheduler).value
    if kind not in STATIC_SCHEDULERS:
        raise InputError(f"schedule supports {', '.join(STATIC_SCHEDULERS)}; got {kind!r}")
    _need(args, "platform", "dag")
    platform, dag = _platform(args.platform), _dag(args.dag)
    _check_widths(platform, [dag])
    status = None
    if kind == "heft_base":
        table = heft_base(dag, platform)
    elif kind == "peft_base":
        table = peft_base(dag, platform)
    else:
        sol = cp_solve(CpInstance([dag], platform), args.time_limit, args.max_width)
        if sol.status == INFEASIBLE:
            print("infeasible: some task has no PE able to run it", file=sys.stderr)
            return EXIT_INFEASIBLE
        table, status = sol.table, sol.status
    violations = validate_schedule(table, [dag], platform)
    doc = {"scheduler": kind, "makespan": table.makespan, "status": status, "valid": not violations,
           **table_to_dict(table, {t.id: t.name for t in dag.tasks}),
           "gantt": gantt_of_table(table, dag, args.time_unit)}
    out = _out_dir(args.out)
    _dump(doc, out / "schedule.json")
    print(f"makespan {_fmt(table.makespan)}")
    if status is not None:
        print(f"status {status}")
    return EXIT_OK


def _sim_config(args) -> SimConfig:
    return SimConfig(seed=args.seed, duration=args.duration, noise=args.noise, time_unit=args.time_unit,
                     cp_time_limit=args.time_limit, cp_max_width=args.max_width, record_timing=args.profile)


def cmd_simulate(args) -> int:
    kind = SchedulerKind.parse(args.scheduler)
    _need(args, "platform", "workload")
    platform, workload = _platform(args.platform), load_workload(args.workload)
    _check_widths(platform, [d for d, _ in workload.mix])
    try:
        result = run(platform, workload, kind, _sim_config(args))
    except DeadlockError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_DEADLOCK
    out = _out_dir(args.out)
    _dump(result.to_dict(timing=False), out / "result.json")
    (out / "metrics.csv").write_text(sweep_csv([sweep_point(result, platform)]))
    _dump(gantt_of_result(result, {d.app_name: d for d, _ in workload.mix}), out / "gantt.json")
    if args.profile and result.scheduler_calls:
        prof = profile_scheduler_overhead(result)
        _dump({"mean": prof.mean, "p95": prof.p95, "count": prof.count, "total": prof.total,
               "cdf": [list(p) for p in prof.cdf]}, out / "overhead.json")
    done = sum(1 for f in result.frames if f.done)
    print(f"frames {len(result.frames)} completed {done} energy {_fmt(result.energy_total)}")
    return EXIT_OK


def _rates(args) -> list[float]:
    if args.rates:
        return [float(r) for r in args.rates.split(",") if r.strip()]
    if args.rate_range:
        lo, hi, n = args.rate_range
        return log_rates(float(lo), float(hi), int(n))
    raise InputError("give --rates or --rate-range")


def cmd_sweep(args) -> int:
    _need(args, "platform", "workload")
    if args.jobs < 1 or (args.reps is not None and args.reps < 1):
        raise InputError("--jobs and --reps must be >= 1")
    platform, workload = _platform(args.platform), load_workload(args.workload)
    _check_widths(platform, [d for d, _ in workload.mix])
    if args.seed is not None:
        workload = workload.replace(seed=args.seed)
    if args.duration is not None:
        workload = workload.replace(duration=args.duration)
    kinds = [SchedulerKind.parse(s).value for s in args.schedulers.split(",")]
    rates = _rates(args)
    if not rates:
        raise InputError("rates must be non-empty")
    cfg = SimConfig(noise=args.noise, time_unit=args.time_unit, cp_time_limit=args.time_limit,
                    cp_max_width=args.max_width, record_timing=False)
    res = run_sweep(platform, workload, kinds, rates, args.reps, cfg, args.jobs)
    out = _out_dir(args.out)
    (out / "sweep.csv").write_text(sweep_csv(res.all_points()))
    lines = ["scheduler,saturation_rate,saturated_everywhere"]
    for k, pts in res.points.items():
        if len(pts) >= 2:
            sat = saturation_point(pts)
            lines.append(f"{k},{sat.rate!r},{str(sat.saturated_everywhere).lower()}")
    (out / "saturation.csv").write_text("\n".join(lines) + "\n")
    if len(res.points) > 1 and not res.failures:
        (out / "improvement.csv").write_text(format_improvement_table(improvement_table(res.points)))
    if res.failures:
        _dump([{"scheduler": f.cell.scheduler, "rate": f.cell.rate, "rep": f.cell.rep, "error": f.error}
               for f in res.failures], out / "failures.json")
    print(f"runs {res.runs} failures {len(res.failures)}")
    for line in lines[1:]:
        print(line)
    return EXIT_OK


def _load_instance(path: str) -> tuple[CpInstance, AppDag]:
    doc = json.loads(Path(path).read_text())
    base = Path(path).parent
    try:
        pl = doc["platform"]
        platform = Platform.from_dict(pl) if isinstance(pl, dict) else _platform(str(base / pl) if pl != "canonical" else pl)
        dags = []
        for i, d in enumerate(doc["dags"]):
            dag = AppDag.from_dict(d) if isinstance(d, dict) else _dag(str(base / d) if d != "canonical" else d)
            dags.append(dag.with_instance(i) if len(doc["dags"]) > 1 else dag)
    except KeyError as exc:
        raise InputError(f"instance: missing field {exc.args[0]!r}") from None
    return CpInstance(dags, platform, now=float(doc.get("now", 0.0))), dags[0]


def cmd_solve(args) -> int:
    if args.instance:
        inst, first = _load_instance(args.instance)
    elif args.dag and args.platform:
        first = _dag(args.dag)
        inst = CpInstance([first], _platform(args.platform))
    else:
        raise InputError("give --instance, or --dag and --platform")
    _check_widths(inst.platform, inst.dags)
    sol = cp_solve(inst, args.time_limit, args.max_width)
    if sol.status == INFEASIBLE:
        print("infeasible: some task has no PE able to run it", file=sys.stderr)
        return EXIT_INFEASIBLE
    out = _out_dir(args.out)
    names = {d.key(t.id): t.name for d in inst.dags for t in d.tasks}
    _dump({"objective": sol.objective, "status": sol.status, "nodes": sol.nodes,
           **table_to_dict(sol.table, names)}, out / "solution.json")
    print(f"objective {_fmt(sol.objective)}")
    print(f"status {sol.status}")
    return EXIT_OK


# --------------------------------------------------------------------------
# parser


class _Parser(argparse.ArgumentParser):
    # usage errors are input errors; exit status 2 is reserved for deadlocks
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="socsched", description="Heterogeneous SoC scheduling and simulation")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, *, dag=False, workload=False, scheduler=False):
        sp.add_argument("--platform", help="platform file, or 'canonical'")
        if dag:
            sp.add_argument("--dag", help="DAG file, or 'canonical'")
        if workload:
            sp.add_argument("--workload", help="workload file")
        if scheduler:
            sp.add_argument("--scheduler", default="heft_base")
        sp.add_argument("--time-limit", type=float, default=10.0, help="exact solver limit per call (s)")
        sp.add_argument("--max-width", type=int, default=None, help="exact solver branching width")
        sp.add_argument("--time-unit", default="us")
        sp.add_argument("--out", default=None, help="output directory")

    sp = sub.add_parser("validate", help="check platform / DAG / workload files")
    common(sp, dag=True, workload=True)
    sp.set_defaults(fn=cmd_validate)

    sp = sub.add_parser("schedule", help="static schedule of one DAG")
    common(sp, dag=True, scheduler=True)
    sp.set_defaults(fn=cmd_schedule)

    sp = sub.add_parser("simulate", help="run one simulation")
    common(sp, workload=True, scheduler=True)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--duration", type=float, default=None)
    sp.add_argument("--noise", type=float, default=0.0)
    sp.add_argument("--profile", action="store_true", help="record wall-clock scheduler overhead")
    sp.set_defaults(fn=cmd_simulate)

    sp = sub.add_parser("sweep", help="frame-rate sweep")
    common(sp, workload=True)
    sp.add_argument("--schedulers", default="heft_base,heft_dyn,heft_rt")
    sp.add_argument("--rates", default=None, help="comma-separated target rates")
    sp.add_argument("--rate-range", nargs=3, metavar=("LO", "HI", "N"), default=None,
                    help="N log-spaced rates from LO to HI")
    sp.add_argument("--reps", type=int, default=None, help="repetitions per cell (default 10, cp 3)")
    sp.add_argument("--jobs", type=int, default=1)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--duration", type=float, default=None)
    sp.add_argument("--noise", type=float, default=0.0)
    sp.set_defaults(fn=cmd_sweep)

    sp = sub.add_parser("solve", help="exact solver on an instance file")
    common(sp, dag=True)
    sp.add_argument("--instance", default=None)
    sp.set_defaults(fn=cmd_solve)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (InputError, ModelError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

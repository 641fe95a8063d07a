"""Makespan of four overlapping frames as HEFT_Dyn's ingredients are switched on one by one."""
from __future__ import annotations

import argparse

from socsched.model import WorkloadSpec, accel_soc, synth_profile
from socsched.schedulers import heft_base
from socsched.sim import SimConfig, frame_makespan, run

STEPS = (
    ("base", SimConfig(dyn_merge=False, dyn_running_constraints=False, dyn_dynamic_deps=False)),
    ("merge", SimConfig(dyn_merge=True, dyn_running_constraints=False, dyn_dynamic_deps=False)),
    ("+running", SimConfig(dyn_merge=True, dyn_running_constraints=True, dyn_dynamic_deps=False)),
    ("full", SimConfig()),
)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--gap", type=float, default=0.25, help="inter-arrival gap as a fraction of one frame's makespan")
    args = ap.parse_args()

    soc = accel_soc()
    print("seed," + ",".join(name for name, _ in STEPS))
    for seed in range(args.seeds):
        dag = synth_profile(34, 5, soc.platform.n_pes, 0.5, seed, soc=soc, accel_fraction=0.5)
        gap = args.gap * heft_base(dag, soc.platform).makespan
        wl = WorkloadSpec(((dag, 1.0),), 1.0 / gap, 3.5 * gap, "fixed", seed)
        spans = [frame_makespan(run(soc.platform, wl, "heft_dyn", cfg)) for _, cfg in STEPS]
        print(f"{seed}," + ",".join(f"{m:g}" for m in spans))


if __name__ == "__main__":
    main()

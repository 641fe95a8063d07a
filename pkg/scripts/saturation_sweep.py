"""Target vs achieved frame rate for heft_rt, heft_dyn and heft_base on the accelerator SoC.

    python3 scripts/saturation_sweep.py --out runs/saturation --jobs 4
"""
from __future__ import annotations

import argparse
import time
from pathlib import Path

from socsched.metrics import sweep_csv
from socsched.model import WorkloadSpec, accel_soc, synth_profile
from socsched.sweep import log_rates, run_sweep


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("runs/saturation"))
    ap.add_argument("--lo", type=float, default=0.004)
    ap.add_argument("--hi", type=float, default=0.03)
    ap.add_argument("--points", type=int, default=18)
    ap.add_argument("--reps", type=int, default=2)
    ap.add_argument("--duration", type=float, default=20000.0)
    ap.add_argument("--arrivals", choices=["fixed", "exponential"], default="fixed")
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()

    soc = accel_soc()
    apps = [synth_profile(15, 5, soc.platform.n_pes, 0.5, 100 + i, soc=soc, accel_fraction=0.5, name=f"app{i}")
            for i in range(2)]
    rates = log_rates(args.lo, args.hi, args.points)
    wl = WorkloadSpec(((apps[0], 0.8), (apps[1], 0.2)), rates[0], args.duration, args.arrivals, 0)

    t0 = time.perf_counter()
    res = run_sweep(soc.platform, wl, ["heft_rt", "heft_dyn", "heft_base"], rates, reps=args.reps, jobs=args.jobs)
    args.out.mkdir(parents=True, exist_ok=True)
    (args.out / "sweep.csv").write_text(sweep_csv(res.all_points()))
    print(f"{res.runs} simulations in {time.perf_counter() - t0:.0f} s, {len(res.failures)} failures")
    for kind, rate in res.saturation().items():
        ratios = " ".join(f"{p.achieved_rate / p.target_rate:.2f}" for p in res.points[kind])
        print(f"{kind:10s} saturation {rate:.5f}  achieved/target: {ratios}")


if __name__ == "__main__":
    main()

"""Per-invocation scheduling wall-clock of the ready-queue and whole-frame schedulers."""
from __future__ import annotations

import argparse

from socsched.model import WorkloadSpec, accel_soc, synth_profile
from socsched.sim import profile_scheduler_overhead, run


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--rates", type=float, nargs="+", default=[0.006, 0.009, 0.012, 0.016])
    ap.add_argument("--duration", type=float, default=10000.0)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--schedulers", nargs="+", default=["heft_rt", "heft_dyn", "peft_rt", "heft_base"])
    args = ap.parse_args()

    soc = accel_soc()
    apps = [synth_profile(15, 5, soc.platform.n_pes, 0.5, 100 + i, soc=soc, accel_fraction=0.5, name=f"app{i}")
            for i in range(2)]
    print("rate,scheduler,calls,total_ms,mean_us,p95_us")
    for rate in args.rates:
        wl = WorkloadSpec(((apps[0], 0.8), (apps[1], 0.2)), rate, args.duration, "exponential", args.seed)
        for kind in args.schedulers:
            p = profile_scheduler_overhead(run(soc.platform, wl, kind))
            print(f"{rate:g},{kind},{p.count},{p.total * 1e3:.2f},{p.total / p.count * 1e6:.1f},{p.p95 * 1e6:.1f}")


if __name__ == "__main__":
    main()

"""Energy and frame execution time of the EDP schedulers against heft_rt on big.LITTLE."""
from __future__ import annotations

import argparse

from socsched.metrics import avg_frame_exec, total_energy
from socsched.model import WorkloadSpec, biglittle_soc, synth_profile
from socsched.sim import run


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--rates", type=float, nargs="+", default=[0.001, 0.002, 0.004])
    ap.add_argument("--duration", type=float, default=20000.0)
    args = ap.parse_args()

    soc = biglittle_soc()
    print("seed,rate,scheduler,energy,avg_exec")
    for seed in range(args.seeds):
        apps = [synth_profile(20, 4, soc.platform.n_pes, 0.3, seed * 10 + i, soc=soc, name=f"a{i}") for i in range(2)]
        for rate in args.rates:
            wl = WorkloadSpec(((apps[0], 0.8), (apps[1], 0.2)), rate, args.duration, "exponential", seed)
            for kind in ("heft_edp", "heft_edp_lb", "heft_rt"):
                res = run(soc.platform, wl, kind)
                print(f"{seed},{rate:g},{kind},{total_energy(res, soc.platform).total:.1f},{avg_frame_exec(res):.2f}")


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Sweep the entry-trigger scale and table the resulting visit statistics.

For each q_scale, runs an ensemble and prints the mean visit frequency, the
distance-grouped frequencies, the log-log exponent refit on the 8 per-room
frequencies, and the end/innermost time-fraction ratio.  Handy for seeing how
the exploration statistics respond to the single calibrated knob.
"""

import argparse
import sys

from leechsim.automaton import AutomatonParams
from leechsim.fitstats import fit_power_law
from leechsim.geometry import build_corridor_template
from leechsim.locomotion import MotionParams
from leechsim.montecarlo import run_ensemble, time_fractions, visit_frequencies


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--q", type=float, nargs="+",
                        default=[0.02, 0.04, 0.06, 0.1, 0.2])
    parser.add_argument("--trials", type=int, default=400)
    parser.add_argument("--duration", type=int, default=1800)
    parser.add_argument("--seed", type=int, default=11)
    parser.add_argument("--workers", type=int, default=1)
    args = parser.parse_args(argv)

    env = build_corridor_template()
    auto = AutomatonParams()
    print("q_scale  mean_f  f(x=1)  f(x=2)  f(x=3)  f(x=4)  exponent  t_ratio")
    for q in args.q:
        motion = MotionParams(q_scale=q)
        trajs = run_ensemble(env, motion, auto, args.trials, args.seed,
                             args.duration, workers=args.workers)
        f = visit_frequencies(trajs)
        grouped = [(f[x] + f[9 - x]) / 2 for x in (1, 2, 3, 4)]
        mean = sum(f.values()) / 8
        b = float("nan")
        if all(v > 0 for v in f.values()):
            b = fit_power_law([(min(r, 9 - r), f[r]) for r in range(1, 9)]).b
        tf = time_fractions(trajs)
        inner = (tf[4] + tf[5]) / 2
        ratio = (tf[1] + tf[8]) / 2 / inner if inner > 0 else float("inf")
        print(f"{q:7.3f} {mean:7.3f} " +
              " ".join(f"{g:7.3f}" for g in grouped) +
              f" {b:9.3f} {ratio:8.2f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Trial ensembles with reproducible seeding and the room-visit statistics.

Per-trial seeds derive from (base_seed, trial_index) through a splitmix64
finalizer, so results are independent of execution order and of how many
workers run the trials.  Aggregations are plain counts and therefore
order-independent.
"""

from __future__ import annotations

from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .automaton import AutomatonParams, Mode
from .geometry import EnvironmentTemplate, room_distance_to_end
from .locomotion import MotionParams, Trajectory, run_trial

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


def derive_trial_seed(base_seed: int, index: int) -> int:
    """splitmix64 finalizer of base_seed advanced by (index + 1) gammas.

    The finalizer is a bijection on 64-bit words and the gamma is odd, so
    distinct indices under the same base seed never collide.
    """
    z = (base_seed + (index + 1) * _GAMMA) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


@dataclass
class EnsembleStats:
    """Visit frequencies, time fractions and mode dwell lists for one ensemble."""

    n_trials: int
    visit_freq: dict[int, float]
    time_fraction: dict[int, float]
    mode_dwell: dict[Mode, list[int]]


def _run_indexed(args) -> Trajectory:
    env, motion, auto, base_seed, duration, index = args
    return run_trial(env, motion, auto, derive_trial_seed(base_seed, index),
                     duration, trial_id=index)


def run_ensemble(
    env: EnvironmentTemplate,
    motion: MotionParams,
    auto: AutomatonParams,
    n_trials: int,
    base_seed: int,
    duration: int = 1800,
    workers: int = 1,
) -> list[Trajectory]:
    """Run ``n_trials`` independent trials; identical output for any worker count."""
    if n_trials < 1:
        raise ValueError(f"n_trials must be >= 1, got {n_trials}")
    tasks = [(env, motion, auto, base_seed, duration, i) for i in range(n_trials)]
    if workers <= 1 or n_trials == 1:
        return [_run_indexed(task) for task in tasks]
    chunk = max(1, n_trials // (workers * 4))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_indexed, tasks, chunksize=chunk))


def _checked_env(trajs: list[Trajectory]) -> EnvironmentTemplate:
    if not trajs:
        raise ValueError("empty ensemble")
    env = trajs[0].env
    if env is None:
        raise ValueError("trajectories carry no environment")
    for t in trajs[1:]:
        if t.env != env:
            raise ValueError("mixed environments in ensemble")
    if env.kind != "corridor":
        raise ValueError("room statistics require a corridor template")
    return env


def visit_frequencies(trajs: list[Trajectory]) -> dict[int, float]:
    """Fraction of trials in which each room shows up for at least one tick."""
    env = _checked_env(trajs)
    n = len(trajs)
    counts = dict.fromkeys(range(1, env.n_rooms + 1), 0)
    for traj in trajs:
        for room in np.unique(traj.regions):
            if room > 0:
                counts[int(room)] += 1
    return {room: c / n for room, c in counts.items()}


def time_fractions(trajs: list[Trajectory]) -> dict[int, float]:
    """Per-room share of all ticks across the ensemble."""
    env = _checked_env(trajs)
    total = sum(t.n_ticks for t in trajs)
    ticks = dict.fromkeys(range(1, env.n_rooms + 1), 0)
    for traj in trajs:
        rooms, counts = np.unique(traj.regions[traj.regions > 0], return_counts=True)
        for room, c in zip(rooms, counts):
            ticks[int(room)] += int(c)
    return {room: c / total for room, c in ticks.items()}


def mode_dwell_histograms(trajs: list[Trajectory]) -> dict[Mode, list[int]]:
    """Lengths of maximal constant-mode runs, pooled per mode."""
    dwell: dict[Mode, list[int]] = {m: [] for m in Mode}
    for traj in trajs:
        modes = traj.modes
        if modes.size == 0:
            continue
        cuts = np.flatnonzero(np.diff(modes)) + 1
        starts = np.concatenate(([0], cuts))
        ends = np.concatenate((cuts, [modes.size]))
        for s, e in zip(starts, ends):
            dwell[Mode(int(modes[s]))].append(int(e - s))
    return dwell


def ensemble_stats(trajs: list[Trajectory]) -> EnsembleStats:
    return EnsembleStats(
        n_trials=len(trajs),
        visit_freq=visit_frequencies(trajs),
        time_fraction=time_fractions(trajs),
        mode_dwell=mode_dwell_histograms(trajs),
    )


def write_stats_csv(env: EnvironmentTemplate, stats: EnsembleStats, path) -> None:
    """Write ``room,distance_x,visit_freq,time_fraction`` rows."""
    lines = ["room,distance_x,visit_freq,time_fraction"]
    for room in sorted(stats.visit_freq):
        lines.append(
            f"{room},{room_distance_to_end(env, room)},"
            f"{stats.visit_freq[room]:.6f},{stats.time_fraction[room]:.6f}"
        )
    Path(path).write_text("\n".join(lines) + "\n", newline="\n")


def write_dwell_csv(stats: EnsembleStats, path) -> None:
    """Write ``mode,duration_ticks,count`` histogram rows."""
    lines = ["mode,duration_ticks,count"]
    for mode in Mode:
        hist = Counter(stats.mode_dwell[mode])
        for duration in sorted(hist):
            lines.append(f"{mode.name},{duration},{hist[duration]}")
    Path(path).write_text("\n".join(lines) + "\n", newline="\n")


def read_stats_csv(path) -> list[tuple[int, int, float, float]]:
    """Read rows written by :func:`write_stats_csv`."""
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != "room,distance_x,visit_freq,time_fraction":
        raise ValueError(f"{path}:1: bad or missing stats header")
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != 4:
            raise ValueError(f"{path}:{lineno}: expected 4 fields")
        try:
            rows.append((int(parts[0]), int(parts[1]), float(parts[2]), float(parts[3])))
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: {exc}") from None
    return rows

"""Command line front end: simulate | stats | fit | calibrate | render | track.

All randomness flows from the single --seed; there are no wall-clock or
entropy sources, so identical inputs give byte-identical outputs.  Exit codes:
0 ok, 2 configuration error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .automaton import AutomatonParams
from .fitstats import PowerLawFit, calibrate_entry_prob, fit_power_law
from .geometry import EnvironmentTemplate, GeometryError, build_corridor_template
from .locomotion import (
    MotionParams,
    Trajectory,
    TrajectoryFormatError,
    read_trajectory_csv,
    write_trajectory_csv,
)
from .montecarlo import (
    derive_trial_seed,
    ensemble_stats,
    read_stats_csv,
    run_ensemble,
    write_dwell_csv,
    write_stats_csv,
)
from .trackio import (
    frames_to_trajectory,
    read_frame_dir,
    render_activity_map,
    render_time_overlay,
    write_pgm,
    write_ppm,
)


class ConfigError(ValueError):
    """Invalid run configuration; maps to exit code 2."""


@dataclass(frozen=True)
class EnvironmentConfig:
    """Template kind plus dimensions, all lengths in mm."""

    kind: str = "corridor"
    rooms: int = 8
    room_size_mm: float = 15.0
    wall_mm: float = 2.0
    corridor_width_mm: float = 10.0
    opening_mm: float = 2.0

    _KEYS = ("kind", "rooms", "room_size_mm", "wall_mm", "corridor_width_mm",
             "opening_mm")

    def build(self) -> EnvironmentTemplate:
        if self.kind != "corridor":
            raise ConfigError(
                f"simulation supports only the corridor template, got {self.kind!r}"
            )
        try:
            return build_corridor_template(
                rooms=self.rooms,
                room_size=self.room_size_mm,
                wall=self.wall_mm,
                corridor_width=self.corridor_width_mm,
                opening=self.opening_mm,
            )
        except GeometryError as exc:
            raise ConfigError(str(exc)) from None

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self._KEYS}

    @classmethod
    def from_dict(cls, doc: dict) -> "EnvironmentConfig":
        unknown = set(doc) - set(cls._KEYS)
        if unknown:
            raise ConfigError(f"unknown environment config keys: {sorted(unknown)}")
        defaults = cls()
        return cls(
            kind=str(doc.get("kind", defaults.kind)),
            rooms=int(doc.get("rooms", defaults.rooms)),
            room_size_mm=float(doc.get("room_size_mm", defaults.room_size_mm)),
            wall_mm=float(doc.get("wall_mm", defaults.wall_mm)),
            corridor_width_mm=float(doc.get("corridor_width_mm",
                                            defaults.corridor_width_mm)),
            opening_mm=float(doc.get("opening_mm", defaults.opening_mm)),
        )


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved run description; validates every sub-config at load."""

    environment: EnvironmentConfig = field(default_factory=EnvironmentConfig)
    automaton: AutomatonParams = field(default_factory=AutomatonParams)
    motion: MotionParams = field(default_factory=MotionParams)
    n_trials: int = 40
    duration_ticks: int = 1800
    base_seed: int = 1
    out_dir: str = "runs/run"

    _KEYS = ("environment", "automaton", "motion", "n_trials", "duration_ticks",
             "base_seed", "out_dir")

    def __post_init__(self) -> None:
        if self.n_trials < 1:
            raise ConfigError(f"n_trials must be >= 1, got {self.n_trials}")
        if self.duration_ticks < 1:
            raise ConfigError(
                f"duration_ticks must be >= 1, got {self.duration_ticks}"
            )
        if self.base_seed < 0:
            raise ConfigError(f"base_seed must be >= 0, got {self.base_seed}")

    def to_dict(self) -> dict:
        return {
            "environment": self.environment.to_dict(),
            "automaton": self.automaton.to_config(),
            "motion": self.motion.to_config(),
            "n_trials": self.n_trials,
            "duration_ticks": self.duration_ticks,
            "base_seed": self.base_seed,
            "out_dir": self.out_dir,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "RunConfig":
        unknown = set(doc) - set(cls._KEYS)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        defaults = cls()
        try:
            return cls(
                environment=EnvironmentConfig.from_dict(doc.get("environment", {})),
                automaton=AutomatonParams.from_config(doc.get("automaton", {})),
                motion=MotionParams.from_config(doc.get("motion", {})),
                n_trials=int(doc.get("n_trials", defaults.n_trials)),
                duration_ticks=int(doc.get("duration_ticks", defaults.duration_ticks)),
                base_seed=int(doc.get("base_seed", defaults.base_seed)),
                out_dir=str(doc.get("out_dir", defaults.out_dir)),
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from None


def load_run_config(path) -> RunConfig:
    """Load a RunConfig from a config file or from a run manifest."""
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    if "config" in doc:  # run manifest
        doc = doc["config"]
        if not isinstance(doc, dict):
            raise ConfigError(f"{path}: manifest config must be a JSON object")
    return RunConfig.from_dict(doc)


def _write_json(doc: dict, path) -> None:
    Path(path).write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n",
                          newline="\n")


def _apply_overrides(cfg: RunConfig, args) -> RunConfig:
    doc = cfg.to_dict()
    if args.trials is not None:
        doc["n_trials"] = args.trials
    if args.seed is not None:
        doc["base_seed"] = args.seed
    if args.duration is not None:
        doc["duration_ticks"] = args.duration
    if args.out is not None:
        doc["out_dir"] = args.out
    return RunConfig.from_dict(doc)


def _trial_csv_name(index: int) -> str:
    return f"trial_{index:04d}.csv"


def cmd_simulate(args) -> int:
    cfg = load_run_config(args.config) if args.config else RunConfig()
    cfg = _apply_overrides(cfg, args)
    env = cfg.environment.build()
    trajs = run_ensemble(env, cfg.motion, cfg.automaton, cfg.n_trials,
                         cfg.base_seed, cfg.duration_ticks, workers=args.workers)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for traj in trajs:
        write_trajectory_csv(traj, out / _trial_csv_name(traj.trial_id))
    manifest = {
        "config": cfg.to_dict(),
        "seed_derivation": "splitmix64(base_seed, trial_index)",
        "trial_seeds": [derive_trial_seed(cfg.base_seed, i)
                        for i in range(cfg.n_trials)],
    }
    _write_json(manifest, out / "manifest.json")
    print(f"wrote {cfg.n_trials} trajectories to {out}")
    return 0


def _load_run_dir(run_dir: Path) -> tuple[RunConfig, EnvironmentTemplate, list[Trajectory]]:
    manifest = run_dir / "manifest.json"
    if not manifest.is_file():
        raise ConfigError(f"no manifest.json in {run_dir}")
    cfg = load_run_config(manifest)
    env = cfg.environment.build()
    files = sorted(run_dir.glob("trial_*.csv"))
    if not files:
        raise TrajectoryFormatError(f"no trial_*.csv files in {run_dir}")
    return cfg, env, [read_trajectory_csv(p, env) for p in files]


def cmd_stats(args) -> int:
    run_dir = Path(args.run_dir)
    _, env, trajs = _load_run_dir(run_dir)
    stats = ensemble_stats(trajs)
    out = Path(args.out) if args.out else run_dir
    out.mkdir(parents=True, exist_ok=True)
    write_stats_csv(env, stats, out / "visits.csv")
    write_dwell_csv(stats, out / "dwell.csv")
    print(f"wrote visits.csv and dwell.csv to {out}")
    return 0


def cmd_fit(args) -> int:
    rows = read_stats_csv(args.stats_csv)
    points = [(x, freq) for _, x, freq, _ in rows if freq > 0]
    dropped = len(rows) - len(points)
    if dropped:
        print(f"dropped {dropped} zero-frequency rows", file=sys.stderr)
    fit = fit_power_law(points)
    doc = {
        "a": fit.a,
        "b": fit.b,
        "rss": fit.rss,
        "points": [{"x": x, "y": y} for x, y in points],
    }
    if args.out:
        _write_json(doc, args.out)
        print(f"wrote fit to {args.out}")
    else:
        print(json.dumps(doc, sort_keys=True, indent=2))
    return 0


def cmd_calibrate(args) -> int:
    cfg = load_run_config(args.config) if args.config else RunConfig()
    cfg = _apply_overrides(cfg, args)
    env = cfg.environment.build()
    target = PowerLawFit(
        a=cfg.automaton.a if args.target_a is None else args.target_a,
        b=cfg.automaton.b if args.target_b is None else args.target_b,
    )
    result = calibrate_entry_prob(
        env, cfg.motion, cfg.automaton, target,
        n_trials=cfg.n_trials, base_seed=cfg.base_seed, tol=args.tol,
        duration=cfg.duration_ticks, workers=args.workers,
    )
    doc = {
        "q_scale": result.q_scale,
        "score": result.score,
        "feasible": result.feasible,
        "converged": result.converged,
        "target": {"a": target.a, "b": target.b},
        "achieved": [
            {"room": room, "freq": freq, "target": result.target_values[room]}
            for room, freq in sorted(result.achieved.items())
        ],
        "evaluations": [
            {"q_scale": q, "mean_freq": mean, "score": score}
            for q, mean, score in result.evaluations
        ],
    }
    if args.out:
        _write_json(doc, args.out)
        print(f"wrote calibration report to {args.out}")
    else:
        print(json.dumps(doc, sort_keys=True, indent=2))
    return 0 if result.feasible else 3


def _env_for_trajectory(args, traj_path: Path) -> EnvironmentTemplate:
    manifest = Path(args.manifest) if args.manifest else traj_path.parent / "manifest.json"
    if not manifest.is_file():
        raise ConfigError(
            f"no manifest at {manifest}; pass --manifest to locate the template"
        )
    return load_run_config(manifest).environment.build()


def cmd_render(args) -> int:
    traj_path = Path(args.trajectory_csv)
    env = _env_for_trajectory(args, traj_path)
    traj = read_trajectory_csv(traj_path, env)
    if args.mode == "overlay":
        frame = render_time_overlay(traj, env, args.px_per_mm)
        out = Path(args.out) if args.out else \
            traj_path.with_name(traj_path.stem + "_overlay.ppm")
        write_ppm(out, frame)
    else:
        gray = render_activity_map(traj, env, args.px_per_mm)
        out = Path(args.out) if args.out else \
            traj_path.with_name(traj_path.stem + "_activity.pgm")
        write_pgm(out, gray)
    print(f"wrote {out}")
    return 0


def cmd_track(args) -> int:
    env = None
    if args.manifest:
        env = load_run_config(args.manifest).environment.build()
    frames = read_frame_dir(args.frame_dir)
    traj = frames_to_trajectory(
        frames,
        threshold=args.threshold,
        mm_per_px=1.0 / args.px_per_mm,
        env=env,
    )
    out = Path(args.out) if args.out else Path(args.frame_dir) / "trajectory.csv"
    write_trajectory_csv(traj, out)
    print(f"wrote {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="leechsim",
        description="Corridor-exploration simulator and analysis tools",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a trial ensemble to trajectory CSVs")
    p.add_argument("--config", help="run config or manifest JSON")
    p.add_argument("--trials", type=int, help="override n_trials")
    p.add_argument("--seed", type=int, help="override base_seed")
    p.add_argument("--duration", type=int, help="override duration_ticks")
    p.add_argument("--out", help="override output directory")
    p.add_argument("--workers", type=int, default=1, help="parallel trial workers")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("stats", help="aggregate a run directory into stats CSVs")
    p.add_argument("run_dir", help="directory holding manifest.json and trial CSVs")
    p.add_argument("--out", help="output directory (default: the run directory)")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("fit", help="fit a power law to a visit-stats CSV")
    p.add_argument("stats_csv", help="CSV with room,distance_x,visit_freq,time_fraction")
    p.add_argument("--out", help="write the fit report JSON here instead of stdout")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("calibrate", help="fit q_scale against a target visit law")
    p.add_argument("--config", help="run config JSON")
    p.add_argument("--target-a", type=float, dest="target_a",
                   help="target coefficient (default: automaton p3_a)")
    p.add_argument("--target-b", type=float, dest="target_b",
                   help="target exponent (default: automaton p3_b)")
    p.add_argument("--trials", type=int, help="override n_trials")
    p.add_argument("--seed", type=int, help="override base_seed")
    p.add_argument("--duration", type=int, help="override duration_ticks")
    p.add_argument("--tol", type=float, default=1.0 / 64.0,
                   help="bisection bracket tolerance")
    p.add_argument("--workers", type=int, default=1, help="parallel trial workers")
    p.add_argument("--out", help="write the calibration report JSON here")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("render", help="render a trajectory CSV to an image")
    p.add_argument("trajectory_csv")
    p.add_argument("--mode", choices=("overlay", "activity"), default="overlay")
    p.add_argument("--px-per-mm", type=float, dest="px_per_mm", default=4.0)
    p.add_argument("--manifest", help="manifest JSON describing the template "
                                      "(default: sibling manifest.json)")
    p.add_argument("--out", help="output image path")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("track", help="centroid-track a PPM frame directory")
    p.add_argument("frame_dir", help="directory of frame_%%06d.ppm files")
    p.add_argument("--threshold", type=int, default=40,
                   help="RGB darkness threshold; a pixel is dark when all "
                        "channels fall below it (useful range 30-50)")
    p.add_argument("--px-per-mm", type=float, dest="px_per_mm", default=4.0)
    p.add_argument("--manifest", help="manifest JSON used to derive regions")
    p.add_argument("--out", help="output trajectory CSV path")
    p.set_defaults(func=cmd_track)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

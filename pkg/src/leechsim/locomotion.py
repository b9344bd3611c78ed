"""Per-tick kinematics closing the loop between geometry and the automaton.

One tick: move according to the current mode, sense wall contact, compute the
room-entry trigger, advance the automaton, then apply room entry/exit
teleports.  Crawling in the corridor is straight-line motion along the
heading with reflection at the ends; exploration (and crawling inside a room)
is a random waypoint walk clipped to the containing region.  Room entry is
trigger-then-teleport through the opening rather than continuous steering.

Everything is deterministic given the rng stream; trials are self-contained
and safe to run concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .automaton import AutomatonParams, AutomatonState, Mode, _advance_automaton, p_visit
from .geometry import (
    CORRIDOR,
    WALL,
    EnvironmentTemplate,
    GeometryError,
    RegionId,
    locate,
    room_distance_to_end,
    room_id,
)

_TWO_PI = 2.0 * math.pi

MODE_UNKNOWN = 255  # mode code for tracked trajectories without mode labels
REGION_WALL = -1
REGION_UNKNOWN = -2


class TrajectoryFormatError(ValueError):
    """Raised for malformed trajectory CSV files; message names file and line."""


def entry_trigger_probability(x: float, auto: AutomatonParams,
                              q_scale: float) -> float:
    """Per-tick room-entry trigger while crawling over an opening.

    The shape is the hazard equivalent of the visit law, ln(1/(1-p_visit(x))),
    scaled by ``q_scale``: entries per trial are then near-Poisson with a rate
    proportional to that hazard, so the calibrated at-least-once frequencies
    1 - exp(-rate) reproduce the visit law's distance profile rather than a
    saturation-flattened copy of it.
    """
    return min(1.0, q_scale * -math.log1p(-p_visit(x, auto)))


@dataclass(frozen=True)
class MotionParams:
    """Kinematic constants; speeds are mm/s and translate via the tick length.

    The default crawl speed makes the per-tick step equal the trigger window
    width (opening + contact_radius), so a corridor pass samples every
    opening exactly once regardless of phase; it also puts the release-to-far-
    end crawl at about 43 ticks, matching the observed traversal time.

    ``q_scale`` scales the per-opening entry trigger, see
    :func:`entry_trigger_probability`.
    """

    v_crawl: float = 3.0
    v_explore: float = 1.5
    contact_radius: float = 1.0
    q_scale: float = 0.25

    def __post_init__(self) -> None:
        if self.v_crawl <= 0 or self.v_explore <= 0:
            raise ValueError("speeds must be > 0")
        if self.contact_radius < 0:
            raise ValueError("contact_radius must be >= 0")
        if not 0.0 <= self.q_scale <= 1.0:
            raise ValueError("q_scale must lie in [0, 1]")

    _CONFIG_KEYS = ("v_crawl_mm_s", "v_explore_mm_s", "contact_radius_mm", "q_scale")

    def to_config(self) -> dict:
        return {
            "v_crawl_mm_s": self.v_crawl,
            "v_explore_mm_s": self.v_explore,
            "contact_radius_mm": self.contact_radius,
            "q_scale": self.q_scale,
        }

    @classmethod
    def from_config(cls, doc: dict) -> "MotionParams":
        unknown = set(doc) - set(cls._CONFIG_KEYS)
        if unknown:
            raise ValueError(f"unknown motion config keys: {sorted(unknown)}")
        defaults = cls()
        return cls(
            v_crawl=float(doc.get("v_crawl_mm_s", defaults.v_crawl)),
            v_explore=float(doc.get("v_explore_mm_s", defaults.v_explore)),
            contact_radius=float(doc.get("contact_radius_mm", defaults.contact_radius)),
            q_scale=float(doc.get("q_scale", defaults.q_scale)),
        )


@dataclass(frozen=True)
class LeechState:
    """Full agent state for one tick: automaton, senses and pose."""

    automaton: AutomatonState
    m: int
    pos: tuple[float, float]
    heading: tuple[float, float]
    region: RegionId


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Per-tick record of one trial, stored as parallel arrays.

    ``regions`` uses integer codes: 0 for the corridor, i for room i, -1 for
    wall (never produced by simulation), -2 for unknown (tracked data).
    ``ms`` carries the mechanoreceptor bit so the closed loop can be audited
    offline; it is not part of the CSV format.
    """

    env: EnvironmentTemplate | None
    trial_id: int
    seed: int
    xs: np.ndarray
    ys: np.ndarray
    modes: np.ndarray
    regions: np.ndarray
    ms: np.ndarray

    @property
    def n_ticks(self) -> int:
        return int(self.xs.shape[0])


def mode_label(code: int) -> str:
    if code == MODE_UNKNOWN:
        return "UNKNOWN"
    return Mode(code).name


def region_label(code: int) -> str:
    if code == 0:
        return "C"
    if code > 0:
        return f"R{code}"
    return "W" if code == REGION_WALL else "UNKNOWN"


class _SimContext:
    """Constants precomputed once per (env, motion, auto) for the tick loop."""

    __slots__ = (
        "L", "H", "band_y1", "cor_mid", "room_y1", "r", "v_c", "v_e",
        "tau_s", "tau_a", "q_scale", "any_q", "rx0", "rx1", "cx",
        "windows", "spans", "room_gap", "entry_y", "entry_m", "exit_m",
        "start",
    )

    def __init__(self, env: EnvironmentTemplate, motion: MotionParams,
                 auto: AutomatonParams):
        if env.kind != "corridor":
            raise GeometryError("simulation requires a corridor template")
        if motion.contact_radius > env.wall_thickness:
            raise ValueError(
                "contact_radius must not exceed the wall thickness "
                f"({motion.contact_radius} > {env.wall_thickness})"
            )
        if locate(env, env.start_point) != CORRIDOR:
            raise GeometryError("start point must lie in the corridor")

        n = env.n_rooms
        self.L = env.interior_width
        self.H = env.interior_height
        room_rect = env.room_rect(1)
        self.room_y1 = room_rect[3]
        self.band_y1 = self.room_y1 + env.wall_thickness
        self.cor_mid = 0.5 * (self.band_y1 + self.H)
        self.r = motion.contact_radius
        self.v_c = motion.v_crawl * auto.tick
        self.v_e = motion.v_explore * auto.tick
        self.tau_s = auto.tau_s
        self.tau_a = auto.tau_a
        self.q_scale = motion.q_scale
        self.any_q = motion.q_scale > 0.0
        self.start = env.start_point

        rx0, rx1, cx, windows, spans, room_gap = [], [], [], [], [], []
        half = 0.5 * self.r
        for i in range(1, n + 1):
            rect = env.room_rect(i)
            opening = env.opening_for_room(i)
            lo, hi = opening.span
            rx0.append(rect[0])
            rx1.append(rect[2])
            cx.append(opening.center)
            q_room = entry_trigger_probability(
                room_distance_to_end(env, i), auto, motion.q_scale)
            windows.append((lo - half, hi + half, q_room, i))
            spans.append((lo, hi, lo > 0.0, hi < self.L))
            room_gap.append((lo, hi, lo > rect[0], hi < rect[2]))
        self.rx0 = tuple(rx0)
        self.rx1 = tuple(rx1)
        self.cx = tuple(cx)
        self.windows = tuple(sorted(windows))
        self.spans = tuple(sorted(spans))
        self.room_gap = tuple(room_gap)

        self.entry_y = self.room_y1 - min(2.0, 0.5 * self.room_y1)
        self.entry_m = tuple(
            _contact(self, self.cx[i], self.entry_y, i + 1) for i in range(n)
        )
        self.exit_m = tuple(
            _contact(self, self.cx[i], self.cor_mid, 0) for i in range(n)
        )


def _contact(ctx: _SimContext, x: float, y: float, region: int) -> int:
    """Exact mechanoreceptor bit for radius <= wall thickness."""
    r = ctx.r
    if region == 0:
        d = x
        dd = ctx.L - x
        if dd < d:
            d = dd
        dd = ctx.H - y
        if dd < d:
            d = dd
        dy = y - ctx.band_y1
        if dy < d:
            gap = None
            for lo, hi, has_l, has_r in ctx.spans:
                if x <= lo:
                    break
                if x < hi:
                    gap = (lo, hi, has_l, has_r)
                    break
            if gap is None:
                d = dy
            else:
                lo, hi, has_l, has_r = gap
                if has_l:
                    dd = math.hypot(x - lo, dy)
                    if dd < d:
                        d = dd
                if has_r:
                    dd = math.hypot(hi - x, dy)
                    if dd < d:
                        d = dd
        return 1 if d <= r else 0

    i = region - 1
    d = x - ctx.rx0[i]
    dd = ctx.rx1[i] - x
    if dd < d:
        d = dd
    if y < d:
        d = y
    dy = ctx.room_y1 - y
    if dy < d:
        lo, hi, has_l, has_r = ctx.room_gap[i]
        if lo < x < hi:
            if has_l:
                dd = math.hypot(x - lo, dy)
                if dd < d:
                    d = dd
            if has_r:
                dd = math.hypot(hi - x, dy)
                if dd < d:
                    d = dd
        else:
            d = dy
    return 1 if d <= r else 0


def _tick(ctx, rand, mode, t, x, y, hx, region):
    """Advance scalars by one tick; returns (mode, t, x, y, hx, region, m).

    Draw order per tick is fixed: waypoint angle (when the mode moves
    randomly), then the automaton transition, then the exit-heading coin.
    """
    # (1) move
    if mode == 1:  # crawl
        if region == 0:
            x += ctx.v_c * hx
            if x <= 0.0:
                x = 0.0
                hx = 1.0
            elif x >= ctx.L:
                x = ctx.L
                hx = -1.0
        else:
            ang = rand() * _TWO_PI
            i = region - 1
            x = min(max(x + ctx.v_e * math.cos(ang), ctx.rx0[i]), ctx.rx1[i])
            y = min(max(y + ctx.v_e * math.sin(ang), 0.0), ctx.room_y1)
    elif mode == 2:  # explore
        ang = rand() * _TWO_PI
        nx = x + ctx.v_e * math.cos(ang)
        ny = y + ctx.v_e * math.sin(ang)
        if region == 0:
            x = min(max(nx, 0.0), ctx.L)
            y = min(max(ny, ctx.band_y1), ctx.H)
        else:
            i = region - 1
            x = min(max(nx, ctx.rx0[i]), ctx.rx1[i])
            y = min(max(ny, 0.0), ctx.room_y1)

    # (2) sense
    m = _contact(ctx, x, y, region)

    # (3) entry trigger while crawling over an opening window
    q = 0.0
    enter = 0
    if mode == 1 and region == 0 and ctx.any_q:
        for w_lo, w_hi, q_room, ridx in ctx.windows:
            if x < w_lo:
                break
            if x <= w_hi:
                q = q_room
                enter = ridx
                break

    # (4) one automaton transition
    new_mode, t = _advance_automaton(mode, t, m, q, ctx.tau_s, ctx.tau_a, rand())

    # (5) teleports through the opening
    if enter and new_mode == 2:
        region = enter
        i = enter - 1
        x = ctx.cx[i]
        y = ctx.entry_y
        m = ctx.entry_m[i]
    elif region != 0 and mode == 2 and new_mode == 1:
        i = region - 1
        x = ctx.cx[i]
        y = ctx.cor_mid
        m = ctx.exit_m[i]
        region = 0
        hx = -1.0 if rand() < 0.5 else 1.0
    return new_mode, t, x, y, hx, region, m


def _init_scalars(ctx, rand):
    """Release state: crawling from the start point toward the far end."""
    x, y = ctx.start
    half = 0.5 * ctx.L
    if x > half:
        hx = -1.0
    elif x < half:
        hx = 1.0
    else:
        hx = -1.0 if rand() < 0.5 else 1.0
    return 1, 0, x, y, hx, 0, _contact(ctx, x, y, 0)


def initial_state(env: EnvironmentTemplate, motion: MotionParams,
                  auto: AutomatonParams, rng) -> LeechState:
    """LeechState at release, consuming the heading coin only when centered."""
    ctx = _SimContext(env, motion, auto)
    mode, t, x, y, hx, region, m = _init_scalars(ctx, rng.random)
    return LeechState(AutomatonState(Mode(mode), t), m, (x, y), (hx, 0.0), CORRIDOR)


def advance(leech: LeechState, env: EnvironmentTemplate, motion: MotionParams,
            auto: AutomatonParams, rng) -> LeechState:
    """One tick of the closed loop; pure given the rng stream."""
    if leech.region == WALL:
        raise GeometryError("leech state sits in wall material")
    region = 0 if leech.region == CORRIDOR else leech.region.index
    mode, t, x, y, hx, region, m = _tick(
        _SimContext(env, motion, auto), rng.random,
        int(leech.automaton.mode), leech.automaton.t,
        leech.pos[0], leech.pos[1], leech.heading[0], region,
    )
    if not (0.0 <= x <= env.interior_width and 0.0 <= y <= env.interior_height):
        raise GeometryError(f"position ({x}, {y}) escaped the interior")
    rid = CORRIDOR if region == 0 else room_id(region)
    return LeechState(AutomatonState(Mode(mode), t), m, (x, y), (hx, 0.0), rid)


def run_trial(env: EnvironmentTemplate, motion: MotionParams,
              auto: AutomatonParams, seed: int, duration: int = 1800,
              trial_id: int = 0) -> Trajectory:
    """Simulate one trial of ``duration`` ticks; bit-reproducible per seed.

    The first record (tick 0) is the release state at the start point, mode
    Crawl, heading toward the far corridor end; each later record is the
    state after one more tick.
    """
    if duration < 1:
        raise ValueError(f"duration must be >= 1 tick, got {duration}")
    ctx = _SimContext(env, motion, auto)
    rng = np.random.default_rng(seed)
    rand = rng.random
    mode, t, x, y, hx, region, m = _init_scalars(ctx, rand)

    xs = np.empty(duration)
    ys = np.empty(duration)
    modes = np.empty(duration, dtype=np.uint8)
    regions = np.empty(duration, dtype=np.int16)
    ms = np.empty(duration, dtype=np.uint8)
    xs[0] = x
    ys[0] = y
    modes[0] = mode
    regions[0] = region
    ms[0] = m
    tick = _tick
    for k in range(1, duration):
        mode, t, x, y, hx, region, m = tick(ctx, rand, mode, t, x, y, hx, region)
        xs[k] = x
        ys[k] = y
        modes[k] = mode
        regions[k] = region
        ms[k] = m
    return Trajectory(env, trial_id, seed, xs, ys, modes, regions, ms)


def write_trajectory_csv(traj: Trajectory, path) -> None:
    """Write ``trial_id,tick,x_mm,y_mm,mode,region`` rows, floats at 3 decimals."""
    lines = ["trial_id,tick,x_mm,y_mm,mode,region"]
    tid = traj.trial_id
    xs, ys, modes, regions = traj.xs, traj.ys, traj.modes, traj.regions
    for k in range(traj.n_ticks):
        lines.append(
            f"{tid},{k},{xs[k]:.3f},{ys[k]:.3f},"
            f"{mode_label(int(modes[k]))},{region_label(int(regions[k]))}"
        )
    Path(path).write_text("\n".join(lines) + "\n", newline="\n")


_MODE_CODES = {"STILL": 0, "CRAWL": 1, "EXPLORE": 2, "UNKNOWN": MODE_UNKNOWN}


def _region_code(label: str, path, lineno: int) -> int:
    if label == "C":
        return 0
    if label.startswith("R") and label[1:].isdigit():
        return int(label[1:])
    if label == "W":
        return REGION_WALL
    if label == "UNKNOWN":
        return REGION_UNKNOWN
    raise TrajectoryFormatError(f"{path}:{lineno}: bad region {label!r}")


def read_trajectory_csv(path, env: EnvironmentTemplate | None = None) -> Trajectory:
    """Load a trajectory CSV; contact bits are not serialized and read as 0."""
    text = Path(path).read_text()
    lines = text.splitlines()
    if not lines or lines[0] != "trial_id,tick,x_mm,y_mm,mode,region":
        raise TrajectoryFormatError(f"{path}:1: bad or missing header")
    if len(lines) < 2:
        raise TrajectoryFormatError(f"{path}:1: no data rows")
    xs, ys, modes, regions = [], [], [], []
    trial_id = 0
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != 6:
            raise TrajectoryFormatError(f"{path}:{lineno}: expected 6 fields")
        try:
            trial_id = int(parts[0])
            xs.append(float(parts[2]))
            ys.append(float(parts[3]))
        except ValueError as exc:
            raise TrajectoryFormatError(f"{path}:{lineno}: {exc}") from None
        if parts[4] not in _MODE_CODES:
            raise TrajectoryFormatError(f"{path}:{lineno}: bad mode {parts[4]!r}")
        modes.append(_MODE_CODES[parts[4]])
        regions.append(_region_code(parts[5], path, lineno))
    return Trajectory(
        env=env,
        trial_id=trial_id,
        seed=0,
        xs=np.asarray(xs, dtype=float),
        ys=np.asarray(ys, dtype=float),
        modes=np.asarray(modes, dtype=np.uint8),
        regions=np.asarray(regions, dtype=np.int16),
        ms=np.zeros(len(xs), dtype=np.uint8),
    )

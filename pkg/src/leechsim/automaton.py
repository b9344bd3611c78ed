"""Three-state behavioral automaton: Still / Crawl / Explore.

A timer drives the exit hazards out of the still and active phases; a binary
mechanoreceptor forces exploration on wall contact, and an externally supplied
trigger probability can pull a crawling agent into exploration (used by the
locomotion layer when the agent is adjacent to a room opening).  Swimming is
deliberately not a state.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum


class Mode(IntEnum):
    """Behavioral mode; the integer order is also the sampling order."""

    STILL = 0
    CRAWL = 1
    EXPLORE = 2


@dataclass(frozen=True)
class AutomatonParams:
    """Timer caps (ticks), visit power-law coefficients and the tick length.

    ``tau_s``/``tau_a`` cap the still and active dwell timers; the exit hazard
    reaches 1 when the timer hits the cap.  ``a``/``b`` parameterize the
    room-visit law a*x**b used both as a calibration target and as the
    per-opening entry-trigger shape.
    """

    tau_s: int = 600
    tau_a: int = 900
    a: float = 0.35
    b: float = -0.82
    tick: float = 1.0

    def __post_init__(self) -> None:
        if self.tau_s < 1 or self.tau_a < 1:
            raise ValueError("timer caps must be >= 1 tick")
        if self.a <= 0:
            raise ValueError("coefficient a must be > 0")
        if self.b >= 0:
            raise ValueError("exponent b must be < 0")
        if self.tick <= 0:
            raise ValueError("tick length must be > 0 seconds")

    _CONFIG_KEYS = ("tau_s_ticks", "tau_a_ticks", "p3_a", "p3_b", "tick_seconds")

    def to_config(self) -> dict:
        return {
            "tau_s_ticks": self.tau_s,
            "tau_a_ticks": self.tau_a,
            "p3_a": self.a,
            "p3_b": self.b,
            "tick_seconds": self.tick,
        }

    @classmethod
    def from_config(cls, doc: dict) -> "AutomatonParams":
        unknown = set(doc) - set(cls._CONFIG_KEYS)
        if unknown:
            raise ValueError(f"unknown automaton config keys: {sorted(unknown)}")
        defaults = cls()
        return cls(
            tau_s=int(doc.get("tau_s_ticks", defaults.tau_s)),
            tau_a=int(doc.get("tau_a_ticks", defaults.tau_a)),
            a=float(doc.get("p3_a", defaults.a)),
            b=float(doc.get("p3_b", defaults.b)),
            tick=float(doc.get("tick_seconds", defaults.tick)),
        )


@dataclass(frozen=True, slots=True)
class AutomatonState:
    """Current mode plus ticks since the last still/active boundary crossing."""

    mode: Mode
    t: int = 0


def p_still_exit(t: int, params: AutomatonParams) -> float:
    """Per-tick hazard of leaving Still: 1/(tau_s - t + 1), reaching 1 at the cap."""
    if not 0 <= t <= params.tau_s:
        raise ValueError(f"still timer {t} outside [0, {params.tau_s}]")
    return 1.0 / (params.tau_s - t + 1)


def p_active_exit(t: int, params: AutomatonParams) -> float:
    """Per-tick hazard of leaving the active (crawl/explore) phase."""
    if not 0 <= t <= params.tau_a:
        raise ValueError(f"active timer {t} outside [0, {params.tau_a}]")
    return 1.0 / (params.tau_a - t + 1)


def p_visit(x: float, params: AutomatonParams) -> float:
    """Room-visit probability a*x**b at distance x (room-index units, x >= 1)."""
    if x < 1:
        raise ValueError(f"distance {x} below 1 room-index unit")
    return min(1.0, params.a * x ** params.b)


def transition_kernel(
    state: AutomatonState, m: int, params: AutomatonParams, q_enter: float
) -> tuple[float, float, float]:
    """Probability vector over (Still, Crawl, Explore) for the next tick.

    Rows (each sums to 1):

    * Still:   stay with 1-p1, otherwise split evenly between Crawl and Explore.
    * Crawl:   exit to Still with p2; conditional on staying active, contact
      (m=1) forces Explore, otherwise Explore fires with probability q_enter
      and Crawl continues with 1-q_enter.
    * Explore: exit to Still with p2; conditional on staying active, Explore
      persists while in contact and reverts to Crawl when contact is lost.
    """
    if m not in (0, 1):
        raise ValueError(f"mechanoreceptor bit must be 0 or 1, got {m}")
    if not 0.0 <= q_enter <= 1.0:
        raise ValueError(f"q_enter {q_enter} outside [0, 1]")
    if state.mode == Mode.STILL:
        p1 = p_still_exit(state.t, params)
        return (1.0 - p1, 0.5 * p1, 0.5 * p1)
    p2 = p_active_exit(state.t, params)
    if state.mode == Mode.CRAWL:
        p_explore = (1.0 - p2) * (m + (1 - m) * q_enter)
        p_crawl = (1.0 - p2) * (1 - m) * (1.0 - q_enter)
        return (p2, p_crawl, p_explore)
    return (p2, (1.0 - p2) * (1 - m), (1.0 - p2) * m)


def _advance_automaton(
    mode: int, t: int, m: int, q_enter: float, tau_s: int, tau_a: int, u: float
) -> tuple[int, int]:
    """Scalar fast path of one automaton step given a uniform draw ``u``.

    Mirrors inverse-CDF sampling over :func:`transition_kernel` in the fixed
    (Still, Crawl, Explore) order and applies the timer reset rule.  Kept as
    plain scalars so the locomotion loop can call it per tick cheaply.
    """
    if mode == 0:
        if not 0 <= t <= tau_s:
            raise ValueError(f"still timer {t} outside [0, {tau_s}]")
        p1 = 1.0 / (tau_s - t + 1)
        if u < 1.0 - p1:
            new_mode = 0
        elif u < (1.0 - p1) + 0.5 * p1:
            new_mode = 1
        else:
            new_mode = 2
    else:
        if not 0 <= t <= tau_a:
            raise ValueError(f"active timer {t} outside [0, {tau_a}]")
        p2 = 1.0 / (tau_a - t + 1)
        if mode == 1:
            p_crawl = (1.0 - p2) * (1 - m) * (1.0 - q_enter)
        else:
            p_crawl = (1.0 - p2) * (1 - m)
        if u < p2:
            new_mode = 0
        elif u < p2 + p_crawl:
            new_mode = 1
        else:
            new_mode = 2
    if (mode == 0) != (new_mode == 0):
        return new_mode, 0
    return new_mode, t + 1


def step(
    state: AutomatonState,
    m: int,
    q_enter: float,
    params: AutomatonParams,
    rng,
) -> AutomatonState:
    """Sample one transition using a single draw from ``rng``.

    The next mode is drawn by inverse CDF over the kernel vector in the fixed
    (Still, Crawl, Explore) order.  The timer resets to 0 exactly on
    Still<->active boundary crossings and increments otherwise; a
    Crawl<->Explore switch does not reset it.
    """
    p_still, p_crawl, _ = transition_kernel(state, m, params, q_enter)
    u = rng.random()
    if u < p_still:
        new_mode = Mode.STILL
    elif u < p_still + p_crawl:
        new_mode = Mode.CRAWL
    else:
        new_mode = Mode.EXPLORE
    if (state.mode == Mode.STILL) != (new_mode == Mode.STILL):
        return AutomatonState(new_mode, 0)
    return AutomatonState(new_mode, state.t + 1)

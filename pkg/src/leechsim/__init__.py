"""leechsim: stochastic exploration of a corridor-with-rooms template.

A three-state behavioral automaton (Still / Crawl / Explore) driven by timer
hazards and a wall-contact mechanoreceptor walks a planar template; ensemble
statistics, power-law fitting, trigger calibration and an offline
frame-tracking/rendering toolkit sit on top.  The ``leechsim`` CLI wires the
pieces into reproducible runs.
"""

from .automaton import AutomatonParams, AutomatonState, Mode
from .geometry import (
    EnvironmentTemplate,
    build_corridor_template,
    build_square_maze,
    locate,
    room_distance_to_end,
    wall_contact,
)
from .locomotion import LeechState, MotionParams, Trajectory, advance, run_trial
from .montecarlo import (
    EnsembleStats,
    derive_trial_seed,
    ensemble_stats,
    mode_dwell_histograms,
    run_ensemble,
    time_fractions,
    visit_frequencies,
)
from .fitstats import (
    CalibrationResult,
    PowerLawFit,
    calibrate_entry_prob,
    chi_square,
    fit_power_law,
)

__version__ = "0.1.0"

__all__ = [
    "AutomatonParams",
    "AutomatonState",
    "CalibrationResult",
    "EnsembleStats",
    "EnvironmentTemplate",
    "LeechState",
    "Mode",
    "MotionParams",
    "PowerLawFit",
    "Trajectory",
    "advance",
    "build_corridor_template",
    "build_square_maze",
    "calibrate_entry_prob",
    "chi_square",
    "derive_trial_seed",
    "ensemble_stats",
    "fit_power_law",
    "locate",
    "mode_dwell_histograms",
    "room_distance_to_end",
    "run_ensemble",
    "run_trial",
    "time_fractions",
    "visit_frequencies",
    "wall_contact",
]

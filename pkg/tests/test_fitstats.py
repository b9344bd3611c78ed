import pytest
from hypothesis import given
from hypothesis import strategies as st

from leechsim.fitstats import (
    PowerLawFit,
    calibrate_entry_prob,
    chi_square,
    fit_power_law,
)
from leechsim.geometry import build_corridor_template
from leechsim.locomotion import MotionParams
from leechsim.montecarlo import run_ensemble, visit_frequencies


def test_fit_recovers_visit_law_sample():
    points = [(1, 0.35), (2, 0.1983), (3, 0.1422), (4, 0.1123)]
    fit = fit_power_law(points)
    assert fit.a == pytest.approx(0.35, abs=1e-3)
    assert fit.b == pytest.approx(-0.82, abs=1e-2)


def test_fit_flat_data():
    fit = fit_power_law([(1, 0.7), (2, 0.7)])
    assert fit.b == 0.0
    assert fit.a == pytest.approx(0.7, rel=1e-12)


def test_fit_exact_two_points():
    fit = fit_power_law([(1, 2), (2, 1)])
    assert fit.b == pytest.approx(-1.0, abs=1e-12)
    assert fit.a == pytest.approx(2.0, rel=1e-12)
    assert fit.rss == pytest.approx(0.0, abs=1e-24)


def test_fit_allows_duplicate_x():
    fit = fit_power_law([(1, 0.35), (1, 0.35), (2, 0.1983), (2, 0.1983)])
    assert fit.b == pytest.approx(-0.82, abs=1e-2)


def test_fit_errors():
    with pytest.raises(ValueError):
        fit_power_law([(1, 1.0)])
    with pytest.raises(ValueError):
        fit_power_law([(1, 1.0), (2, 0.0)])
    with pytest.raises(ValueError):
        fit_power_law([(1, 1.0), (2, -0.5)])
    with pytest.raises(ValueError):
        fit_power_law([(2, 1.0), (2, 2.0)])
    with pytest.raises(ValueError):
        fit_power_law([(-1, 1.0), (2, 2.0)])


@given(
    a=st.floats(min_value=1e-3, max_value=1e3),
    b=st.floats(min_value=-3.0, max_value=3.0),
)
def test_fit_machine_precision_on_exact_samples(a, b):
    points = [(x, a * x ** b) for x in (1.0, 2.0, 3.0, 5.0, 8.0)]
    fit = fit_power_law(points)
    assert fit.a == pytest.approx(a, rel=1e-9)
    assert fit.b == pytest.approx(b, abs=1e-9)


@given(k=st.floats(min_value=1e-6, max_value=1e6))
def test_fit_scale_equivariance(k):
    base = [(1.0, 0.9), (2.0, 0.5), (4.0, 0.3)]
    ref = fit_power_law(base)
    scaled = fit_power_law([(x, k * y) for x, y in base])
    assert scaled.b == pytest.approx(ref.b, abs=1e-9)
    assert scaled.a == pytest.approx(k * ref.a, rel=1e-9)


def test_chi_square_exact_match_is_zero():
    assert chi_square([25, 25, 50], [0.25, 0.25, 0.5]) == 0.0


def test_chi_square_worked_example():
    assert chi_square([10, 0], [0.5, 0.5]) == pytest.approx(10.0)


def test_chi_square_permutation_invariant():
    a = chi_square([10, 20, 70], [0.2, 0.3, 0.5])
    b = chi_square([70, 10, 20], [0.5, 0.2, 0.3])
    assert a == pytest.approx(b)


def test_chi_square_errors():
    with pytest.raises(ValueError):
        chi_square([0, 0], [0.5, 0.5])
    with pytest.raises(ValueError):
        chi_square([1, 2], [0.5, 0.0])
    with pytest.raises(ValueError):
        chi_square([1, 2], [0.5, 0.4])
    with pytest.raises(ValueError):
        chi_square([1, 2, 3], [0.5, 0.5])


def _small_setup():
    env = build_corridor_template()
    from leechsim.automaton import AutomatonParams

    return env, MotionParams(), AutomatonParams()


def test_calibrate_tiny_target_drives_q_to_zero():
    env, motion, auto = _small_setup()
    result = calibrate_entry_prob(
        env, motion, auto, PowerLawFit(a=0.004, b=-0.82),
        n_trials=60, base_seed=4, tol=1 / 32, duration=400,
    )
    assert result.feasible
    assert result.q_scale <= 2 / 32


def test_zero_trigger_error_equals_sum_of_squared_targets():
    env, motion, auto = _small_setup()
    from dataclasses import replace

    trajs = run_ensemble(env, replace(motion, q_scale=0.0), auto, 30, 8, duration=300)
    freq = visit_frequencies(trajs)
    assert all(v == 0.0 for v in freq.values())
    targets = {r: 0.35 * min(r, 9 - r) ** -0.82 for r in range(1, 9)}
    score = sum((freq[r] - targets[r]) ** 2 for r in targets)
    assert score == pytest.approx(sum(t ** 2 for t in targets.values()))


def test_calibrate_reproducible():
    env, motion, auto = _small_setup()
    kwargs = dict(n_trials=40, base_seed=10, tol=1 / 8, duration=300)
    r1 = calibrate_entry_prob(env, motion, auto, PowerLawFit(0.35, -0.82), **kwargs)
    r2 = calibrate_entry_prob(env, motion, auto, PowerLawFit(0.35, -0.82), **kwargs)
    assert r1.q_scale == r2.q_scale
    assert r1.evaluations == r2.evaluations
    assert r1.achieved == r2.achieved


def test_calibrate_infeasible_reports_achieved_curve():
    env, motion, auto = _small_setup()
    result = calibrate_entry_prob(
        env, motion, auto, PowerLawFit(a=1.0, b=-1e-6),
        n_trials=30, base_seed=6, tol=1 / 8, duration=150,
    )
    assert not result.feasible
    assert result.q_scale == 1.0
    assert set(result.achieved) == set(range(1, 9))
    assert all(result.achieved[r] < result.target_values[r] for r in range(1, 9))


def test_calibrate_rejects_bad_target():
    env, motion, auto = _small_setup()
    with pytest.raises(ValueError):
        calibrate_entry_prob(env, motion, auto, PowerLawFit(a=1.5, b=-0.1),
                             n_trials=10, base_seed=0, duration=100)
    with pytest.raises(ValueError):
        calibrate_entry_prob(env, motion, auto, PowerLawFit(0.35, -0.82),
                             n_trials=10, base_seed=0, tol=0.0, duration=100)

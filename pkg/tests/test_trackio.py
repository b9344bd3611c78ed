import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from leechsim.locomotion import MODE_UNKNOWN, MotionParams, run_trial
from leechsim.trackio import (
    Frame,
    TrackError,
    blank_frame,
    extract_dark_pixels,
    frame_filename,
    frames_to_trajectory,
    read_frame_dir,
    read_pgm,
    read_ppm,
    render_activity_map,
    render_frames,
    render_time_overlay,
    time_color,
    write_pgm,
    write_ppm,
)


def _frame_with(pixels_and_colors, width=30, height=20):
    frame = blank_frame(width, height)
    for (x, y), color in pixels_and_colors:
        frame.pixels[y, x] = color
    return frame


def test_extract_dark_requires_all_channels_below():
    frame = _frame_with([((3, 4), (20, 20, 20)), ((5, 6), (20, 20, 60))])
    dark = extract_dark_pixels(frame, threshold=40)
    assert [tuple(p) for p in dark] == [(3, 4)]


def test_extract_dark_empty_on_white():
    assert extract_dark_pixels(blank_frame(10, 10), 40).shape == (0, 2)


def test_extract_dark_threshold_bounds():
    with pytest.raises(TrackError):
        extract_dark_pixels(blank_frame(4, 4), 0)
    with pytest.raises(TrackError):
        extract_dark_pixels(blank_frame(4, 4), 256)


@given(data=st.data())
def test_extract_dark_monotone_in_threshold(data):
    rng = np.random.default_rng(data.draw(st.integers(0, 2**32 - 1)))
    pixels = rng.integers(0, 256, size=(8, 8, 3), dtype=np.uint8)
    frame = Frame(8, 8, pixels)
    t1 = data.draw(st.integers(1, 254))
    t2 = data.draw(st.integers(t1, 255))
    set1 = {tuple(p) for p in extract_dark_pixels(frame, t1)}
    set2 = {tuple(p) for p in extract_dark_pixels(frame, t2)}
    assert set1 <= set2


def test_centroid_of_two_pixels():
    frame = _frame_with([((10, 10), (0, 0, 0)), ((12, 10), (0, 0, 0))])
    traj = frames_to_trajectory([frame], threshold=40, mm_per_px=0.5)
    assert traj.xs[0] == pytest.approx(11 * 0.5)
    assert traj.ys[0] == pytest.approx((20 - 1 - 10) * 0.5)
    assert traj.modes[0] == MODE_UNKNOWN


def test_empty_middle_frame_carries_forward():
    f1 = _frame_with([((4, 4), (0, 0, 0))])
    f2 = blank_frame(30, 20)
    f3 = _frame_with([((8, 4), (0, 0, 0))])
    traj = frames_to_trajectory([f1, f2, f3], threshold=40, mm_per_px=1.0)
    assert traj.xs[1] == traj.xs[0]
    assert traj.ys[1] == traj.ys[0]
    assert traj.xs[2] == 8.0


def test_empty_first_frame_raises():
    with pytest.raises(TrackError):
        frames_to_trajectory([blank_frame(10, 10)], threshold=40, mm_per_px=1.0)


def test_size_mismatch_raises():
    frames = [blank_frame(10, 10), blank_frame(11, 10)]
    frames[0].pixels[5, 5] = (0, 0, 0)
    with pytest.raises(TrackError):
        frames_to_trajectory(frames, threshold=40, mm_per_px=1.0)


def test_time_color_endpoints():
    assert time_color(0.0) == (0, 0, 255)
    assert time_color(0.5) == (0, 255, 0)
    assert time_color(1.0) == (255, 0, 0)


def test_time_color_clamps():
    assert time_color(-0.5) == (0, 0, 255)
    assert time_color(1.5) == (255, 0, 0)


def test_time_color_monotone_hue():
    us = [k / 200 for k in range(201)]
    colors = [time_color(u) for u in us]
    for (r1, g1, b1), (r2, g2, b2), u in zip(colors, colors[1:], us[1:]):
        if u <= 0.5:
            assert b2 <= b1 and g2 >= g1
        if u > 0.5:
            assert g2 <= g1 and r2 >= r1


def test_overlay_single_sample_is_blue(env, auto, motion):
    traj = run_trial(env, motion, auto, seed=1, duration=1)
    frame = render_time_overlay(traj, env, px_per_mm=2.0)
    blue = np.all(frame.pixels == (0, 0, 255), axis=2)
    assert blue.sum() == 13  # one radius-2 disc
    assert frame.pixels[0, 0].tolist() == [0, 0, 0]  # wall border


def test_overlay_two_samples_blue_and_red(env, auto):
    traj = run_trial(env, MotionParams(q_scale=0.0), auto, seed=1, duration=2)
    frame = render_time_overlay(traj, env, px_per_mm=2.0)
    assert np.all(frame.pixels == (0, 0, 255), axis=2).any()
    assert np.all(frame.pixels == (255, 0, 0), axis=2).any()


def test_overlay_later_sample_overdraws(env):
    # same position at u=0 and u=1 renders red
    from conftest import make_trajectory

    traj = make_trajectory(env, [0, 0])
    traj.xs[:] = 67.0
    traj.ys[:] = 22.0
    frame = render_time_overlay(traj, env, px_per_mm=2.0)
    assert not np.all(frame.pixels == (0, 0, 255), axis=2).any()
    assert np.all(frame.pixels == (255, 0, 0), axis=2).any()


def test_activity_stationary_blob(env):
    from conftest import make_trajectory

    traj = make_trajectory(env, [0] * 10)
    traj.xs[:] = 67.0
    traj.ys[:] = 22.0
    gray = render_activity_map(traj, env, px_per_mm=2.0)
    assert gray.max() == 255
    assert (gray == 255).sum() == 1
    assert (gray > 0).sum() == 1


def test_activity_uniform_path(env):
    from conftest import make_trajectory

    traj = make_trajectory(env, [0] * 20)
    traj.xs[:] = 20.0 + np.arange(20) * 2.0  # distinct pixels each tick
    traj.ys[:] = 22.0
    gray = render_activity_map(traj, env, px_per_mm=1.0)
    assert (gray == 255).sum() == 20
    assert (gray > 0).sum() == 20


def test_activity_inverse_map_recovers_histogram(env, auto):
    traj = run_trial(env, MotionParams(q_scale=0.3), auto, seed=9, duration=400)
    scale = 2.0
    gray = render_activity_map(traj, env, px_per_mm=scale)
    # rebuild the per-pixel histogram independently
    h, w = gray.shape
    counts = np.zeros((h, w), dtype=int)
    for k in range(traj.n_ticks):
        px = int(round(traj.xs[k] * scale))
        py = h - 1 - int(round(traj.ys[k] * scale))
        counts[py, px] += 1
    peak = counts.max()
    recovered = gray.astype(float) * peak / 255.0
    assert np.all(np.abs(recovered - counts) <= 0.5 * peak / 255.0 + 1e-9)


def test_ppm_round_trip(tmp_path):
    frame = _frame_with([((1, 2), (10, 200, 30))], width=5, height=4)
    path = tmp_path / "f.ppm"
    write_ppm(path, frame)
    raw = path.read_bytes()
    assert raw.startswith(b"P6\n5 4\n255\n")
    back = read_ppm(path)
    assert back.width == 5 and back.height == 4
    assert np.array_equal(back.pixels, frame.pixels)


def test_pgm_round_trip(tmp_path):
    gray = np.arange(12, dtype=np.uint8).reshape(3, 4)
    path = tmp_path / "g.pgm"
    write_pgm(path, gray)
    assert path.read_bytes().startswith(b"P5\n4 3\n255\n")
    assert np.array_equal(read_pgm(path), gray)


def test_ppm_header_with_comment(tmp_path):
    path = tmp_path / "c.ppm"
    path.write_bytes(b"P6\n# comment line\n2 1\n255\n" + bytes([0, 0, 0, 255, 255, 255]))
    frame = read_ppm(path)
    assert frame.width == 2 and frame.height == 1


def test_frame_dir_round_trip(tmp_path, env, auto):
    traj = run_trial(env, MotionParams(q_scale=0.5), auto, seed=2, duration=30)
    for i, frame in enumerate(render_frames(traj, env, px_per_mm=2.0)):
        write_ppm(tmp_path / frame_filename(i), frame)
    frames = list(read_frame_dir(tmp_path))
    assert len(frames) == 30
    tracked = frames_to_trajectory(frames, threshold=40, mm_per_px=0.5, env=env)
    err_px = np.hypot(tracked.xs - traj.xs, tracked.ys - traj.ys) * 2.0
    rms = float(np.sqrt(np.mean(err_px ** 2)))
    assert rms <= 1.0


def test_render_frames_walls_not_dark(env, auto, motion):
    traj = run_trial(env, motion, auto, seed=4, duration=1)
    frame = next(iter(render_frames(traj, env, px_per_mm=2.0)))
    dark = extract_dark_pixels(frame, threshold=40)
    assert 0 < dark.shape[0] <= 13  # only the leech disc


def test_read_frame_dir_requires_frames(tmp_path):
    with pytest.raises(TrackError):
        list(read_frame_dir(tmp_path))

import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from leechsim.geometry import (
    CORRIDOR,
    WALL,
    GeometryError,
    build_corridor_template,
    build_square_maze,
    env_to_json,
    locate,
    maze_wall_slots,
    room_distance_to_end,
    room_id,
    wall_contact,
    wall_distance,
)


def test_default_interior_dimensions(env):
    assert env.interior_width == 134.0  # 8*15 + 7*2, equals 138 - 2*2
    assert env.interior_height == 27.0  # 15 + 2 + 10


def test_default_room_rects(env):
    assert env.room_rect(1) == (0.0, 0.0, 15.0, 15.0)
    assert env.room_rect(8) == (119.0, 0.0, 134.0, 15.0)
    for i in range(1, 9):
        x0, y0, x1, y1 = env.room_rect(i)
        assert (x0, x1) == ((i - 1) * 17.0, (i - 1) * 17.0 + 15.0)
        assert (y0, y1) == (0.0, 15.0)


def test_room_widths_fill_interior(env):
    total = 8 * 15.0 + 7 * 2.0
    assert total == env.interior_width


def test_openings_centered_with_default_width(env):
    for opening in env.openings:
        lo, hi = opening.span
        assert hi - lo == pytest.approx(2.0)
        x0, _, x1, _ = env.room_rect(opening.room)
        assert (lo + hi) / 2 == pytest.approx((x0 + x1) / 2)
        assert x0 <= lo < hi <= x1


def test_single_room_template():
    env = build_corridor_template(rooms=1)
    assert env.interior_width == 15.0
    assert len(env.openings) == 1
    assert env.n_rooms == 1


def test_start_point_in_corridor(env):
    assert env.start_point == (130.0, 22.0)
    assert locate(env, env.start_point) == CORRIDOR


@pytest.mark.parametrize("kwargs", [
    {"rooms": 0},
    {"room_size": -1.0},
    {"wall": 0.0},
    {"corridor_width": -5.0},
    {"opening": 0.0},
    {"opening": 16.0},  # wider than the room
])
def test_bad_dimensions_raise(kwargs):
    with pytest.raises(GeometryError):
        build_corridor_template(**kwargs)


def test_locate_examples(env):
    assert locate(env, (7.5, 7.5)) == room_id(1)
    assert locate(env, (67.0, 22.0)) == CORRIDOR
    assert locate(env, (16.0, 10.0)) == WALL


def test_locate_outside_raises(env):
    for p in ((-0.1, 5.0), (134.1, 5.0), (5.0, -0.1), (5.0, 27.1)):
        with pytest.raises(GeometryError):
            locate(env, p)


def test_locate_boundary_tiebreak(env):
    # shared boundary resolves to the lowest region id
    assert locate(env, (15.0, 10.0)) == room_id(1)  # room edge against wall
    assert locate(env, (5.0, 17.0)) == CORRIDOR     # corridor floor against wall
    assert locate(env, (0.0, 0.0)) == room_id(1)


def test_locate_partition_grid(env):
    """Grid scan at 0.5 mm: every interior point maps to exactly one region."""
    step = 0.5
    nx = int(env.interior_width / step) + 1
    ny = int(env.interior_height / step) + 1
    for ix in range(nx):
        for iy in range(ny):
            p = (ix * step, iy * step)
            rid = locate(env, p)
            covering = [
                r.id for r in env.regions
                if r.rect[0] <= p[0] <= r.rect[2] and r.rect[1] <= p[1] <= r.rect[3]
            ]
            if covering:
                assert rid == min(covering)
            else:
                assert rid == WALL


def test_regions_disjoint_interiors(env):
    step = 0.5
    nx = int(env.interior_width / step)
    ny = int(env.interior_height / step)
    for ix in range(nx):
        for iy in range(ny):
            x, y = ix * step, iy * step
            strict = sum(
                1 for r in env.regions
                if r.rect[0] < x < r.rect[2] and r.rect[1] < y < r.rect[3]
            )
            assert strict <= 1


def test_room_distance_examples(env):
    assert room_distance_to_end(env, 1) == 1
    assert room_distance_to_end(env, 4) == 4
    assert room_distance_to_end(env, 5) == 4
    assert room_distance_to_end(env, 8) == 1


@given(rooms=st.integers(min_value=1, max_value=20), data=st.data())
def test_room_distance_symmetric(rooms, data):
    env = build_corridor_template(rooms=rooms)
    i = data.draw(st.integers(min_value=1, max_value=rooms))
    assert room_distance_to_end(env, i) == room_distance_to_end(env, rooms + 1 - i)


def test_room_distance_invalid(env):
    with pytest.raises(GeometryError):
        room_distance_to_end(env, 0)
    with pytest.raises(GeometryError):
        room_distance_to_end(env, 9)


def test_wall_contact_examples(env):
    assert wall_contact(env, (0.5, 22.0), 1.0) == 1
    assert wall_contact(env, (67.0, 22.0), 1.0) == 0
    assert wall_contact(env, (7.5, 7.5), 0.0) == 0


def test_wall_contact_room_interior(env):
    assert wall_contact(env, (7.5, 7.5), 1.0) == 0
    assert wall_contact(env, (0.5, 7.5), 1.0) == 1    # against the left wall
    assert wall_contact(env, (7.5, 14.5), 1.0) == 0   # under the opening gap
    assert wall_contact(env, (5.0, 14.5), 1.0) == 1   # under the wall band


def test_wall_distance_inside_wall_is_zero(env):
    assert wall_distance(env, (16.0, 10.0)) == 0.0


def test_maze_2x2_all_open():
    env = build_square_maze(2, cell_size=20.0, wall=2.0, wall_mask=0)
    assert env.n_rooms == 4
    assert len(env.openings) == 4
    assert env.wall_rects == ()  # no panels, so no corner post either


def test_maze_1x1():
    env = build_square_maze(1, cell_size=20.0, wall=2.0, wall_mask=0)
    assert env.n_rooms == 1
    assert env.openings == ()


def test_maze_disconnected_raises():
    full = (1 << maze_wall_slots(2)) - 1
    with pytest.raises(GeometryError):
        build_square_maze(2, cell_size=20.0, wall=2.0, wall_mask=full)


def _maze_connected_oracle(n, mask):
    """Independent BFS over the cell graph described by the mask."""
    def vbit(r, c):
        return (mask >> (r * (n - 1) + c)) & 1

    def hbit(r, c):
        return (mask >> (n * (n - 1) + r * n + c)) & 1

    adj = {(r, c): [] for r in range(n) for c in range(n)}
    for r in range(n):
        for c in range(n - 1):
            if not vbit(r, c):
                adj[(r, c)].append((r, c + 1))
                adj[(r, c + 1)].append((r, c))
    for r in range(n - 1):
        for c in range(n):
            if not hbit(r, c):
                adj[(r, c)].append((r + 1, c))
                adj[(r + 1, c)].append((r, c))
    seen = {(0, 0)}
    stack = [(0, 0)]
    while stack:
        for nb in adj[stack.pop()]:
            if nb not in seen:
                seen.add(nb)
                stack.append(nb)
    return len(seen) == n * n


@given(mask=st.integers(min_value=0, max_value=(1 << maze_wall_slots(3)) - 1))
def test_maze_3x3_connectivity_matches_oracle(mask):
    expected = _maze_connected_oracle(3, mask)
    try:
        env = build_square_maze(3, cell_size=15.0, wall=2.0, wall_mask=mask)
    except GeometryError:
        assert not expected
    else:
        assert expected
        assert env.n_rooms == 9


def test_maze_locate_and_contact():
    env = build_square_maze(2, cell_size=20.0, wall=2.0, wall_mask=1)  # one wall
    assert locate(env, (10.0, 10.0)) == room_id(1)
    assert locate(env, (21.0, 10.0)) == WALL  # the single present panel
    assert wall_contact(env, (20.5, 35.0), 1.0) == 0  # open edge above the post row


def test_env_json_format(env):
    doc = json.loads(env_to_json(env))
    assert doc["interior"] == [134.0, 27.0]
    assert doc["start"] == [130.0, 22.0]
    assert doc["regions"][0]["id"] == "C"
    assert [r["id"] for r in doc["regions"][1:]] == [f"R{i}" for i in range(1, 9)]
    first = doc["openings"][0]
    assert first["room"] == 1 and first["span"] == [6.5, 8.5]
    assert first["links"] == [0, 1]
    # serialized floats carry at most 3 decimals
    for r in doc["regions"]:
        for v in r["rect"]:
            assert v == round(v, 3)

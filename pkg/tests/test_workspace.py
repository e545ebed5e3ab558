"""Grid geometry, snapping, and workspace validation."""

import numpy as np
import pytest

from streamguide.workspace import (
    ConfigurationError, GridSpec, Obstacle, Workspace, grid_index_of,
    grid_point, snap_to_grid, validate,
)

GRID = GridSpec(length_x=20.0, length_y=20.0, count_x=100, count_y=100)


def obstacle(x, y, r=1.4, l=None, **kw):
    return Obstacle(position=(x, y), velocity=kw.pop("velocity", (0.0, 0.0)),
                    radius=r, influence_range=l if l is not None else r,
                    vortex_gain=kw.pop("vortex_gain", 1.0), **kw)


def test_grid_spacing_and_counts():
    assert GRID.spacing_x == 0.2
    assert GRID.spacing_y == 0.2
    assert GRID.total_points == 10000
    assert len(GRID.x_coords()) == 100


def test_grid_point_is_one_based():
    assert np.allclose(grid_point(GRID, 1, 1), [0.0, 0.0])
    assert np.allclose(grid_point(GRID, 2, 1) - grid_point(GRID, 1, 1), [0.2, 0.0])
    assert np.allclose(grid_point(GRID, 100, 100), [19.8, 19.8])


def test_grid_point_rejects_out_of_range():
    with pytest.raises(IndexError):
        grid_point(GRID, 0, 1)
    with pytest.raises(IndexError):
        grid_point(GRID, 1, 101)


def test_grid_point_injective_on_sample():
    seen = set()
    for m in range(1, 20):
        for n in range(1, 20):
            seen.add(tuple(grid_point(GRID, m, n)))
    assert len(seen) == 19 * 19


def test_grid_rejects_bad_dimensions():
    with pytest.raises(ConfigurationError):
        GridSpec(length_x=-1.0, length_y=20.0, count_x=100, count_y=100)
    with pytest.raises(ConfigurationError):
        GridSpec(length_x=20.0, length_y=20.0, count_x=0, count_y=100)


def test_snap_is_identity_on_grid_points():
    for m, n in [(1, 1), (50, 3), (100, 100)]:
        p = grid_point(GRID, m, n)
        assert np.array_equal(snap_to_grid(GRID, p), p)


def test_snap_nearest_and_tie_rule():
    # 14.9 sits exactly between 14.8 and 15.0; ties go to the smaller index
    assert np.allclose(snap_to_grid(GRID, np.array([14.9, 9.9])), [14.8, 9.8])
    # 0.31 is nearer 0.4 than 0.2
    assert np.allclose(snap_to_grid(GRID, np.array([0.31, 0.0])), [0.4, 0.0])


def test_snap_rejects_outside_workspace():
    with pytest.raises(ConfigurationError):
        snap_to_grid(GRID, np.array([-0.1, 5.0]))
    with pytest.raises(ConfigurationError):
        snap_to_grid(GRID, np.array([5.0, 20.1]))


def test_grid_index_round_trip():
    p = grid_point(GRID, 37, 81)
    assert grid_index_of(GRID, p) == (37, 81)


def test_grid_index_rejects_off_grid():
    with pytest.raises(ConfigurationError):
        grid_index_of(GRID, np.array([0.1, 0.0]))


def test_obstacle_field_validation():
    with pytest.raises(ConfigurationError):
        obstacle(1.0, 1.0, r=-0.5)
    with pytest.raises(ConfigurationError):
        Obstacle(position=(1.0, 1.0), velocity=(0, 0), radius=1.0,
                 influence_range=0.5, vortex_gain=1.0)


def test_obstacle_speed_and_moved_to():
    ob = obstacle(1.0, 1.0, velocity=(0.03, 0.04))
    assert ob.speed == pytest.approx(0.05)
    moved = ob.moved_to(np.array([2.0, 3.0]))
    assert np.allclose(moved.position, [2.0, 3.0])
    assert np.allclose(moved.velocity, ob.velocity)
    assert moved.radius == ob.radius


def test_validate_accepts_separated_obstacles():
    w = Workspace(grid=GRID, target=grid_point(GRID, 5, 50),
                  obstacles=(obstacle(10.0, 10.0), obstacle(14.0, 10.0)))
    assert validate(w) is w
    assert validate(validate(w)) is w  # idempotent


def test_validate_rejects_overlap():
    # distance 2.0 < 1.4 + 1.4
    w = Workspace(grid=GRID, target=grid_point(GRID, 5, 50),
                  obstacles=(obstacle(10.0, 10.0), obstacle(12.0, 10.0)))
    with pytest.raises(ConfigurationError, match="overlap"):
        validate(w)


def test_validate_rejects_target_inside_obstacle():
    w = Workspace(grid=GRID, target=np.array([10.0, 10.0]),
                  obstacles=(obstacle(10.2, 10.0),))
    with pytest.raises(ConfigurationError, match="target"):
        validate(w)


def test_validate_rejects_off_grid_positions():
    w = Workspace(grid=GRID, target=np.array([0.1, 0.0]))
    with pytest.raises(ConfigurationError):
        validate(w)
    w = Workspace(grid=GRID, target=grid_point(GRID, 1, 1),
                  obstacles=(obstacle(10.05, 10.0),))
    with pytest.raises(ConfigurationError):
        validate(w)

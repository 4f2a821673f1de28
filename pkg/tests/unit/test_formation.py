"""Unit tests for formation kinematics and distortion."""

import math
import os
import sys

import numpy as np
import pytest

sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '../..')))

from src.models.graph import pinned_system, ring_with_leader
from src.services.formation import (
    FormationTrace,
    best_rotation,
    distortion,
    init_circle,
    propagate,
    step_lengths,
)
from src.services.simulation import StepInput, Trajectory, simulate_dsr, simulate_first_order

RING = pinned_system(ring_with_leader(31, 16))
HEADING = StepInput(magnitude=math.pi / 2)


def headings(values, delta_t=0.01):
    states = np.asarray(values, dtype=float)
    return Trajectory(delta_t=delta_t, states=states, source=np.zeros(states.shape[0]),
                      kind="first-order")


def rotation(theta):
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, s], [-s, c]])


class TestInitCircle:

    def test_four_agents(self):
        np.testing.assert_allclose(
            init_circle(4), [[1, 0], [0, 1], [-1, 0], [0, -1]], atol=1e-15
        )

    def test_radius(self):
        points = init_circle(31, radius=2.5)
        np.testing.assert_allclose(np.linalg.norm(points, axis=1), 2.5, atol=1e-14)

    def test_single_agent(self):
        np.testing.assert_array_equal(init_circle(1, radius=3.0), [[3.0, 0.0]])

    def test_no_agents(self):
        with pytest.raises(ValueError):
            init_circle(0)


class TestPropagate:

    def test_heading_zero_moves_along_x(self):
        trace = propagate(headings(np.zeros((101, 2))), init_circle(2))
        np.testing.assert_allclose(trace.positions[-1] - trace.initial, [[1.0, 0.0]] * 2,
                                   atol=1e-12)

    def test_heading_quarter_turn_moves_along_y(self):
        trace = propagate(headings(np.full((101, 3), math.pi / 2)), init_circle(3))
        moved = trace.positions[-1] - trace.initial
        np.testing.assert_allclose(moved[:, 1], 1.0, atol=1e-12)
        np.testing.assert_allclose(moved[:, 0], 0.0, atol=1e-12)

    def test_first_row_is_initial(self):
        start = init_circle(5)
        trace = propagate(headings(np.random.default_rng(1).normal(size=(20, 5))), start, 3)
        np.testing.assert_array_equal(trace.positions[0], start)
        assert trace.leader == 3
        assert trace.steps == 19

    def test_unit_speed(self):
        traj = simulate_dsr(RING, 0.471, 0.8876, HEADING, 400, delta_t=0.01)
        trace = propagate(traj, init_circle(31))
        assert np.max(np.abs(step_lengths(trace) - 0.01)) <= 1e-12

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            propagate(headings(np.zeros((5, 3))), init_circle(4))

    def test_non_finite_headings(self):
        values = np.zeros((5, 2))
        values[3, 1] = np.nan
        with pytest.raises(ValueError):
            propagate(headings(values), init_circle(2))


class TestDistortion:

    def test_common_heading_keeps_shape(self):
        rng = np.random.default_rng(2)
        common = np.cumsum(rng.normal(scale=0.1, size=200))
        trace = propagate(headings(np.tile(common[:, None], (1, 6))), init_circle(6))
        for k in (0, 50, 199):
            assert distortion(trace, k) <= 1e-12

    def test_rigid_motion_is_free(self):
        rng = np.random.default_rng(3)
        start = rng.normal(size=(7, 2))
        moved = start @ rotation(0.9) + np.array([4.0, -2.0])
        positions = np.stack([start, moved])
        trace = FormationTrace(positions=positions, delta_t=1.0, initial=start)
        assert distortion(trace, 1) <= 1e-12

    def test_reflection_is_not_free(self):
        start = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 2.0]])
        mirrored = start * np.array([-1.0, 1.0])
        trace = FormationTrace(positions=np.stack([start, mirrored]), delta_t=1.0, initial=start)
        assert distortion(trace, 1) > 0.1

    def test_invariant_under_rigid_motion(self):
        rng = np.random.default_rng(4)
        start = rng.normal(size=(5, 2))
        later = start + rng.normal(scale=0.3, size=(5, 2))
        base = FormationTrace(positions=np.stack([start, later]), delta_t=1.0, initial=start)
        R, t = rotation(-2.1), np.array([0.5, 7.0])
        moved = FormationTrace(positions=np.stack([start, later @ R + t]), delta_t=1.0,
                               initial=start)
        assert distortion(moved, 1) == pytest.approx(distortion(base, 1), abs=1e-12)

    def test_best_rotation_is_proper(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            X = rng.normal(size=(6, 2))
            Y = rng.normal(size=(6, 2))
            X, Y = X - X.mean(axis=0), Y - Y.mean(axis=0)
            assert np.linalg.det(best_rotation(X, Y)) == pytest.approx(1.0)

    def test_single_agent(self):
        trace = propagate(headings(np.ones((10, 1))), init_circle(1))
        assert distortion(trace, 9) == 0.0

    def test_step_out_of_range(self):
        trace = propagate(headings(np.zeros((3, 2))), init_circle(2))
        with pytest.raises(ValueError):
            distortion(trace, 3)

    def test_dsr_formation_holds_shape_better(self):
        steps = 1204
        circle = init_circle(31)
        plain = propagate(simulate_first_order(RING, 0.471, HEADING, steps, delta_t=0.01), circle)
        boosted = propagate(simulate_dsr(RING, 0.471, 0.8876, HEADING, steps, delta_t=0.01),
                            circle)
        assert distortion(plain, steps) > distortion(boosted, steps)

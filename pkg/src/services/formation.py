# Formation Service
# Planar unit-speed kinematics driven by heading trajectories, and
# rigid-motion-invariant formation distortion

from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.typing import ArrayLike
from scipy.linalg import orthogonal_procrustes, svd

from src.services.simulation import Trajectory
from src.utils.logging import logger


@dataclass(frozen=True)
class FormationTrace:
    """positions[k, i] is the (x, y) of agent i at t = k * delta_t."""

    positions: np.ndarray
    delta_t: float
    initial: np.ndarray
    leader: Optional[int] = None

    def __post_init__(self):
        self.positions.setflags(write=False)
        self.initial.setflags(write=False)

    @property
    def steps(self) -> int:
        return self.positions.shape[0] - 1

    @property
    def n(self) -> int:
        return self.positions.shape[1]

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.positions.shape[0]) * self.delta_t


def init_circle(n: int, radius: float = 1.0) -> np.ndarray:
    """Agent i at angle 2 pi (i - 1) / n on a circle centred at the origin."""
    if n < 1:
        raise ValueError(f"need at least one agent, got {n}")
    angles = 2.0 * np.pi * np.arange(n) / n
    return radius * np.column_stack([np.cos(angles), np.sin(angles)])


def propagate(
    headings: Trajectory, initial: ArrayLike, leader: Optional[int] = None
) -> FormationTrace:
    """
    x_i(k+1) = x_i(k) + delta_t cos I_i(k), y_i(k+1) = y_i(k) + delta_t sin I_i(k).

    Args:
        headings: Heading trajectory, one column per agent
        initial: n x 2 starting positions
        leader: 1-based agent index carried for plotting

    Returns:
        FormationTrace with one position row per heading sample
    """
    initial = np.asarray(initial, dtype=float)
    states = np.asarray(headings.states)
    if initial.shape != (states.shape[1], 2):
        raise ValueError(
            f"initial positions must be {states.shape[1]} x 2, got {initial.shape}"
        )
    if not np.all(np.isfinite(states)):
        raise ValueError("headings must be finite")
    moves = headings.delta_t * np.stack([np.cos(states[:-1]), np.sin(states[:-1])], axis=-1)
    positions = np.empty((states.shape[0], states.shape[1], 2))
    positions[0] = initial
    positions[1:] = initial + np.cumsum(moves, axis=0)
    return FormationTrace(
        positions=positions, delta_t=headings.delta_t, initial=initial.copy(), leader=leader
    )


def best_rotation(source: np.ndarray, target: np.ndarray) -> np.ndarray:
    """Proper rotation R minimising ||source R - target|| for centred point sets."""
    R, _ = orthogonal_procrustes(source, target)
    if np.linalg.det(R) < 0:
        U, _, Vt = svd(source.T @ target)
        D = np.diag([1.0] * (R.shape[0] - 1) + [-1.0])
        R = U @ D @ Vt
    return R


def distortion(trace: FormationTrace, at_step: int) -> float:
    """
    RMS residual of the formation at ``at_step`` against the best rigid motion
    (rotation and translation, no scaling) of the initial formation.
    """
    if not 0 <= at_step <= trace.steps:
        raise ValueError(f"at_step {at_step} outside [0, {trace.steps}]")
    X = trace.initial - trace.initial.mean(axis=0)
    Y = trace.positions[at_step] - trace.positions[at_step].mean(axis=0)
    if trace.n == 1:
        return 0.0
    R = best_rotation(X, Y)
    residual = X @ R - Y
    value = float(np.sqrt(np.mean(np.sum(residual ** 2, axis=1))))
    logger.debug(f"distortion at step {at_step}: {value:.6g}")
    return value


def step_lengths(trace: FormationTrace) -> np.ndarray:
    """Distance travelled by every agent in every step."""
    return np.linalg.norm(np.diff(trace.positions, axis=0), axis=-1)

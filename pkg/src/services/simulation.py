# Simulation Service
# Discrete-time engines (first-order, DSR, second-order), the continuous
# approximation, and settling-time measurement

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Literal, Optional

import numpy as np
from numpy.typing import ArrayLike
from pydantic import BaseModel, ConfigDict, Field, field_validator

from src.models.graph import PinnedSystem
from src.services.stability import perron, second_order_input, second_order_perron
from src.utils.logging import log_run, logger

DIVERGENCE_THRESHOLD = 1e12
SETTLING_BAND = 0.02
TAIL_FRACTION = 0.1

# "amplitude": band = band_fraction * |final - initial|; "absolute": band = band_fraction state units
BandReference = Literal["amplitude", "absolute"]

TrajectoryKind = Literal["first-order", "dsr", "second-order", "continuous-approx"]


class SimulationError(ValueError):
    """Invalid simulation request or trajectory data."""
    pass


class StepInput(BaseModel):
    """Source signal: 0 before ``active_from_step``, ``magnitude`` from then on."""

    model_config = ConfigDict(frozen=True)

    magnitude: float
    active_from_step: int = Field(default=1, ge=0)

    @field_validator("magnitude")
    @classmethod
    def finite(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError("step magnitude must be finite")
        return v

    def value_at(self, k: int) -> float:
        return self.magnitude if k >= self.active_from_step else 0.0

    def sequence(self, count: int) -> np.ndarray:
        """I_s(k) for k = 0 .. count-1."""
        k = np.arange(count)
        return np.where(k >= self.active_from_step, self.magnitude, 0.0)


@dataclass(frozen=True)
class Trajectory:
    """
    Row k of ``states`` is I(k) at t = k * delta_t, k = 0 .. steps.

    A divergent run keeps the rows computed before the blow-up.
    """

    delta_t: float
    states: np.ndarray
    source: np.ndarray
    kind: TrajectoryKind
    divergent: bool = False
    rates: Optional[np.ndarray] = field(default=None)

    def __post_init__(self):
        self.states.setflags(write=False)
        self.source.setflags(write=False)
        if self.rates is not None:
            self.rates.setflags(write=False)

    @property
    def steps(self) -> int:
        return self.states.shape[0] - 1

    @property
    def n(self) -> int:
        return self.states.shape[1]

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.states.shape[0]) * self.delta_t

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def decimate(self, stride: int) -> "Trajectory":
        """Every ``stride``-th sample, starting at k = 0."""
        if stride < 1:
            raise SimulationError(f"stride must be >= 1, got {stride}")
        return replace(
            self,
            delta_t=self.delta_t * stride,
            states=np.array(self.states[::stride]),
            source=np.array(self.source[::stride]),
            rates=None if self.rates is None else np.array(self.rates[::stride]),
        )


@dataclass(frozen=True)
class SettlingReport:
    """Network-wide settling time: the latest last-exit over all agents."""

    Ts: float
    band_fraction: float
    per_agent_last_exit: np.ndarray
    converged: bool
    reference: str = "amplitude"
    band: float = math.nan


# =============================================================================
# Discrete engines
# =============================================================================
def dsr_step(
    P: np.ndarray,
    gB: np.ndarray,
    beta: float,
    prev: np.ndarray,
    cur: np.ndarray,
    source_value: float,
) -> np.ndarray:
    """I(k+1) = P I(k) + gamma B I_s(k) + beta (I(k) - I(k-1)); gB = gamma B."""
    nxt = P @ cur + gB * source_value
    if beta != 0:
        nxt = nxt + beta * (cur - prev)
    return nxt


def _check_steps(steps: int) -> None:
    if int(steps) != steps or steps < 1:
        raise SimulationError(f"steps must be a positive integer, got {steps}")


def _initial(sys: PinnedSystem, I0: Optional[ArrayLike]) -> np.ndarray:
    if I0 is None:
        return np.zeros(sys.n)
    x = np.asarray(I0, dtype=float).ravel()
    if x.shape != (sys.n,):
        raise SimulationError(f"I0 must have {sys.n} entries, got {x.size}")
    return x


def _iterate(
    step: Callable[[np.ndarray, np.ndarray, float], np.ndarray],
    x0: np.ndarray,
    source: np.ndarray,
    steps: int,
    threshold: float,
):
    """Run x(k+1) = step(x(k-1), x(k), I_s(k)); returns (states, divergent)."""
    states = np.empty((steps + 1, x0.size))
    states[0] = x0
    prev = x0
    for k in range(steps):
        nxt = step(prev, states[k], source[k])
        if not np.all(np.isfinite(nxt)) or np.max(np.abs(nxt)) > threshold:
            return states[: k + 1], True
        prev = states[k]
        states[k + 1] = nxt
    return states, False


def _log_trajectory(traj: Trajectory, **metrics) -> None:
    log_run(logger, traj.kind, {"steps": traj.steps, "divergent": traj.divergent, **metrics})
    if traj.divergent:
        logger.warning(f"{traj.kind} run diverged after {traj.steps} steps")


def simulate_first_order(
    sys: PinnedSystem,
    gamma: float,
    input: StepInput,
    steps: int,
    I0: Optional[ArrayLike] = None,
    threshold: float = DIVERGENCE_THRESHOLD,
    delta_t: float = 1.0,
) -> Trajectory:
    """I(k+1) = P I(k) + gamma B I_s(k) from I(0) = I0 (zeros by default)."""
    return _run_dsr(sys, gamma, 0.0, input, steps, I0, threshold, delta_t, "first-order")


def simulate_dsr(
    sys: PinnedSystem,
    gamma: float,
    beta: float,
    input: StepInput,
    steps: int,
    I0: Optional[ArrayLike] = None,
    threshold: float = DIVERGENCE_THRESHOLD,
    delta_t: float = 1.0,
) -> Trajectory:
    """
    DSR recursion with I(-1) = I(0); identical to simulate_first_order when
    beta = 0.
    """
    return _run_dsr(sys, gamma, beta, input, steps, I0, threshold, delta_t, "dsr")


def _run_dsr(sys, gamma, beta, input, steps, I0, threshold, delta_t, kind) -> Trajectory:
    _check_steps(steps)
    x0 = _initial(sys, I0)
    P = perron(sys, gamma)
    gB = gamma * sys.B
    source = input.sequence(steps + 1)
    states, divergent = _iterate(
        lambda prev, cur, s: dsr_step(P, gB, beta, prev, cur, s),
        x0, source, steps, threshold,
    )
    traj = Trajectory(delta_t=delta_t, states=states, source=source[: states.shape[0]],
                      kind=kind, divergent=divergent)
    _log_trajectory(traj, gamma=gamma, beta=beta)
    return traj


def simulate_second_order(
    sys: PinnedSystem,
    gamma_t: float,
    beta: float,
    delta_t: float,
    tilde_delta_t: float,
    input: StepInput,
    steps: int,
    threshold: float = DIVERGENCE_THRESHOLD,
) -> Trajectory:
    """
    Second-order system over [I; dI/dt] updated every ``tilde_delta_t`` seconds,
    from rest. ``states`` holds I, ``rates`` holds dI/dt.
    """
    _check_steps(steps)
    n = sys.n
    M = second_order_perron(sys, gamma_t, beta, delta_t, tilde_delta_t)
    b = second_order_input(sys, gamma_t, beta, delta_t, tilde_delta_t)
    source = input.sequence(steps + 1)
    stacked, divergent = _iterate(
        lambda prev, cur, s: M @ cur + b * s,
        np.zeros(2 * n), source, steps, threshold,
    )
    traj = Trajectory(
        delta_t=tilde_delta_t,
        states=np.array(stacked[:, :n]),
        source=source[: stacked.shape[0]],
        kind="second-order",
        divergent=divergent,
        rates=np.array(stacked[:, n:]),
    )
    _log_trajectory(traj, gamma_t=gamma_t, beta=beta, tilde_delta_t=tilde_delta_t)
    return traj


def simulate_continuous(
    sys: PinnedSystem,
    gamma_t: float,
    input: StepInput,
    t_end: float,
    h: float,
    I0: Optional[ArrayLike] = None,
) -> Trajectory:
    """
    Classical fourth-order Runge-Kutta integration of
    dI/dt = -gamma_t K I + gamma_t B I_s(t), sampled every ``h`` seconds.

    The source is held constant over each integrator step; it is on from t = 0
    when ``input.active_from_step`` <= 1, otherwise from integrator step
    ``active_from_step - 1``.
    """
    if not h > 0:
        raise SimulationError(f"integrator step must be positive, got {h}")
    if not t_end >= 0:
        raise SimulationError(f"t_end must be non-negative, got {t_end}")
    steps = int(round(t_end / h))
    A = -gamma_t * np.asarray(sys.K)
    gB = gamma_t * np.asarray(sys.B)
    on_from = max(0, input.active_from_step - 1)
    source = np.where(np.arange(steps + 1) >= on_from, input.magnitude, 0.0)

    states = np.empty((steps + 1, sys.n))
    states[0] = x = _initial(sys, I0)
    for k in range(steps):
        u = gB * source[k]
        k1 = A @ x + u
        k2 = A @ (x + 0.5 * h * k1) + u
        k3 = A @ (x + 0.5 * h * k2) + u
        k4 = A @ (x + h * k3) + u
        x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        states[k + 1] = x
    traj = Trajectory(delta_t=h, states=states, source=source, kind="continuous-approx")
    _log_trajectory(traj, gamma_t=gamma_t, h=h)
    return traj


# =============================================================================
# Settling
# =============================================================================
def settling_time(
    traj: Trajectory,
    final_value: float,
    band_fraction: float = SETTLING_BAND,
    tail_fraction: float = TAIL_FRACTION,
    reference: BandReference = "amplitude",
) -> SettlingReport:
    """
    Smallest sample time after which every agent stays within the band
    around ``final_value``.

    With ``reference="amplitude"`` the band is +/- band_fraction * amplitude,
    where the amplitude is max over agents of |final_value - I_i(0)|; a zero
    amplitude gives Ts = 0. With ``reference="absolute"`` the band is
    +/- band_fraction in state units (0.02 rad for a heading step).

    A sample counts as outside the band when the error is >= the band. When
    the trailing ``tail_fraction`` of samples is not all inside the band the
    report has converged=False and Ts = NaN.
    """
    if not band_fraction > 0:
        raise SimulationError(f"band_fraction must be positive, got {band_fraction}")
    if reference not in ("amplitude", "absolute"):
        raise SimulationError(f"unknown band reference {reference!r}")
    states = np.asarray(traj.states)
    rows, n = states.shape
    if reference == "absolute":
        band = band_fraction
    else:
        amplitude = float(np.max(np.abs(final_value - states[0])))
        if amplitude == 0.0:
            return SettlingReport(Ts=0.0, band_fraction=band_fraction,
                                  per_agent_last_exit=np.zeros(n), converged=True,
                                  reference=reference, band=0.0)
        band = band_fraction * amplitude

    with np.errstate(invalid="ignore"):
        outside = ~(np.abs(states - final_value) < band)
    tail = max(1, int(math.ceil(tail_fraction * rows)))
    converged = not traj.divergent and not outside[-tail:].any()

    times = traj.times
    per_agent = np.zeros(n)
    for i in range(n):
        exits = np.flatnonzero(outside[:, i])
        if exits.size:
            last = exits[-1] + 1
            per_agent[i] = times[last] if last < rows else np.nan
    Ts = float(np.max(per_agent)) if converged else float("nan")
    return SettlingReport(Ts=Ts, band_fraction=band_fraction,
                          per_agent_last_exit=per_agent, converged=converged,
                          reference=reference, band=band)


def default_steps(
    predicted_ts: float, delta_t: float, multiple: float = 5.0, minimum: int = 1000
) -> int:
    """ceil(multiple * predicted_ts / delta_t), at least ``minimum``."""
    return max(minimum, int(math.ceil(multiple * predicted_ts / delta_t)))


def rearranged_dsr_residual(
    sys: PinnedSystem,
    gamma: float,
    beta: float,
    prev: ArrayLike,
    cur: ArrayLike,
    nxt: ArrayLike,
    source_value: float,
) -> np.ndarray:
    """
    Residual of the DSR recursion in its momentum form
    beta (d(k+1) - d(k)) + (1 - beta) d(k+1) = -gamma K I(k) + gamma B I_s(k),
    with d(k) = I(k) - I(k-1).
    """
    prev, cur, nxt = (np.asarray(v, dtype=float) for v in (prev, cur, nxt))
    d_next = nxt - cur
    d_cur = cur - prev
    lhs = beta * (d_next - d_cur) + (1.0 - beta) * d_next
    rhs = -gamma * (sys.K @ cur) + gamma * sys.B * source_value
    return lhs - rhs

# Gain Design Service
# Spectral-radius sweeps, analytic critical-damping DSR gain and settling-time predictors

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from joblib import Parallel, delayed
from numpy.typing import ArrayLike
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.models.graph import PinnedSystem
from src.models.spectral import Spectrum
from src.services.stability import DsrGainRange, StabilityError, assess
from src.utils.logging import log_run, logger

DEFAULT_GAMMA_POINTS = 2048
DEFAULT_BETA_STEP = 1e-4


class SweepError(ValueError):
    """Unusable sweep grid."""
    pass


@dataclass(frozen=True)
class SweepResult:
    """Spectral radius over a gain grid and the gain attaining the minimum."""

    grid: np.ndarray
    radii: np.ndarray
    argmin: float
    min_radius: float
    which: str = "gamma"

    def __post_init__(self):
        self.grid.setflags(write=False)
        self.radii.setflags(write=False)


class DesignPoint(BaseModel):
    """A gain choice with its per-second gain and predicted settling time."""

    model_config = ConfigDict(frozen=True)

    gamma: float = Field(gt=0)
    delta_t: float = Field(gt=0)
    gamma_t: float = Field(gt=0)
    beta: Optional[float] = None
    predicted_ts: float

    @model_validator(mode="after")
    def check_gain_product(self) -> "DesignPoint":
        if abs(self.gamma - self.gamma_t * self.delta_t) > 1e-12:
            raise ValueError(
                f"gamma={self.gamma} differs from gamma_t*delta_t="
                f"{self.gamma_t * self.delta_t}"
            )
        return self


# =============================================================================
# Grids
# =============================================================================
def check_grid(grid: ArrayLike) -> np.ndarray:
    """Validate a sweep grid: non-empty, finite, strictly increasing."""
    arr = np.asarray(grid, dtype=float).ravel()
    if arr.size == 0:
        raise SweepError("empty sweep grid")
    if not np.all(np.isfinite(arr)):
        raise SweepError("sweep grid has non-finite points")
    if np.any(np.diff(arr) <= 0):
        raise SweepError("sweep grid must be strictly increasing")
    return arr


def grid_from_range(lo: float, hi: float, step: float) -> np.ndarray:
    """lo, lo + step, ... up to hi; halving ``step`` keeps every point."""
    if not step > 0:
        raise SweepError(f"grid step must be positive, got {step}")
    if hi < lo:
        raise SweepError(f"grid upper end {hi} below lower end {lo}")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return lo + step * np.arange(count)


def grid_from_spec(text: str) -> np.ndarray:
    """Parse ``LO:HI:STEP``."""
    parts = text.split(":")
    if len(parts) != 3:
        raise SweepError(f"grid must be LO:HI:STEP, got {text!r}")
    try:
        lo, hi, step = (float(p) for p in parts)
    except ValueError:
        raise SweepError(f"grid must hold three numbers, got {text!r}")
    return grid_from_range(lo, hi, step)


def default_gamma_grid(upper: float, points: int = DEFAULT_GAMMA_POINTS) -> np.ndarray:
    """``points`` uniform interior points of (0, upper)."""
    return np.linspace(0.0, upper, points + 2)[1:-1]


def default_beta_grid(beta_range: DsrGainRange, step: float = DEFAULT_BETA_STEP) -> np.ndarray:
    """Step ``step`` on (beta_lower + step, beta_upper - step)."""
    return grid_from_range(beta_range.beta_lower + step, beta_range.beta_upper - step, step)


# =============================================================================
# Sweeps
# =============================================================================
def _sweep(radius_at, grid: np.ndarray, n_jobs: int) -> Tuple[np.ndarray, int]:
    radii = Parallel(n_jobs=n_jobs, prefer="threads")(
        delayed(radius_at)(float(g)) for g in grid
    )
    radii = np.asarray(radii, dtype=float)
    # first minimum: ties go to the smaller gain
    return radii, int(np.argmin(radii))


def sweep_gamma(sys: PinnedSystem, grid: ArrayLike, n_jobs: int = 1) -> SweepResult:
    """
    Spectral radius of P = I - gamma K over a gamma grid.

    Args:
        sys: Pinned system
        grid: Strictly increasing gains, normally inside (0, gamma_bar]
        n_jobs: joblib thread workers

    Returns:
        SweepResult with the smallest-radius gain
    """
    grid = check_grid(grid)
    radii, k = _sweep(lambda g: assess(sys, g).spectral_radius, grid, n_jobs)
    result = SweepResult(grid=grid, radii=radii, argmin=float(grid[k]),
                         min_radius=float(radii[k]), which="gamma")
    log_run(logger, "sweep-gamma", {"points": grid.size, "argmin": result.argmin,
                                    "min_radius": result.min_radius})
    return result


def sweep_beta(sys: PinnedSystem, gamma: float, grid: ArrayLike, n_jobs: int = 1) -> SweepResult:
    """Spectral radius of the DSR map over a beta grid at fixed gamma."""
    grid = check_grid(grid)
    radii, k = _sweep(lambda b: assess(sys, gamma, b).spectral_radius, grid, n_jobs)
    result = SweepResult(grid=grid, radii=radii, argmin=float(grid[k]),
                         min_radius=float(radii[k]), which="beta")
    log_run(logger, "sweep-beta", {"gamma": gamma, "points": grid.size,
                                   "argmin": result.argmin, "min_radius": result.min_radius})
    return result


def gamma_minimax(spectrum: Spectrum) -> float:
    """
    Gain minimising max |1 - gamma lambda| over a real positive spectrum:
    2 / (lambda_min + lambda_max).
    """
    if not spectrum.is_real:
        raise StabilityError("minimax gain needs a real spectrum")
    re = spectrum.values.real
    if np.any(re <= 0):
        raise StabilityError("minimax gain needs a positive spectrum")
    return float(2.0 / (re.min() + re.max()))


# =============================================================================
# Analytic design
# =============================================================================
def beta_critical(lambda_K: float, gamma: float) -> float:
    """
    DSR gain giving critical damping of the mode lambda_K:
    a - sqrt(a^2 - 1) with a = 1 + 2 gamma lambda_K.
    """
    if not (lambda_K > 0 and gamma > 0):
        raise ValueError("beta_critical needs lambda_K > 0 and gamma > 0")
    a = 1.0 + 2.0 * gamma * lambda_K
    # 1 / (a + sqrt(a^2 - 1)) equals a - sqrt(a^2 - 1) without cancellation
    return 1.0 / (a + math.sqrt(a * a - 1.0))


def beta_critical_from_ts(delta_t: float, ts_no_dsr: float) -> float:
    """Critical DSR gain written with the no-DSR settling estimate."""
    a = 1.0 + 8.0 * delta_t / ts_no_dsr
    return 1.0 / (a + math.sqrt(a * a - 1.0))


def predict_ts_no_dsr(lambda_K1: float, gamma_t: float) -> float:
    """Settling estimate 4 / (gamma_t lambda_K1) without DSR."""
    return 4.0 / (gamma_t * lambda_K1)


def predict_ts_dsr(beta_star: float, delta_t: float, gamma_t: float, lambda_K1: float) -> float:
    """Settling estimate 6 sqrt(beta delta_t / (gamma_t lambda_K1)) with DSR."""
    return 6.0 * math.sqrt(beta_star * delta_t / (gamma_t * lambda_K1))


def damping_of(
    lambda_K: float, gamma_t: float, delta_t: float, beta: float
) -> Tuple[float, float]:
    """
    Natural frequency and damping ratio of one mode under DSR:
    omega = sqrt(gamma_t lambda / (beta delta_t)), 2 zeta omega = (1 - beta) / (beta delta_t).
    """
    omega = math.sqrt(gamma_t * lambda_K / (beta * delta_t))
    zeta = (1.0 - beta) / (beta * delta_t) / (2.0 * omega)
    return omega, zeta


def speedup(ts_no_dsr: float, ts_dsr: float) -> float:
    """How many times faster the DSR network settles."""
    return ts_no_dsr / ts_dsr


def equivalent_update_time(ts_no_dsr: float, ts_dsr: float, delta_t: float) -> float:
    """Update time a network without DSR would need to settle as fast as with DSR."""
    return delta_t * ts_dsr / ts_no_dsr


def design_point(
    spectrum: Spectrum, delta_t: float, gamma: float, beta: Optional[float] = None
) -> DesignPoint:
    """
    Assemble a DesignPoint from the slowest mode of K.

    Without ``beta`` the critical-damping gain of the slowest mode is used;
    ``beta = 0`` means no DSR.
    """
    lambda_1 = float(spectrum.values.real.min())
    gamma_t = gamma / delta_t
    if beta is None:
        beta = beta_critical(lambda_1, gamma)
    if beta == 0:
        ts = predict_ts_no_dsr(lambda_1, gamma_t)
    else:
        ts = predict_ts_dsr(beta, delta_t, gamma_t, lambda_1)
    return DesignPoint(gamma=gamma, delta_t=delta_t, gamma_t=gamma_t, beta=beta, predicted_ts=ts)

# simulate command
# Runs one of the four engines and writes the trajectory CSV with a settling summary

import math
from typing import Optional, Tuple

from src.cli.commands.common import Scenario, load_scenario, resolve_beta, resolve_gamma
from src.cli.schemas import RunConfig, SimulationSummary
from src.core.config import Settings
from src.models.spectral import eigenvalues, spectral_radius
from src.services.design import predict_ts_dsr, predict_ts_no_dsr
from src.services.simulation import (
    SimulationError,
    StepInput,
    Trajectory,
    default_steps,
    settling_time,
    simulate_continuous,
    simulate_dsr,
    simulate_first_order,
    simulate_second_order,
)
from src.services.stability import StabilityError, assess, second_order_perron
from src.utils.export import write_trajectory_csv
from src.utils.logging import logger

MODES = ("first-order", "dsr", "second-order", "continuous")


def _predicted_ts(scenario: Scenario, gamma_t: float, delta_t: float, beta: Optional[float]) -> float:
    lam = scenario.lambda_1
    if beta is not None and 0 < beta < 1:
        return predict_ts_dsr(beta, delta_t, gamma_t, lam)
    return predict_ts_no_dsr(lam, gamma_t)


def run_mode(
    config: RunConfig,
    settings: Settings,
    scenario: Scenario,
    mode: str,
    force: bool = False,
) -> Tuple[Trajectory, float, Optional[float], Optional[float]]:
    """
    Simulate ``mode`` on a loaded scenario.

    Returns:
        (trajectory, gamma, beta, spectral radius of the one-step map)

    Raises:
        StabilityError: If the configuration is unstable and ``force`` is off
    """
    if mode not in MODES:
        raise SimulationError(f"unknown mode {mode!r}; expected one of {', '.join(MODES)}")
    if config.horizon is not None and config.horizon <= 0:
        raise SimulationError("simulate needs --horizon > 0")
    numerics = settings.numerics
    sys = scenario.sys
    dt = config.delta_t
    gamma = resolve_gamma(config, scenario, settings)
    gamma_t = gamma / dt
    beta = resolve_beta(config, scenario, settings, gamma) if mode in ("dsr", "second-order") else None
    step = StepInput(magnitude=config.step_magnitude)

    radius: Optional[float] = None
    if mode in ("first-order", "dsr"):
        radius = assess(sys, gamma, beta).spectral_radius
    elif mode == "second-order":
        tilde = config.tilde_delta_t if config.tilde_delta_t is not None else dt * dt * beta
        radius = spectral_radius(eigenvalues(second_order_perron(sys, gamma_t, beta, dt, tilde)))
    if radius is not None and radius >= 1.0:
        message = f"{mode} configuration is not stable (spectral radius {radius:.10g})"
        if not force:
            raise StabilityError(message + "; pass --force to simulate anyway")
        logger.warning(message)

    if config.horizon is not None:
        horizon = config.horizon
    else:
        predicted = _predicted_ts(scenario, gamma_t, dt, beta)
        horizon = default_steps(predicted, dt, numerics.horizon_multiple, numerics.min_steps) * dt
    threshold = numerics.divergence_threshold

    if mode == "first-order":
        traj = simulate_first_order(sys, gamma, step, max(1, math.ceil(horizon / dt)),
                                    threshold=threshold, delta_t=dt)
    elif mode == "dsr":
        traj = simulate_dsr(sys, gamma, beta, step, max(1, math.ceil(horizon / dt)),
                            threshold=threshold, delta_t=dt)
    elif mode == "second-order":
        traj = simulate_second_order(sys, gamma_t, beta, dt, tilde, step,
                                     max(1, math.ceil(horizon / tilde)), threshold=threshold)
    else:
        h = dt / settings.scenario.integrator_divisor
        traj = simulate_continuous(sys, gamma_t, step, horizon, h)
    return traj, gamma, beta, radius


def cmd_simulate(
    config: RunConfig, settings: Settings, mode: str, force: bool = False
) -> SimulationSummary:
    """Simulate, write ``trajectory_<mode>.csv`` and measure the settling time."""
    scenario = load_scenario(config, settings)
    traj, gamma, beta, radius = run_mode(config, settings, scenario, mode, force)
    numerics = settings.numerics
    report = settling_time(traj, config.step_magnitude, numerics.settling_band,
                           reference=numerics.settling_reference)
    path = write_trajectory_csv(traj, config.output_dir / f"trajectory_{mode}.csv")
    return SimulationSummary(
        mode=mode,
        gamma=gamma,
        beta=beta,
        delta_t=traj.delta_t,
        steps=traj.steps,
        spectral_radius=radius,
        divergent=traj.divergent,
        converged=report.converged,
        settling_time=report.Ts,
        csv=str(path),
    )

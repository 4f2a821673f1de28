# formation command
# Heading simulations with and without DSR, propagated into planar formations

import math

import numpy as np

from src.cli.commands.common import load_scenario, resolve_beta, resolve_gamma
from src.cli.schemas import FormationSummary, RunConfig
from src.core.config import Settings
from src.services.design import predict_ts_no_dsr
from src.services.formation import distortion, init_circle, propagate
from src.services.simulation import (
    StepInput,
    Trajectory,
    default_steps,
    settling_time,
    simulate_dsr,
    simulate_first_order,
)
from src.utils.export import write_formation_csv
from src.utils.logging import log_run, logger


def cmd_formation(config: RunConfig, settings: Settings) -> FormationSummary:
    """
    Propagate formations from no-DSR and DSR heading responses.

    The run length is ``--horizon`` when given, otherwise the measured no-DSR
    settling time. Writes ``formation_no_dsr.csv`` and ``formation_dsr.csv``.
    """
    scenario = load_scenario(config, settings)
    sys = scenario.sys
    numerics = settings.numerics
    dt = config.delta_t
    gamma = resolve_gamma(config, scenario, settings)
    beta = resolve_beta(config, scenario, settings, gamma)
    step = StepInput(magnitude=config.step_magnitude)

    horizon = config.horizon
    if horizon is None:
        predicted = predict_ts_no_dsr(scenario.lambda_1, gamma / dt)
        steps = default_steps(predicted, dt, numerics.horizon_multiple, numerics.min_steps)
        plain = simulate_first_order(sys, gamma, step, steps, delta_t=dt)
        horizon = settling_time(plain, step.magnitude, numerics.settling_band,
                                reference=numerics.settling_reference).Ts
        if math.isnan(horizon):
            horizon = steps * dt
            logger.warning("no-DSR response did not settle; using the full run as horizon")
    steps = int(round(horizon / dt))

    if steps == 0:
        rest = Trajectory(delta_t=dt, states=np.zeros((1, sys.n)), source=np.zeros(1),
                          kind="first-order")
        headings = {"no_dsr": rest, "dsr": rest}
    else:
        headings = {
            "no_dsr": simulate_first_order(sys, gamma, step, steps, delta_t=dt),
            "dsr": simulate_dsr(sys, gamma, beta, step, steps, delta_t=dt),
        }

    circle = init_circle(sys.n, settings.scenario.formation_radius)
    traces = {name: propagate(traj, circle, scenario.leader) for name, traj in headings.items()}
    paths = [
        str(write_formation_csv(trace, config.output_dir / f"formation_{name}.csv"))
        for name, trace in traces.items()
    ]
    summary = FormationSummary(
        horizon=steps * dt,
        steps=steps,
        leader=scenario.leader,
        distortion_no_dsr=distortion(traces["no_dsr"], steps),
        distortion_dsr=distortion(traces["dsr"], steps),
        csv=paths,
    )
    log_run(logger, "formation", {"steps": steps, "distortion_no_dsr": summary.distortion_no_dsr,
                                  "distortion_dsr": summary.distortion_dsr})
    return summary

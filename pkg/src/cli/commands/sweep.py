# sweep command
# Spectral radius over a gamma or beta grid, written to sweep.csv

from typing import Optional

from src.cli.commands.common import load_scenario, resolve_gamma
from src.cli.schemas import RunConfig, SweepSummary
from src.core.config import Settings
from src.services.design import (
    SweepResult,
    default_beta_grid,
    default_gamma_grid,
    grid_from_spec,
    sweep_beta,
    sweep_gamma,
)
from src.services.stability import DsrGainRange, dsr_beta_range_real, gamma_bound_general
from src.utils.export import write_sweep_csv


def cmd_sweep(
    config: RunConfig, settings: Settings, which: str, grid_spec: Optional[str] = None
) -> SweepSummary:
    """
    Sweep gamma, or beta at the resolved gamma, and write ``sweep.csv``.

    Without ``grid_spec`` gamma uses uniform interior points of (0, gamma_bar)
    and beta a fine step over the stable range (|beta| < 1 for complex spectra).
    """
    scenario = load_scenario(config, settings)
    sweep = settings.sweep
    gamma: Optional[float] = None
    if which == "gamma":
        if grid_spec:
            grid = grid_from_spec(grid_spec)
        else:
            grid = default_gamma_grid(gamma_bound_general(scenario.spectrum).upper,
                                      sweep.gamma_points)
        result: SweepResult = sweep_gamma(scenario.sys, grid, n_jobs=sweep.n_jobs)
    elif which == "beta":
        gamma = resolve_gamma(config, scenario, settings)
        if grid_spec:
            grid = grid_from_spec(grid_spec)
        else:
            if scenario.spectrum.is_real:
                beta_range = dsr_beta_range_real(scenario.spectrum, gamma)
            else:
                beta_range = DsrGainRange(beta_lower=-1.0, beta_upper=1.0)
            grid = default_beta_grid(beta_range, sweep.beta_step)
        result = sweep_beta(scenario.sys, gamma, grid, n_jobs=sweep.n_jobs)
    else:
        raise ValueError(f"unknown sweep {which!r}; expected gamma or beta")

    path = write_sweep_csv(result, config.output_dir / "sweep.csv")
    return SweepSummary(
        which=which,
        points=int(result.grid.size),
        argmin=result.argmin,
        min_radius=result.min_radius,
        gamma=gamma,
        csv=str(path),
    )

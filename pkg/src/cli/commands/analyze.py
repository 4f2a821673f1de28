# analyze command
# Gain bounds, DSR range and spectral radii for one graph

import numpy as np

from src.cli.commands.common import load_scenario, resolve_beta, resolve_gamma
from src.cli.schemas import AnalysisReport, RunConfig
from src.core.config import Settings
from src.services.design import beta_critical
from src.services.stability import (
    StabilityError,
    assess,
    dsr_beta_range_real,
    dsr_jury_stable,
    gamma_bound_general,
    gamma_bound_real,
)
from src.utils.logging import log_run, logger


def cmd_analyze(config: RunConfig, settings: Settings) -> AnalysisReport:
    """
    Stability report for a graph.

    Args:
        config: Run options; gamma and beta default as for simulate
        settings: Application settings

    Returns:
        AnalysisReport with eigenvalue extremes, both gamma bounds when the
        spectrum is real, the DSR beta range and spectral radii at the gains
    """
    scenario = load_scenario(config, settings)
    spectrum = scenario.spectrum
    real = spectrum.is_real
    magnitudes = np.sort(spectrum.magnitudes)
    general = gamma_bound_general(spectrum)
    doc = {
        "agents": scenario.sys.n,
        "lambda_min": float(magnitudes[0]),
        "lambda_max": float(magnitudes[-1]),
        "real_spectrum": real,
        "gamma_bar_general": general.upper,
    }
    if real:
        doc["gamma_bar_real"] = gamma_bound_real(spectrum).upper

    gamma = resolve_gamma(config, scenario, settings)
    first = assess(scenario.sys, gamma, marginal_band=settings.numerics.marginal_band)
    doc.update(gamma=gamma, radius_first_order=first.spectral_radius,
               stable_first_order=first.stable)

    if real:
        try:
            beta_range = dsr_beta_range_real(spectrum, gamma)
            doc["beta_range"] = (beta_range.beta_lower, beta_range.beta_upper)
        except StabilityError as e:
            logger.warning(f"no DSR range: {e}")
    if gamma > 0 and scenario.lambda_1 > 0:
        doc["beta_critical"] = beta_critical(scenario.lambda_1, gamma)

    if config.beta is not None or scenario.builtin:
        beta = resolve_beta(config, scenario, settings, gamma)
        dsr = assess(scenario.sys, gamma, beta, marginal_band=settings.numerics.marginal_band)
        doc.update(beta=beta, radius_dsr=dsr.spectral_radius, stable_dsr=dsr.stable,
                   jury_dsr=dsr_jury_stable(spectrum, gamma, beta))

    report = AnalysisReport(**doc)
    log_run(logger, "analyze", {"gamma": gamma, "radius": first.spectral_radius})
    return report

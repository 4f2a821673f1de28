# Shared command plumbing: scenario loading and gain defaults

from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.cli.schemas import RunConfig
from src.core.config import Settings
from src.models.graph import GraphSpec, PinnedSystem, load_graph, pinned_system, ring_with_leader
from src.models.spectral import Spectrum, eigenvalues
from src.services.design import beta_critical, default_gamma_grid, sweep_gamma
from src.services.stability import gamma_bound_general
from src.utils.logging import logger


@dataclass(frozen=True)
class Scenario:
    spec: GraphSpec
    sys: PinnedSystem
    spectrum: Spectrum
    builtin: bool

    @property
    def lambda_1(self) -> float:
        """Smallest real part over the spectrum of K (the slowest mode)."""
        return float(self.spectrum.values.real.min())

    @property
    def leader(self) -> Optional[int]:
        pinned = np.flatnonzero(self.sys.B > 0)
        return int(self.sys.nodes[pinned[0]]) if pinned.size else None


def load_scenario(config: RunConfig, settings: Settings) -> Scenario:
    """The graph file, or the built-in ring when no file is given."""
    numerics = settings.numerics
    if config.builtin:
        spec = ring_with_leader(settings.scenario.agents, settings.scenario.leader)
    else:
        spec = load_graph(config.graph_path)
    sys = pinned_system(spec, pivot_tol=numerics.pivot_tol, ones_tol=numerics.ones_tol)
    spectrum = eigenvalues(sys.K, numerics.symmetry_tol, numerics.real_tol)
    logger.info(
        f"loaded {'built-in ring' if config.builtin else config.graph_path}: "
        f"{sys.n} agents, source {spec.source}"
    )
    return Scenario(spec=spec, sys=sys, spectrum=spectrum, builtin=config.builtin)


def resolve_gamma(config: RunConfig, scenario: Scenario, settings: Settings) -> float:
    """--gamma, else the ring default, else the gamma sweep argmin."""
    if config.gamma is not None:
        return config.gamma
    if scenario.builtin:
        return settings.scenario.gamma
    bound = gamma_bound_general(scenario.spectrum)
    grid = default_gamma_grid(bound.upper, settings.sweep.gamma_points)
    gamma = sweep_gamma(scenario.sys, grid, n_jobs=settings.sweep.n_jobs).argmin
    logger.info(f"no --gamma given; using sweep argmin {gamma:.10g}")
    return gamma


def resolve_beta(
    config: RunConfig, scenario: Scenario, settings: Settings, gamma: float
) -> float:
    """--beta, else the ring default, else the critical-damping gain of the slowest mode."""
    if config.beta is not None:
        return config.beta
    if scenario.builtin:
        return settings.scenario.beta
    beta = beta_critical(scenario.lambda_1, gamma)
    logger.info(f"no --beta given; using critical-damping gain {beta:.10g}")
    return beta

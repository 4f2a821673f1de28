# Reproduction Service
# Recomputes every quantity of the ring-network study and checks it against
# the expected values in the settings file

import math
from dataclasses import dataclass
from typing import Dict, List, Optional

import numpy as np

from src.core.config import ExpectedValue, Settings, get_settings
from src.models.graph import ordered_subgraphs_fixture, pinned_system, ring_with_leader
from src.models.spectral import eigenvalues, spectral_radius
from src.services.design import (
    beta_critical,
    default_beta_grid,
    grid_from_range,
    predict_ts_dsr,
    predict_ts_no_dsr,
    sweep_beta,
    sweep_gamma,
)
from src.services.formation import distortion, init_circle, propagate, step_lengths
from src.services.simulation import (
    StepInput,
    default_steps,
    settling_time,
    simulate_continuous,
    simulate_dsr,
    simulate_first_order,
    simulate_second_order,
)
from src.services.stability import (
    assess,
    dsr_beta_range_real,
    gamma_bound_real,
    second_order_perron,
)
from src.utils.logging import LoggerMixin

FIXTURE_SPECTRUM = [1.0, 1.0, 1.0, 1.0, 3.0, 4.0]


@dataclass(frozen=True)
class ReproductionRow:
    key: str
    label: str
    expected: float
    actual: float
    tolerance: float
    comparison: str
    passed: bool

    def format(self) -> str:
        if self.comparison == "at_least":
            tol = ">= exp"
        elif self.comparison == "above":
            tol = "> exp"
        else:
            tol = f"{self.tolerance:.1e}"
        verdict = "PASS" if self.passed else "FAIL"
        return (
            f"{self.label:<42} {self.expected:>12.6g} {self.actual:>14.8g} "
            f"{tol:>10} {verdict}"
        )


def check(value: ExpectedValue, actual: float) -> bool:
    """Apply a row's comparison; NaN never passes."""
    if actual is None or math.isnan(actual):
        return False
    if value.comparison == "at_least":
        return actual >= value.expected
    if value.comparison == "above":
        return actual > value.expected
    return abs(actual - value.expected) <= value.tolerance


def format_table(rows: List[ReproductionRow]) -> str:
    header = f"{'quantity':<42} {'expected':>12} {'actual':>14} {'tolerance':>10} verdict"
    lines = [header, "-" * len(header)]
    lines += [row.format() for row in rows]
    failed = sum(not r.passed for r in rows)
    lines.append("-" * len(header))
    lines.append(f"{len(rows) - failed}/{len(rows)} rows PASS")
    return "\n".join(lines) + "\n"


class ReproductionHarness(LoggerMixin):
    """
    Builds the ring-with-leader network and recomputes eigenvalue extremes,
    gain bounds, sweep optima, settling times, second-order radii, the
    ordered-subgraphs fixture spectrum and the formation comparison.

    Attributes:
        settings: Scenario, sweep and tolerance settings
        gamma: Update gain used for the simulations (settings value unless overridden)
        beta: DSR gain used for the simulations
    """

    def __init__(
        self,
        settings: Optional[Settings] = None,
        gamma: Optional[float] = None,
        beta: Optional[float] = None,
    ):
        self.settings = settings or get_settings()
        scenario = self.settings.scenario
        self.gamma = scenario.gamma if gamma is None else gamma
        self.beta = scenario.beta if beta is None else beta
        self.delta_t = scenario.delta_t
        self.actual: Dict[str, float] = {}

    def _record(self, key: str, value: float) -> None:
        self.actual[key] = float(value)
        self.logger.info(f"{key} = {value:.10g}")

    def compute(self) -> Dict[str, float]:
        """Compute every reproduction quantity keyed like the settings file."""
        s = self.settings
        scenario, numerics = s.scenario, s.numerics
        n_jobs = s.sweep.n_jobs
        dt, gamma, beta = self.delta_t, self.gamma, self.beta
        gamma_t = gamma / dt
        step = StepInput(magnitude=scenario.step_magnitude)

        def settle(traj) -> float:
            return settling_time(traj, step.magnitude, numerics.settling_band,
                                 reference=numerics.settling_reference).Ts

        sys = pinned_system(ring_with_leader(scenario.agents, scenario.leader))
        spectrum = eigenvalues(sys.K)
        lam = np.sort(spectrum.values.real)
        lam_1, lam_n = float(lam[0]), float(lam[-1])
        self._record("lambda_min", lam_1)
        self._record("lambda_max", lam_n)

        bound = gamma_bound_real(spectrum)
        self._record("gamma_bar", bound.upper)
        self._record("radius_at_gamma_bar", assess(sys, bound.upper).spectral_radius)

        fine = s.sweep.fine_gamma_step
        sweep = sweep_gamma(sys, grid_from_range(fine, bound.upper, fine), n_jobs=n_jobs)
        self._record("gamma_argmin", sweep.argmin)

        # first-order and continuous responses
        ts_predicted = predict_ts_no_dsr(lam_1, gamma_t)
        steps = default_steps(ts_predicted, dt, numerics.horizon_multiple, numerics.min_steps)
        first = simulate_first_order(sys, gamma, step, steps, delta_t=dt)
        ts_first = settle(first)
        self._record("ts_first_order", ts_first)
        h = dt / scenario.integrator_divisor
        cont = simulate_continuous(sys, gamma_t, step, steps * dt, h)
        self._record("ts_continuous", settle(cont))
        self._record("ts_predicted", ts_predicted)

        # DSR gain range and design
        beta_range = dsr_beta_range_real(spectrum, gamma)
        self._record("beta_lower", beta_range.beta_lower)
        self._record("radius_at_beta_lower", assess(sys, gamma, beta_range.beta_lower).spectral_radius)
        self._record("radius_at_beta_upper", assess(sys, gamma, beta_range.beta_upper).spectral_radius)
        beta_sweep = sweep_beta(sys, gamma, default_beta_grid(beta_range, s.sweep.beta_step),
                                n_jobs=n_jobs)
        self._record("beta_argmin", beta_sweep.argmin)
        self._record("beta_critical", beta_critical(lam_1, gamma))
        ts_dsr_predicted = predict_ts_dsr(beta, dt, gamma_t, lam_1)
        self._record("ts_dsr_predicted", ts_dsr_predicted)

        dsr_steps = default_steps(ts_dsr_predicted, dt, numerics.horizon_multiple, numerics.min_steps)
        dsr = simulate_dsr(sys, gamma, beta, step, dsr_steps, delta_t=dt)
        ts_dsr = settle(dsr)
        self._record("ts_dsr", ts_dsr)
        self._record("speedup", ts_first / ts_dsr if ts_dsr > 0 else float("nan"))

        # second-order comparison
        so = s.second_order
        for key, tilde in (
            ("radius_second_order_coarse", so.tilde_delta_t_coarse),
            ("radius_second_order_matched", so.tilde_delta_t_matched),
            ("radius_second_order_large", so.tilde_delta_t_large),
        ):
            matrix = second_order_perron(sys, gamma_t, beta, dt, tilde)
            self._record(key, spectral_radius(eigenvalues(matrix)))
        tilde = so.tilde_delta_t_matched
        second = simulate_second_order(
            sys, gamma_t, beta, dt, tilde, step, int(math.ceil(so.horizon / tilde))
        )
        self._record("ts_second_order", settle(second))

        fixture = pinned_system(ordered_subgraphs_fixture())
        fixture_values = np.sort(eigenvalues(fixture.K).values.real)
        self._record("fixture_spectrum", np.max(np.abs(fixture_values - FIXTURE_SPECTRUM)))

        # formation comparison at the no-DSR settling horizon
        horizon_steps = int(round(scenario.formation_horizon / dt))
        circle = init_circle(sys.n, scenario.formation_radius)
        leader = scenario.leader
        plain = propagate(simulate_first_order(sys, gamma, step, horizon_steps, delta_t=dt),
                          circle, leader)
        boosted = propagate(simulate_dsr(sys, gamma, beta, step, horizon_steps, delta_t=dt),
                            circle, leader)
        unit = max(np.max(np.abs(step_lengths(t) - dt)) for t in (plain, boosted))
        self._record("unit_speed", unit)
        self._record(
            "distortion_gap",
            distortion(plain, plain.steps) - distortion(boosted, boosted.steps),
        )
        return dict(self.actual)

    def run(self) -> List[ReproductionRow]:
        """Compute and judge every row configured under ``reproduction``."""
        actual = self.compute()
        rows = []
        for key, value in self.settings.reproduction.items():
            got = actual.get(key, float("nan"))
            rows.append(ReproductionRow(
                key=key,
                label=value.label or key,
                expected=value.expected,
                actual=got,
                tolerance=value.tolerance,
                comparison=value.comparison,
                passed=check(value, got),
            ))
        failed = [r.key for r in rows if not r.passed]
        if failed:
            self.logger.warning(f"reproduction rows failed: {failed}")
        return rows

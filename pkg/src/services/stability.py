# Stability Service
# Perron and DSR-Perron matrices, update-gain and DSR-gain bounds, verdicts

from typing import Literal, Optional, Tuple

import numpy as np
from numpy.typing import ArrayLike
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.models.graph import PinnedSystem
from src.models.spectral import (
    REAL_TOL,
    Spectrum,
    eigenvalues,
    is_real_spectrum,
    spectral_radius,
)
from src.utils.logging import logger

MARGINAL_BAND = 1e-9


class StabilityError(Exception):
    """A stability bound is requested outside its hypotheses."""
    pass


class GainBound(BaseModel):
    """Open interval (lower, upper) of stable update gains."""

    model_config = ConfigDict(frozen=True)

    lower: float = 0.0
    upper: float
    kind: Literal["general-complex", "real-spectrum"]
    binding_index: int = Field(ge=0, description="Index into Spectrum.values")

    @model_validator(mode="after")
    def check_interval(self) -> "GainBound":
        if not (self.lower < self.upper < np.inf):
            raise ValueError(f"empty or unbounded gain interval ({self.lower}, {self.upper})")
        return self


class DsrGainRange(BaseModel):
    """Open interval (beta_lower, beta_upper) of stable DSR gains."""

    model_config = ConfigDict(frozen=True)

    beta_lower: float
    beta_upper: float = 1.0

    def contains(self, beta: float) -> bool:
        return self.beta_lower < beta < self.beta_upper


class StabilityReport(BaseModel):
    """Spectral radius of the one-step map and the strict verdict radius < 1."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    gamma: float
    beta: Optional[float] = None
    spectral_radius: float
    stable: bool
    marginal: bool = False
    necessary_condition: bool = True
    eigenvalues: Spectrum


def perron(sys: PinnedSystem, gamma: float) -> np.ndarray:
    """P = I - gamma K."""
    return np.eye(sys.n) - gamma * sys.K


def perron_eigenvalues_from_shift(spectrum: Spectrum, gamma: float) -> np.ndarray:
    """Eigenvalues of P from those of K: 1 - gamma lambda_K."""
    return 1.0 - gamma * spectrum.values


def ordered_perron_real(spectrum: Spectrum, gamma: float) -> bool:
    """
    For a real spectrum of K and 0 < gamma < 2/lambda_max, the eigenvalues of
    P are ordered -1 < 1 - gamma lambda_n <= ... <= 1 - gamma lambda_1 < 1.
    """
    if not spectrum.is_real:
        return False
    shifted = np.sort(perron_eigenvalues_from_shift(spectrum, gamma).real)
    return bool(shifted[0] > -1.0 and shifted[-1] < 1.0)


def gamma_bound_general(spectrum: Spectrum) -> GainBound:
    """
    Largest stable update gain for a possibly complex spectrum of K:
    min over i of 2 cos(phi_i) / m_i.

    Raises:
        StabilityError: If some eigenvalue has a non-positive real part
    """
    re = spectrum.values.real
    if np.any(re <= 0):
        bad = int(np.flatnonzero(re <= 0)[0])
        raise StabilityError(
            f"source-connectivity assumption violated: eigenvalue {spectrum.values[bad]:.6g} of K has "
            f"non-positive real part; some agent is not reachable from the source"
        )
    candidates = 2.0 * np.cos(spectrum.phases) / spectrum.magnitudes
    k = int(np.argmin(candidates))
    return GainBound(upper=float(candidates[k]), kind="general-complex", binding_index=k)


def gamma_bound_real(spectrum: Spectrum, tol: float = REAL_TOL) -> GainBound:
    """
    Largest stable update gain for a real positive spectrum: 2 / lambda_max.

    Raises:
        StabilityError: If the spectrum is not real or not positive
    """
    if not is_real_spectrum(spectrum, tol):
        raise StabilityError(
            "spectrum of K is not real; use gamma_bound_general for complex spectra"
        )
    re = spectrum.values.real
    if np.any(re <= 0):
        raise StabilityError("source-connectivity assumption violated: K has a non-positive eigenvalue")
    k = int(np.argmax(re))
    return GainBound(upper=float(2.0 / re[k]), kind="real-spectrum", binding_index=k)


def dsr_perron(sys: PinnedSystem, gamma: float, beta: float) -> np.ndarray:
    """
    One-step map of the DSR recursion over the stacked state [I(k-1); I(k)]:
    [[0, I], [-beta I, beta I + P]].
    """
    n = sys.n
    eye = np.eye(n)
    return np.block([
        [np.zeros((n, n)), eye],
        [-beta * eye, beta * eye + perron(sys, gamma)],
    ])


def dsr_beta_range_real(spectrum: Spectrum, gamma: float, tol: float = REAL_TOL) -> DsrGainRange:
    """
    Stable DSR gains for a real spectrum: -(1 - gamma lambda_max / 2) < beta < 1.

    Raises:
        StabilityError: If the spectrum is not real positive or gamma is
            outside (0, 2 / lambda_max)
    """
    bound = gamma_bound_real(spectrum, tol)
    if not 0 < gamma < bound.upper:
        raise StabilityError(
            f"gamma={gamma} outside the stable interval (0, {bound.upper:.6g}); "
            f"the DSR range assumes a stable base recursion"
        )
    lam_max = 2.0 / bound.upper
    return DsrGainRange(beta_lower=-(1.0 - 0.5 * gamma * lam_max), beta_upper=1.0)


def dsr_quadratic_roots(lambda_K: float, gamma: float, beta: float) -> Tuple[complex, complex]:
    """
    Roots of z^2 + (gamma lambda_K - beta - 1) z + beta, the two DSR
    eigenvalues attached to a real eigenvalue of K.
    """
    b = gamma * lambda_K - beta - 1.0
    c = beta
    root = complex(np.emath.sqrt(b * b - 4.0 * c))
    sign = 1.0 if b >= 0 else -1.0
    q = -0.5 * (b + sign * root)
    if q == 0:
        return 0j, 0j
    return complex(q), complex(c / q)


def dsr_quartic_coefficients(lambda_K: complex, gamma: float, beta: float) -> np.ndarray:
    """
    Coefficients, highest power first, of the real quartic whose roots are the
    DSR eigenvalues of a conjugate pair a +/- jb of K:
    (z^2 + (gamma a - beta - 1) z + beta)^2 + gamma^2 b^2 z^2.
    """
    a, b = complex(lambda_K).real, complex(lambda_K).imag
    q = np.array([1.0, gamma * a - beta - 1.0, beta])
    return np.polymul(q, q) + np.array([0.0, 0.0, (gamma * b) ** 2, 0.0, 0.0])


def jury_necessary(beta: float) -> bool:
    """|beta| < 1, necessary for any stable DSR configuration."""
    return abs(beta) < 1.0


def jury_real_conditions(lambda_K: float, gamma: float, beta: float) -> Tuple[bool, bool, bool]:
    """
    The Jury conditions for z^2 + (gamma lambda_K - beta - 1) z + beta:
    |p(0)| < 1, p(1) > 0, p(-1) > 0.
    """
    b = gamma * lambda_K - beta - 1.0
    return (
        abs(beta) < 1.0,
        1.0 + b + beta > 0.0,
        1.0 - b + beta > 0.0,
    )


def jury_stable(coefficients: ArrayLike) -> bool:
    """
    Schur-Cohn step-down test: True iff every root of the real polynomial
    (coefficients highest power first) lies strictly inside the unit circle.
    """
    c = np.trim_zeros(np.asarray(coefficients, dtype=float), "f")
    if c.size == 0:
        raise ValueError("zero polynomial")
    while c.size > 1:
        k = c[-1] / c[0]
        if abs(k) >= 1.0:
            return False
        c = (c[:-1] - k * c[::-1][:-1]) / (1.0 - k * k)
    return True


def dsr_jury_stable(spectrum: Spectrum, gamma: float, beta: float) -> bool:
    """Jury verdict for the DSR map, one quadratic or quartic per eigenvalue of K."""
    for lam in spectrum.values:
        if lam.imag == 0:
            coeffs = [1.0, gamma * lam.real - beta - 1.0, beta]
        elif lam.imag > 0:
            coeffs = dsr_quartic_coefficients(lam, gamma, beta)
        else:
            continue
        if not jury_stable(coeffs):
            return False
    return True


def second_order_perron(
    sys: PinnedSystem,
    gamma_t: float,
    beta: float,
    delta_t: float,
    tilde_delta_t: float,
) -> np.ndarray:
    """
    One-step map over [I; dI/dt] of the second-order system updated every
    ``tilde_delta_t`` seconds:
    [[I, dt~ I], [-(gamma_t dt~ / (beta dt)) K, (1 - (1 - beta) dt~ / (beta dt)) I]].
    """
    n = sys.n
    eye = np.eye(n)
    ratio = tilde_delta_t / (beta * delta_t)
    return np.block([
        [eye, tilde_delta_t * eye],
        [-gamma_t * ratio * sys.K, (1.0 - (1.0 - beta) * ratio) * eye],
    ])


def second_order_input(
    sys: PinnedSystem,
    gamma_t: float,
    beta: float,
    delta_t: float,
    tilde_delta_t: float,
) -> np.ndarray:
    """Input column dt~ * (gamma_t / (beta dt)) [0; B] of the second-order system."""
    return tilde_delta_t * gamma_t / (beta * delta_t) * np.concatenate([np.zeros(sys.n), sys.B])


def assess(
    sys: PinnedSystem,
    gamma: float,
    beta: Optional[float] = None,
    marginal_band: float = MARGINAL_BAND,
) -> StabilityReport:
    """
    Build P (no beta, or beta = 0) or the DSR map and report its spectral radius.

    Args:
        sys: Pinned system
        gamma: Update gain
        beta: DSR gain; None or 0 switches DSR off
        marginal_band: Half-width of the band around 1 flagged as marginal

    Returns:
        StabilityReport with the strict verdict radius < 1
    """
    if beta is None or beta == 0:
        matrix = perron(sys, gamma)
    else:
        matrix = dsr_perron(sys, gamma, beta)
    spectrum = eigenvalues(matrix)
    radius = spectral_radius(spectrum)
    report = StabilityReport(
        gamma=gamma,
        beta=beta,
        spectral_radius=radius,
        stable=radius < 1.0,
        marginal=abs(radius - 1.0) <= marginal_band,
        necessary_condition=jury_necessary(beta or 0.0),
        eigenvalues=spectrum,
    )
    logger.debug(
        f"assess gamma={gamma} beta={beta}: radius={radius:.10g} stable={report.stable}"
    )
    return report


"""
Eigenvalue computation and spectral bookkeeping for real square matrices.

Symmetric input goes through LAPACK's symmetric solver (real output); general
input through the nonsymmetric driver, which balances, reduces to Hessenberg
form and runs shifted QR.
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np
from numpy.typing import ArrayLike
from scipy.linalg import LinAlgError, eigvals, eigvalsh

SYMMETRY_TOL = 1e-12
REAL_TOL = 1e-9


class EigenSolverError(Exception):
    """Eigenvalue computation failed or was given unusable input."""

    def __init__(self, message: str, diagnostics: dict = None):
        self.diagnostics = diagnostics or {}
        detail = ", ".join(f"{k}={v}" for k, v in self.diagnostics.items())
        super().__init__(f"{message} [{detail}]" if detail else message)


@dataclass(frozen=True)
class Spectrum:
    """
    Eigenvalues with magnitudes, phases in (-pi, pi] and the permutation that
    sorts them by magnitude.
    """

    values: np.ndarray
    magnitudes: np.ndarray
    phases: np.ndarray
    order: np.ndarray
    is_real: bool

    def __post_init__(self):
        for arr in (self.values, self.magnitudes, self.phases, self.order):
            arr.setflags(write=False)

    def __len__(self) -> int:
        return len(self.values)

    @property
    def sorted_values(self) -> np.ndarray:
        return self.values[self.order]

    @property
    def real_parts(self) -> np.ndarray:
        return self.values.real

    def extremes(self) -> Tuple[complex, complex]:
        """Smallest- and largest-magnitude eigenvalues."""
        return self.values[self.order[0]], self.values[self.order[-1]]


def _pair_conjugates(values: np.ndarray, tol: float) -> np.ndarray:
    """Snap near-real values to the real axis and make complex pairs exact conjugates."""
    values = np.array(values, dtype=complex)
    scale = np.maximum(1.0, np.abs(values))
    real_mask = np.abs(values.imag) <= tol * scale
    values[real_mask] = values[real_mask].real + 0.0j

    upper = [k for k in np.flatnonzero(~real_mask) if values[k].imag > 0]
    lower = [k for k in np.flatnonzero(~real_mask) if values[k].imag < 0]
    for k in upper:
        if not lower:
            break
        partner = min(lower, key=lambda m: abs(values[m] - np.conj(values[k])))
        lower.remove(partner)
        re = 0.5 * (values[k].real + values[partner].real)
        im = 0.5 * (values[k].imag - values[partner].imag)
        values[k] = complex(re, im)
        values[partner] = complex(re, -im)
    return values


def spectrum_from_values(values: ArrayLike, real_tol: float = REAL_TOL) -> Spectrum:
    """Wrap an array of eigenvalues in a Spectrum."""
    values = np.asarray(values, dtype=complex) + 0.0
    magnitudes = np.abs(values)
    phases = np.angle(values)
    phases = np.where(phases <= -np.pi, np.pi, phases)
    order = np.argsort(magnitudes, kind="stable")
    scale = np.maximum(1.0, magnitudes)
    is_real = bool(np.all(np.abs(values.imag) <= real_tol * scale))
    return Spectrum(
        values=values,
        magnitudes=magnitudes,
        phases=phases,
        order=order,
        is_real=is_real,
    )


def eigenvalues(
    matrix: ArrayLike,
    symmetry_tol: float = SYMMETRY_TOL,
    real_tol: float = REAL_TOL,
) -> Spectrum:
    """
    All eigenvalues of a dense real square matrix.

    Args:
        matrix: Finite real n x n array, n >= 1
        symmetry_tol: ||A - A^T|| below which the symmetric path is taken
        real_tol: Relative imaginary-part tolerance for the ``is_real`` flag

    Returns:
        Spectrum of the matrix

    Raises:
        EigenSolverError: On bad input, non-convergence or a failed trace check
    """
    A = np.asarray(matrix, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] == 0:
        raise EigenSolverError("expected a non-empty square matrix", {"shape": A.shape})
    if not np.all(np.isfinite(A)):
        raise EigenSolverError("matrix has non-finite entries", {"shape": A.shape})

    norm = float(np.linalg.norm(A))
    symmetric = float(np.linalg.norm(A - A.T)) < symmetry_tol
    try:
        if symmetric:
            values = eigvalsh(0.5 * (A + A.T)).astype(complex)
        else:
            values = eigvals(A, check_finite=False)
    except LinAlgError as e:
        raise EigenSolverError(
            f"eigenvalue iteration did not converge ({e})",
            {"n": A.shape[0], "norm": f"{norm:.3e}", "symmetric": symmetric},
        )

    if not np.all(np.isfinite(values)):
        raise EigenSolverError(
            "eigenvalue iteration produced non-finite values",
            {"n": A.shape[0], "norm": f"{norm:.3e}"},
        )
    residual = abs(complex(np.sum(values)) - np.trace(A))
    if residual > 1e-8 * max(norm, 1.0) * A.shape[0]:
        raise EigenSolverError(
            "trace check failed",
            {"n": A.shape[0], "norm": f"{norm:.3e}", "trace_residual": f"{residual:.3e}"},
        )
    if not symmetric:
        values = _pair_conjugates(values, real_tol)
    return spectrum_from_values(values, real_tol)


def spectral_radius(spectrum: Spectrum) -> float:
    """Largest eigenvalue magnitude."""
    if len(spectrum) == 0:
        raise ValueError("spectral radius of an empty spectrum")
    return float(np.max(spectrum.magnitudes))


def is_real_spectrum(spectrum: Spectrum, tol: float = REAL_TOL) -> bool:
    """True iff every |Im| <= tol * max(1, |lambda|)."""
    scale = np.maximum(1.0, spectrum.magnitudes)
    return bool(np.all(np.abs(spectrum.values.imag) <= tol * scale))

"""Unit tests for eigenvalue computation."""

import os
import sys

import numpy as np
import pytest

sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '../..')))

from src.models.graph import ordered_subgraphs_fixture, pinned_system, ring_with_leader
from src.models.spectral import (
    EigenSolverError,
    eigenvalues,
    is_real_spectrum,
    spectral_radius,
    spectrum_from_values,
)
from src.services.stability import gamma_bound_real, perron
from tests.factories import random_connected_graph


def characteristic_roots(A):
    """Roots of det(zI - A) via Faddeev-LeVerrier coefficients."""
    n = A.shape[0]
    coeffs = [1.0]
    M = np.zeros_like(A)
    c = 1.0
    for k in range(1, n + 1):
        M = A @ M + c * np.eye(n)
        c = -np.trace(A @ M) / k
        coeffs.append(c)
    return np.roots(coeffs)


def assert_same_multiset(a, b, tol):
    a, b = list(np.asarray(a, dtype=complex)), list(np.asarray(b, dtype=complex))
    assert len(a) == len(b)
    for value in a:
        k = int(np.argmin([abs(value - other) for other in b]))
        assert abs(value - b[k]) <= tol, (value, b[k])
        b.pop(k)


class TestEigenvalues:

    def test_symmetric_two_by_two(self):
        spectrum = eigenvalues([[2.0, -1.0], [-1.0, 2.0]])
        np.testing.assert_allclose(np.sort(spectrum.values.real), [1.0, 3.0], atol=1e-14)
        assert spectrum.is_real

    def test_identity(self):
        spectrum = eigenvalues(np.eye(5))
        np.testing.assert_allclose(spectrum.values, np.ones(5), atol=1e-15)
        assert spectral_radius(spectrum) == pytest.approx(1.0, abs=1e-15)

    def test_ring_extremes(self):
        spectrum = eigenvalues(pinned_system(ring_with_leader(31, 16)).K)
        smallest, largest = spectrum.extremes()
        assert abs(smallest) == pytest.approx(0.0081, abs=5e-4)
        assert abs(largest) == pytest.approx(4.2361, abs=1e-3)

    def test_fixture_spectrum(self):
        K = pinned_system(ordered_subgraphs_fixture()).K
        spectrum = eigenvalues(K)
        assert spectrum.is_real
        np.testing.assert_allclose(
            np.sort(spectrum.values.real), [1.0, 1.0, 1.0, 1.0, 3.0, 4.0], atol=1e-9
        )

    def test_rotation_is_complex(self):
        spectrum = eigenvalues([[0.0, -1.0], [1.0, 0.0]])
        assert not spectrum.is_real
        assert not is_real_spectrum(spectrum)
        assert spectrum.values[0] == np.conj(spectrum.values[1])

    def test_phase_of_negative_real(self):
        spectrum = eigenvalues([[-1.0]])
        assert spectrum.phases[0] == pytest.approx(np.pi)

    def test_magnitude_order(self):
        spectrum = spectrum_from_values([3.0, -1.0, 2.0])
        np.testing.assert_array_equal(spectrum.sorted_values.real, [-1.0, 2.0, 3.0])
        assert spectral_radius(spectrum) == 3.0

    def test_result_read_only(self):
        spectrum = eigenvalues(np.eye(2))
        with pytest.raises(ValueError):
            spectrum.values[0] = 2.0

    def test_perron_radius_of_ring(self):
        sys_ = pinned_system(ring_with_leader(31, 16))
        assert spectral_radius(eigenvalues(perron(sys_, 0.471))) < 1.0
        bound = gamma_bound_real(eigenvalues(sys_.K)).upper
        assert spectral_radius(eigenvalues(perron(sys_, bound))) == pytest.approx(1.0, abs=1e-9)


class TestEigenvalueErrors:

    @pytest.mark.parametrize("matrix", [
        np.zeros((2, 3)),
        np.zeros((0, 0)),
        np.array([[1.0, np.nan], [0.0, 1.0]]),
        np.array([[np.inf]]),
    ])
    def test_unusable_input(self, matrix):
        with pytest.raises(EigenSolverError) as exc_info:
            eigenvalues(matrix)
        assert "shape" in exc_info.value.diagnostics

    def test_empty_spectrum_radius(self):
        with pytest.raises(ValueError):
            spectral_radius(spectrum_from_values(np.array([], dtype=complex)))


class TestEigenvalueProperties:

    def test_matches_characteristic_polynomial(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            n = int(rng.integers(1, 5))
            A = rng.normal(size=(n, n))
            assert_same_multiset(eigenvalues(A).values, characteristic_roots(A), 1e-7)

    def test_trace_and_determinant(self):
        rng = np.random.default_rng(17)
        for _ in range(100):
            n = int(rng.integers(2, 9))
            A = rng.normal(size=(n, n))
            values = eigenvalues(A).values
            scale = max(np.linalg.norm(A), 1.0)
            assert abs(values.sum() - np.trace(A)) <= 1e-8 * scale
            det = np.linalg.det(A)
            assert abs(np.prod(values) - det) <= 1e-6 * max(abs(det), 1.0)

    def test_complex_values_come_in_exact_pairs(self):
        rng = np.random.default_rng(23)
        for _ in range(100):
            values = eigenvalues(rng.normal(size=(6, 6))).values
            for v in values[values.imag != 0]:
                assert np.conj(v) in values

    def test_pinned_laplacians_have_positive_real_parts(self):
        rng = np.random.default_rng(29)
        for _ in range(100):
            spec = random_connected_graph(rng, int(rng.integers(1, 21)))
            spectrum = eigenvalues(pinned_system(spec).K)
            assert np.all(spectrum.values.real > 0)

    def test_symmetric_graphs_have_real_spectra(self):
        rng = np.random.default_rng(31)
        for _ in range(100):
            spec = random_connected_graph(rng, int(rng.integers(1, 21)), symmetric=True)
            assert eigenvalues(pinned_system(spec).K).is_real

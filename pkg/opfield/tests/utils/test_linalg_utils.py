# /*
#  * -----------------------------------------------------------------------------
#  *  Copyright (c) 2025 Magda Kowalska. All rights reserved.
#  *
#  *  This software and its source code are the intellectual property of
#  *  Magda Kowalska. Unauthorized copying, reproduction, or use of this
#  *  software, in whole or in part, is strictly prohibited without express
#  *  written permission.
#  *
#  *  This software is protected under the Berne Convention for the Protection
#  *  of Literary and Artistic Works, EU copyright law, and international
#  *  copyright treaties.
#  *
#  *  Author: Magda Kowalska
#  *  Created: 2026-10-19
#  *  Last Modified: 2026-10-19
#  * -----------------------------------------------------------------------------
#  */

import math
from unittest.mock import patch

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from opfield.exceptions import OperatorInputError, SingularityError
from opfield.models import HermitianOperator, UnitaryOperator
from opfield.utils.instance_utils import SplitMix64, haar_unitary
from opfield.utils.linalg_utils import (
    commutator_norm,
    hermitian_eigen,
    operator_norm,
    polar_unitary,
    unitary_distance,
    unitary_geodesic,
)


def random_hermitian(seed: int, n: int) -> np.ndarray:
    g = SplitMix64(seed).complex_normals(n, n)
    return (g + g.conj().T) / 2


def random_matrix(seed: int, n: int) -> np.ndarray:
    return SplitMix64(seed).complex_normals(n, n)


class TestOperatorNorm:
    """Tests for operator_norm"""

    def test_identity(self):
        assert operator_norm(np.eye(4)) == pytest.approx(1.0, rel=1e-12)

    def test_diagonal_takes_largest_modulus(self):
        assert operator_norm(np.diag([3.0, -4.0])) == pytest.approx(4.0, rel=1e-12)

    def test_antidiagonal_closed_form(self):
        s = math.sin(0.01)
        a = np.array([[0.0, 2 * s], [2 * s, 0.0]])
        assert operator_norm(a) == pytest.approx(2 * s, rel=1e-12)

    def test_rejects_non_finite(self):
        with pytest.raises(OperatorInputError):
            operator_norm(np.array([[1.0, np.nan], [0.0, 1.0]]))

    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(min_value=0, max_value=2**32), n=st.integers(min_value=1, max_value=6))
    def test_submultiplicative(self, seed, n):
        a, b = random_matrix(seed, n), random_matrix(seed + 1, n)
        assert operator_norm(a @ b) <= operator_norm(a) * operator_norm(b) + 1e-10


class TestHermitianEigen:
    """Tests for the cyclic Jacobi eigensolver"""

    def test_diagonal_input_sorted_descending(self):
        eig = hermitian_eigen(np.diag([1.0, 2.0]))
        np.testing.assert_allclose(eig.values, [2.0, 1.0], atol=1e-15)
        np.testing.assert_allclose(np.abs(eig.frame.matrix), [[0.0, 1.0], [1.0, 0.0]], atol=1e-15)

    def test_two_by_two_closed_form(self):
        eig = hermitian_eigen(np.array([[0.0, 1.0], [1.0, 0.0]]))
        np.testing.assert_allclose(eig.values, [1.0, -1.0], atol=1e-14)
        v = eig.frame.matrix
        # columns are (1, 1)/sqrt2 and (1, -1)/sqrt2 up to phase
        assert abs(abs(np.vdot(v[:, 0], np.array([1, 1]) / math.sqrt(2))) - 1.0) < 1e-12
        assert abs(abs(np.vdot(v[:, 1], np.array([1, -1]) / math.sqrt(2))) - 1.0) < 1e-12

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_random_reconstruction(self, seed):
        h = random_hermitian(seed, 8)
        eig = hermitian_eigen(h)
        residual = operator_norm(h - eig.reconstruct())
        assert residual <= 1e-12 * operator_norm(h)

    def test_eigen_equation_residual(self):
        h = random_hermitian(7, 6)
        eig = hermitian_eigen(h)
        v = eig.frame.matrix
        assert operator_norm(h @ v - v * eig.values) <= 1e-12 * operator_norm(h)

    def test_values_non_increasing(self):
        eig = hermitian_eigen(random_hermitian(3, 10))
        assert np.all(np.diff(eig.values) <= 0)

    def test_deterministic(self):
        h = random_hermitian(11, 7)
        first, second = hermitian_eigen(h), hermitian_eigen(h)
        assert np.array_equal(first.values, second.values)
        assert np.array_equal(first.frame.matrix, second.frame.matrix)

    def test_degenerate_ties_are_phase_normalized(self):
        eig = hermitian_eigen(np.eye(3) * 2.0)
        np.testing.assert_array_equal(eig.values, [2.0, 2.0, 2.0])
        np.testing.assert_allclose(eig.frame.matrix, np.eye(3), atol=1e-15)

    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError):
            hermitian_eigen(np.array([[0.0, 1.0], [0.0, 0.0]]))

    @settings(max_examples=20, deadline=None)
    @given(
        seed=st.integers(min_value=0, max_value=2**32),
        shift=st.floats(min_value=-5.0, max_value=5.0),
    )
    def test_shift_invariance(self, seed, shift):
        h = random_hermitian(seed, 5)
        base = hermitian_eigen(h).values
        shifted = hermitian_eigen(h + shift * np.eye(5)).values
        np.testing.assert_allclose(shifted, base + shift, atol=1e-10)

    def test_warns_when_sweep_cap_hit(self):
        h = random_hermitian(5, 6)
        with patch("opfield.utils.linalg_utils.logger") as mock_logger:
            hermitian_eigen(h, max_sweeps=0)
        mock_logger.warning.assert_called_once()


class TestCommutatorAndDistance:
    def test_commuting_diagonals(self):
        assert commutator_norm(np.diag([1.0, 2.0]), np.diag([3.0, -1.0])) == 0.0

    def test_pauli_commutator(self):
        x = np.array([[0, 1], [1, 0]], dtype=complex)
        z = np.diag([1.0, -1.0])
        assert commutator_norm(x, z) == pytest.approx(2.0, rel=1e-12)

    def test_unitary_distance_of_scaled_identity(self):
        assert unitary_distance(1.5 * np.eye(3)) == pytest.approx(0.5, rel=1e-12)
        assert unitary_distance(np.eye(3)) == pytest.approx(0.0, abs=1e-15)


class TestPolarUnitary:
    """Tests for polar_unitary"""

    def test_unitary_is_fixed(self):
        u = haar_unitary(SplitMix64(1), 4)
        np.testing.assert_allclose(polar_unitary(u, 0.0).matrix, u, atol=1e-12)

    def test_positive_scaling(self):
        np.testing.assert_allclose(polar_unitary(2 * np.eye(3), 0.0).matrix, np.eye(3), atol=1e-15)

    def test_matches_svd_oracle(self):
        a = np.array([[1.0, 0.1], [0.0, 1.0]])
        w, _, vh = np.linalg.svd(a)
        result = polar_unitary(a, 0.0).matrix
        np.testing.assert_allclose(result, w @ vh, atol=1e-12)
        assert operator_norm(result.conj().T @ result - np.eye(2)) <= 1e-12

    def test_singular_without_regularization(self):
        with pytest.raises(SingularityError) as exc_info:
            polar_unitary(np.diag([1.0, 0.0]), 0.0)
        assert exc_info.value.singular_value == 0.0
        assert "smallest singular value" in str(exc_info.value)

    def test_zero_matrix_with_auto(self):
        with pytest.raises(SingularityError):
            polar_unitary(np.zeros((2, 2)), "auto")

    def test_regularization_admits_singular_input(self):
        result = polar_unitary(np.diag([1.0, 0.0]), 1e-3)
        assert unitary_distance(result) < 1e-12

    def test_negative_regularization_rejected(self):
        with pytest.raises(OperatorInputError):
            polar_unitary(np.eye(2), -1.0)

    @pytest.mark.parametrize("n,seed", [(2, 0), (3, 1), (2, 2), (3, 3)])
    def test_local_minimality(self, n, seed):
        a = random_matrix(seed, n)
        w = polar_unitary(a, 0.0).matrix
        best = operator_norm(a - w)
        rng = SplitMix64(seed + 100)
        for _ in range(20):
            g = rng.complex_normals(n, n)
            generator = 1e-3 * (g + g.conj().T) / 2
            nearby = polar_unitary(w @ (np.eye(n) + 1j * generator), 0.0).matrix
            assert operator_norm(a - nearby) >= best - 1e-12


class TestUnitaryGeodesic:
    """Tests for unitary_geodesic"""

    def test_identity_stays(self):
        for t in (0.0, 0.3, 1.0):
            np.testing.assert_allclose(unitary_geodesic(np.eye(3), t).matrix, np.eye(3), atol=1e-14)

    def test_scalar_phase_halfway(self):
        u = np.diag([np.exp(1j * math.pi / 2), 1.0])
        expected = np.diag([np.exp(1j * math.pi / 4), 1.0])
        np.testing.assert_allclose(unitary_geodesic(u, 0.5).matrix, expected, atol=1e-12)

    def test_endpoints(self):
        u = haar_unitary(SplitMix64(4), 4)
        np.testing.assert_allclose(unitary_geodesic(u, 0.0).matrix, np.eye(4), atol=0)
        np.testing.assert_allclose(unitary_geodesic(u, 1.0).matrix, u, atol=1e-12)

    def test_phase_minus_pi_goes_to_upper_branch(self):
        u = np.diag([-1.0 + 0.0j, 1.0])
        result = unitary_geodesic(u, 0.5).matrix
        np.testing.assert_allclose(result, np.diag([1j, 1.0]), atol=1e-12)

    def test_path_is_unitary(self):
        u = haar_unitary(SplitMix64(5), 5)
        for t in np.linspace(0.0, 1.0, 100):
            result = unitary_geodesic(u, float(t)).matrix
            assert operator_norm(result.conj().T @ result - np.eye(5)) <= 1e-12

    def test_rejects_t_outside_unit_interval(self):
        with pytest.raises(OperatorInputError):
            unitary_geodesic(np.eye(2), 1.5)

    def test_accepts_operator_models(self):
        u = UnitaryOperator(matrix=np.eye(2))
        h = HermitianOperator(matrix=np.eye(2))
        assert unitary_geodesic(u, 0.5).dim == 2
        assert operator_norm(h) == pytest.approx(1.0)

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

import numpy as np
import pytest

from opfield.config import FIELD_TOL_FACTOR
from opfield.exceptions import OperatorInputError
from opfield.models import EigenDecomposition, HermitianOperator, UnitaryOperator
from opfield.utils.field_utils import (
    approx_finite_spectrum,
    block_jump,
    cauchy_bound,
    glue_breakpoint,
    group_eigenvalues,
    match_breakpoint,
    node_tolerance,
    ordering_holds,
)
from opfield.utils.instance_utils import SplitMix64, random_hermitian
from opfield.utils.linalg_utils import hermitian_eigen, operator_norm


def rotation(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]], dtype=np.complex128)


def diagonal_eig(values) -> EigenDecomposition:
    values = np.asarray(values, dtype=float)
    return EigenDecomposition(values=values, frame=UnitaryOperator(matrix=np.eye(len(values))))


@pytest.fixture
def k_random():
    return HermitianOperator(matrix=random_hermitian(SplitMix64(7), 6))


class TestApproxFiniteSpectrum:
    """Tests for approx_finite_spectrum"""

    def test_snaps_to_nearest_grid_point(self):
        k = HermitianOperator(matrix=np.diag([0.3]))
        k_prime, error = approx_finite_spectrum(k, 0.25)
        np.testing.assert_allclose(k_prime.matrix, [[0.25]], atol=1e-15)
        assert error == pytest.approx(0.05, abs=1e-15)

    def test_grid_spectrum_is_left_alone(self):
        k = HermitianOperator(matrix=np.diag([0.5, -0.25]))
        k_prime, error = approx_finite_spectrum(k, 0.25)
        assert k_prime is k
        assert error == 0.0

    def test_error_within_half_epsilon(self, k_random):
        epsilon = 0.1
        k_prime, error = approx_finite_spectrum(k_random, epsilon)
        assert error <= epsilon / 2 + 1e-12
        assert operator_norm(k_prime.matrix - k_random.matrix) == pytest.approx(error)
        values = np.linalg.eigvalsh(k_prime.matrix)
        np.testing.assert_allclose(values / epsilon, np.round(values / epsilon), atol=1e-9)

    def test_epsilon_must_be_positive(self, k_random):
        with pytest.raises(OperatorInputError):
            approx_finite_spectrum(k_random, 0.0)


class TestGroupEigenvalues:
    """Tests for group_eigenvalues and ordering_holds"""

    def test_consecutive_pairs(self):
        blocks = group_eigenvalues(diagonal_eig([4.0, 3.0, 2.0, 1.0]), 2)
        assert len(blocks) == 2
        np.testing.assert_array_equal(blocks[0].matrix, np.diag([4.0, 3.0]))
        np.testing.assert_array_equal(blocks[1].matrix, np.diag([2.0, 1.0]))
        assert ordering_holds(blocks)

    def test_degenerate_spectrum_is_ordered(self):
        blocks = group_eigenvalues(diagonal_eig([1.0, 1.0, 1.0, 1.0]), 2)
        assert ordering_holds(blocks)

    def test_overlapping_blocks_are_not_ordered(self):
        blocks = [
            HermitianOperator(matrix=np.diag([1.0, 0.0])),
            HermitianOperator(matrix=np.diag([0.5, -1.0])),
        ]
        assert not ordering_holds(blocks)
        assert ordering_holds(blocks, tol=0.5)

    def test_fiber_dim_must_divide(self):
        with pytest.raises(OperatorInputError):
            group_eigenvalues(diagonal_eig([3.0, 2.0, 1.0]), 2)


class TestMatchBreakpoint:
    """Tests for match_breakpoint"""

    def test_identical_operators(self, k_random):
        match = match_breakpoint(k_random, k_random, 2)
        np.testing.assert_allclose(match.W.matrix, np.eye(6), atol=1e-10)
        np.testing.assert_allclose(match.gaps, 0.0, atol=1e-12)
        assert match.pairing == [(0, 0), (1, 1), (2, 2)]

    def test_scalar_shift(self, k_random):
        shifted = HermitianOperator(matrix=k_random.matrix + 0.01 * np.eye(6))
        match = match_breakpoint(k_random, shifted, 1)
        np.testing.assert_allclose(match.gaps, 0.01, atol=1e-12)
        np.testing.assert_allclose(match.W.matrix, np.eye(6), atol=1e-8)

    def test_gaps_obey_weyl(self, k_random):
        perturbation = 1e-3 * random_hermitian(SplitMix64(8), 6)
        k_right = HermitianOperator(matrix=k_random.matrix + perturbation)
        match = match_breakpoint(k_random, k_right, 3)
        assert match.gaps.max() <= operator_norm(perturbation) + 1e-12

    def test_aligned_frame_diagonalizes_right_operator(self, k_random):
        perturbation = 1e-3 * random_hermitian(SplitMix64(9), 6)
        k_right = HermitianOperator(matrix=k_random.matrix + perturbation)
        match = match_breakpoint(k_random, k_right, 2)
        f = match.aligned_frame.matrix
        in_frame = f.conj().T @ k_right.matrix @ f
        np.testing.assert_allclose(in_frame, np.diag(np.diag(in_frame)), atol=1e-10)
        np.testing.assert_allclose(
            np.diag(in_frame).real, hermitian_eigen(k_right).values, atol=1e-10
        )

    def test_aligned_frame_stays_close(self, k_random):
        perturbation = 1e-6 * random_hermitian(SplitMix64(10), 6)
        k_right = HermitianOperator(matrix=k_random.matrix + perturbation)
        match = match_breakpoint(k_random, k_right, 1)
        assert operator_norm(match.W.matrix - np.eye(6)) < 1e-3

    def test_dims_must_agree(self, k_random):
        with pytest.raises(OperatorInputError):
            match_breakpoint(k_random, HermitianOperator(matrix=np.eye(4)), 2)


class TestGlueBreakpoint:
    """Tests for glue_breakpoint"""

    @pytest.fixture
    def h_local(self):
        return HermitianOperator(matrix=np.diag([1.0, -1.0]))

    def test_identity_mismatch_stays_at_identity(self, h_local):
        glue = glue_breakpoint(UnitaryOperator(matrix=np.eye(2)), h_local, (0.0, 1.0), 1e-6)
        for x in np.linspace(0.0, 1.0, 7):
            np.testing.assert_allclose(glue(float(x)), np.eye(2), atol=1e-12)
        assert glue.report.mismatch_commutator == 0.0
        assert glue.report.sup_commutator <= glue.report.threshold

    def test_rotation_mismatch_damped_over_window(self):
        # eigenvalues within one coarse cell: the glue is the geodesic from W to I
        h_local = HermitianOperator(matrix=np.diag([0.01, -0.01]))
        w = UnitaryOperator(matrix=rotation(0.3))
        glue = glue_breakpoint(w, h_local, (1.0, 3.0), 1e-6, epsilon=1e-3, node=4)
        assert glue.homotopy.certificate.branch == "single_segment"
        assert glue.report.mismatch_commutator == pytest.approx(0.02 * math.sin(0.3), rel=1e-9)
        np.testing.assert_allclose(glue(1.0), w.matrix, atol=1e-12)
        np.testing.assert_allclose(glue(2.0), rotation(0.15), atol=1e-12)
        np.testing.assert_allclose(glue(3.0), np.eye(2), atol=1e-12)
        np.testing.assert_allclose(glue(5.0), np.eye(2), atol=1e-12)
        np.testing.assert_array_equal(glue(2.0), glue.homotopy.path.at(0.5))
        assert glue.report.node == 4
        assert glue.report.window == (1.0, 3.0)

    def test_parameter_is_clipped(self, h_local):
        glue = glue_breakpoint(UnitaryOperator(matrix=np.eye(2)), h_local, (1.0, 3.0), 1e-6)
        assert glue.parameter(0.0) == 0.0
        assert glue.parameter(2.0) == 0.5
        assert glue.parameter(4.0) == 1.0

    def test_reversed_window(self, h_local):
        with pytest.raises(OperatorInputError):
            glue_breakpoint(UnitaryOperator(matrix=np.eye(2)), h_local, (1.0, 0.0), 1e-6)


class TestHelpers:
    """Tests for block_jump, node_tolerance and cauchy_bound"""

    def test_block_jump_takes_max_entry(self):
        left = np.zeros((2, 2, 2))
        right = np.zeros((2, 2, 2))
        right[0, 1, 0] = 0.3
        right[1, 0, 0] = -0.1
        np.testing.assert_allclose(block_jump(left, right), [0.3, 0.1])

    def test_node_tolerance_floor(self):
        assert node_tolerance(0.5) == FIELD_TOL_FACTOR
        assert node_tolerance(10.0) == pytest.approx(10.0 * FIELD_TOL_FACTOR)

    def test_cauchy_bound(self):
        assert cauchy_bound(1.0, 0.5, 0.5) == pytest.approx(2.0)
        assert cauchy_bound(3.0, 8e-4, 8e-4) == pytest.approx(6.0 * 0.2)

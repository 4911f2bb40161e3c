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

import logging
import math
from typing import Sequence, Union

import numpy as np
from scipy.linalg import svd

from opfield.exceptions import OperatorInputError
from opfield.models import (
    BlockRotation,
    BlockStructure,
    NormBoundReport,
    SpectralPartition,
    UnitaryOperator,
)
from opfield.utils.linalg_utils import as_square, operator_norm

logger = logging.getLogger(__name__)


def keep_mask(partition: SpectralPartition, blocks: BlockStructure) -> np.ndarray:
    """Boolean mask (in the q-frame) of the entries d(a) keeps"""
    n = partition.dim
    mask = np.zeros((n, n), dtype=bool)
    for i in range(blocks.m):
        for j in range(blocks.m):
            if i == j:
                keep = True
            elif abs(i - j) == 1:
                keep = not partition.separated_flags[min(i, j)]
            else:
                keep = False
            if keep:
                mask[blocks.block(i, j)] = True
    return mask


def truncate_in_frame(a: np.ndarray, partition: SpectralPartition, blocks: BlockStructure) -> np.ndarray:
    return np.where(keep_mask(partition, blocks), a, 0.0)


def three_diagonal_truncate(
    u: Union[UnitaryOperator, np.ndarray],
    partition: SpectralPartition,
    blocks: BlockStructure,
) -> np.ndarray:
    """d(u): drop blocks two or more steps off the diagonal and blocks between separated segments"""
    mat = as_square(u)
    if mat.shape[0] != partition.dim:
        raise OperatorInputError(
            f"matrix of dim {mat.shape[0]} does not match a partition of dim {partition.dim}"
        )
    return blocks.from_frame(truncate_in_frame(blocks.to_frame(mat), partition, blocks))


def triangularize_pair(a: np.ndarray, split: int, epsilon: float) -> BlockRotation:
    """Build v(t) for the 2x2 block matrix `a` whose first block has size `split`.

    Args:
        a: square matrix viewed as [[a11, a12], [a21, a22]]
        split: size of the a11 block
        epsilon: target for ||(v(1) a)_21||

    Returns:
        BlockRotation with v(0) = I and the measured residual ||(v(1) a)_21||
    """
    mat = as_square(a)
    n = mat.shape[0]
    if not 0 < split < n:
        raise OperatorInputError(f"split {split} must lie strictly inside dim {n}")
    if not epsilon > 0:
        raise OperatorInputError(f"epsilon must be positive, got {epsilon}")

    a11 = mat[:split, :split]
    a21 = mat[split:, :split]

    # invertible approximant: lift small singular values of a11 to eta
    eta = min(epsilon / 2, 1e-12 + epsilon / 2)
    w, sigma, vh = svd(a11, lapack_driver="gesvd")
    lifted = np.maximum(sigma, eta)
    a11_inv = (vh.conj().T / lifted) @ w.conj().T
    alpha = a21 @ a11_inv

    left, s, right_h = svd(alpha, full_matrices=True, lapack_driver="gesvd")
    rotation = BlockRotation(
        split=split,
        alpha=alpha,
        left=left,
        right_h=right_h,
        singular_values=s,
        residual=0.0,
        epsilon=epsilon,
    )
    residual = operator_norm((rotation.at(1.0) @ mat)[split:, :split])
    if residual >= epsilon:
        logger.warning("triangularization residual %.3e not below epsilon %.3e", residual, epsilon)
    return rotation.model_copy(update={"residual": residual})


def block_row_bound(
    a: np.ndarray,
    blocks: Union[int, Sequence[int]],
    epsilon: float,
) -> NormBoundReport:
    """Check ||a|| <= epsilon sqrt(N) for an N x N block matrix with block rows of norm <= epsilon.

    `blocks` is either N (equal block sizes) or the list of block sizes.
    Comparisons carry a relative slack of 1e-12 since the bound is attained.
    """
    mat = as_square(a)
    n = mat.shape[0]
    if isinstance(blocks, int):
        if blocks < 1 or n % blocks:
            raise OperatorInputError(f"dim {n} does not split into {blocks} equal blocks")
        sizes = [n // blocks] * blocks
    else:
        sizes = list(blocks)
        if sum(sizes) != n or any(size < 1 for size in sizes):
            raise OperatorInputError(f"block sizes {sizes} do not partition dim {n}")

    edges = np.cumsum([0] + sizes)
    # ||sum_j a_ij a_ij*|| is the squared norm of block row i
    row_norms = [operator_norm(mat[edges[i] : edges[i + 1], :]) ** 2 for i in range(len(sizes))]
    slack = 1 + 1e-12
    measured = operator_norm(mat)
    bound = epsilon * math.sqrt(len(sizes))
    return NormBoundReport(
        precondition_met=max(row_norms) <= epsilon**2 * slack,
        bound_holds=measured <= bound * slack,
        measured_norm=measured,
        bound=bound,
        row_norms=row_norms,
    )

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

import numpy as np

from opfield.exceptions import OperatorInputError
from opfield.models import (
    BlockStructure,
    CoarseSegment,
    EigenDecomposition,
    FineSegment,
    HermitianOperator,
    SnappedOperator,
    SpectralPartition,
)
from opfield.utils.linalg_utils import operator_norm

logger = logging.getLogger(__name__)


def _cell_indices(values: np.ndarray, length: float) -> list[int]:
    """Cell of each value on the grid anchored at min(values).

    Cells are half-open [lo + j*length, lo + (j+1)*length); the last cell is
    closed at max(values).
    """
    lowest, highest = float(values[-1]), float(values[0])
    num_cells = max(1, math.ceil((highest - lowest) / length))
    return [min(math.floor((float(v) - lowest) / length), num_cells - 1) for v in values]


def _segments(values: np.ndarray, length: float, segment_cls) -> tuple[list, list[int]]:
    lowest, highest = float(values[-1]), float(values[0])
    cells = _cell_indices(values, length)
    occupied = sorted(set(cells))
    last_cell = max(1, math.ceil((highest - lowest) / length)) - 1
    renumber = {cell: k for k, cell in enumerate(occupied)}

    segments = []
    for k, cell in enumerate(occupied):
        lo = lowest + cell * length
        hi = highest if cell == last_cell else lo + length
        segments.append(
            segment_cls(
                index=k,
                cell=cell,
                lo=lo,
                hi=hi,
                midpoint=(lo + hi) / 2,
                eigen_indices=[i for i, c in enumerate(cells) if c == cell],
            )
        )
    return segments, [renumber[c] for c in cells]


def build_partition(eig: EigenDecomposition, delta: float) -> SpectralPartition:
    """Coarse cells of length delta^(1/4) and fine cells of length delta over the spectrum.

    Segments are numbered from the bottom of the spectrum up and only
    occupied cells are kept. q_frames[k] holds the eigenvector columns of
    the k-th coarse segment.
    """
    if not (delta > 0 and math.isfinite(delta)):
        raise OperatorInputError(f"delta must be a positive finite number, got {delta}")

    values = eig.values
    quarter_root = delta**0.25
    coarse, coarse_of = _segments(values, quarter_root, CoarseSegment)
    fine, fine_of = _segments(values, delta, FineSegment)

    frame = eig.frame.matrix
    q_frames = [frame[:, segment.eigen_indices] for segment in coarse]
    # separated iff at least one empty cell lies between the two segments
    separated = [coarse[k + 1].cell - coarse[k].cell > 1 for k in range(len(coarse) - 1)]

    logger.debug(
        "partition: delta=%.3e m=%d N=%d separated=%d",
        delta,
        len(coarse),
        len(fine),
        sum(separated),
    )
    return SpectralPartition(
        delta=delta,
        quarter_root=quarter_root,
        eigenvalues=values,
        coarse=coarse,
        fine=fine,
        coarse_of=coarse_of,
        fine_of=fine_of,
        q_frames=q_frames,
        separated_flags=separated,
    )


def snap_to_fine(eig: EigenDecomposition, partition: SpectralPartition) -> SnappedOperator:
    """h_bar = sum_s lambda_bar_s p_bar_s, every eigenvalue moved to its fine midpoint"""
    if eig.dim != partition.dim or not np.array_equal(eig.values, partition.eigenvalues):
        raise OperatorInputError("partition was built from a different eigendecomposition")

    snapped = np.array([partition.fine[s].midpoint for s in partition.fine_of])
    h_bar = eig.reconstruct(snapped)
    error = operator_norm(eig.reconstruct(eig.values - snapped))
    return SnappedOperator(
        h_bar=HermitianOperator(matrix=(h_bar + h_bar.conj().T) / 2),
        approximation_error=error,
        delta=partition.delta,
    )


def block_structure(partition: SpectralPartition) -> BlockStructure:
    ranges = []
    start = 0
    for frame in partition.q_frames:
        ranges.append((start, start + frame.shape[1]))
        start += frame.shape[1]
    return BlockStructure(ranges=ranges, frame=np.hstack(partition.q_frames))


def partition_dump(partition: SpectralPartition) -> dict:
    """Diagnostic view: delta, segment intervals, midpoints, eigen indices, separation"""

    def segment_view(segment) -> dict:
        return {
            "index": segment.index,
            "cell": segment.cell,
            "interval": [segment.lo, segment.hi],
            "midpoint": segment.midpoint,
            "eigen_indices": list(segment.eigen_indices),
        }

    return {
        "delta": partition.delta,
        "quarter_root": partition.quarter_root,
        "m": partition.m,
        "N": partition.N,
        "coarse": [segment_view(s) for s in partition.coarse],
        "fine": [segment_view(s) for s in partition.fine],
        "separated_flags": list(partition.separated_flags),
    }

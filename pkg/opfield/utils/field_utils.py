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
from typing import Callable, Optional

import numpy as np

from opfield.config import FIELD_TOL_FACTOR, GLUE_SAMPLES_PER_STAGE
from opfield.exceptions import OperatorInputError
from opfield.models import (
    EigenDecomposition,
    FrozenModel,
    GlueReport,
    HermitianOperator,
    HomotopyResult,
    UnitaryOperator,
)
from opfield.homotopy import build_homotopy, homotopy_constant
from opfield.utils.linalg_utils import commutator_norm, hermitian_eigen, operator_norm, polar_unitary

logger = logging.getLogger(__name__)

# overlaps below this are treated as a crossing and left unaligned
MIN_OVERLAP = 1e-8


class BreakpointMatch(FrozenModel):
    pairing: list[tuple[int, int]]
    gaps: np.ndarray
    W: UnitaryOperator
    aligned_frame: UnitaryOperator


class GlueMap(FrozenModel):
    """x -> u_{t(x)} on a window [x_k, x'], t(x) = (x - x_k) / (x' - x_k) clipped to [0, 1]"""

    window: tuple[float, float]
    homotopy: HomotopyResult
    report: GlueReport

    def parameter(self, x: float) -> float:
        x0, x1 = self.window
        if x1 <= x0:
            return 0.0 if x <= x0 else 1.0
        return float(np.clip((x - x0) / (x1 - x0), 0.0, 1.0))

    def __call__(self, x: float) -> np.ndarray:
        return self.homotopy.path.at(self.parameter(x))


def snap_values(values: np.ndarray, epsilon: float) -> np.ndarray:
    return np.round(np.asarray(values, dtype=float) / epsilon) * epsilon


def approx_finite_spectrum(
    k: HermitianOperator,
    epsilon: float,
    eig: Optional[EigenDecomposition] = None,
) -> tuple[HermitianOperator, float]:
    """K' with every eigenvalue moved to the nearest point of the grid {j epsilon}"""
    if not epsilon > 0:
        raise OperatorInputError(f"epsilon must be positive, got {epsilon}")
    eig = eig or hermitian_eigen(k)
    snapped = snap_values(eig.values, epsilon)
    if np.array_equal(snapped, eig.values):
        return k, 0.0
    k_prime = eig.reconstruct(snapped)
    k_prime = HermitianOperator(matrix=(k_prime + k_prime.conj().T) / 2)
    return k_prime, operator_norm(k_prime.matrix - k.matrix)


def group_eigenvalues(eig: EigenDecomposition, p: int) -> list[HermitianOperator]:
    """Consecutive p-blocks of the sorted spectrum, each as a diagonal p x p matrix"""
    if p < 1 or eig.dim % p:
        raise OperatorInputError(f"dim {eig.dim} is not divisible by fiber dim {p}")
    return [
        HermitianOperator(matrix=np.diag(eig.values[i : i + p]).astype(np.complex128))
        for i in range(0, eig.dim, p)
    ]


def ordering_holds(blocks: list[HermitianOperator], tol: float = 0.0) -> bool:
    """min spec(lambda_i) >= max spec(lambda_{i+1}) - tol for consecutive blocks"""
    spectra = [np.linalg.eigvalsh(b.matrix) for b in blocks]
    return all(spectra[i].min() >= spectra[i + 1].max() - tol for i in range(len(spectra) - 1))


def _clusters(values: np.ndarray, tol: float) -> list[list[int]]:
    groups = [[0]]
    for i in range(1, values.shape[0]):
        if abs(values[i - 1] - values[i]) <= tol:
            groups[-1].append(i)
        else:
            groups.append([i])
    return groups


def match_breakpoint(
    k_left: HermitianOperator,
    k_right: HermitianOperator,
    p: int,
    eig_left: Optional[EigenDecomposition] = None,
    eig_right: Optional[EigenDecomposition] = None,
) -> BreakpointMatch:
    """Pair blocks positionally and rotate the right frame onto the left one.

    Inside every eigenspace cluster of the right spectrum the right frame is
    multiplied by the unitary that makes its overlap with the left frame
    positive; W = F_left* F_right_aligned.
    """
    if k_left.dim != k_right.dim:
        raise OperatorInputError(f"dims differ: {k_left.dim} vs {k_right.dim}")
    if k_left.dim % p:
        raise OperatorInputError(f"dim {k_left.dim} is not divisible by fiber dim {p}")
    eig_left = eig_left or hermitian_eigen(k_left)
    eig_right = eig_right or hermitian_eigen(k_right)

    f_left = eig_left.frame.matrix
    f_right = eig_right.frame.matrix.copy()
    scale = max(1.0, float(np.max(np.abs(eig_right.values))))
    for cluster in _clusters(eig_right.values, FIELD_TOL_FACTOR * scale):
        overlap = f_left[:, cluster].conj().T @ f_right[:, cluster]
        if np.linalg.svd(overlap, compute_uv=False).min() < MIN_OVERLAP:
            continue
        gauge = polar_unitary(overlap, 0.0).matrix.conj().T
        f_right[:, cluster] = f_right[:, cluster] @ gauge

    aligned = UnitaryOperator(matrix=f_right)
    w = f_left.conj().T @ f_right
    n_blocks = k_left.dim // p
    return BreakpointMatch(
        pairing=[(i, i) for i in range(n_blocks)],
        gaps=np.abs(eig_left.values - eig_right.values),
        W=UnitaryOperator(matrix=w),
        aligned_frame=aligned,
    )


def glue_breakpoint(
    w: UnitaryOperator,
    h_local: HermitianOperator,
    window: tuple[float, float],
    delta: float,
    epsilon: float = 0.0,
    node: int = 0,
    samples_per_stage: int = GLUE_SAMPLES_PER_STAGE,
) -> GlueMap:
    """Damp the mismatch unitary W to the identity across `window`.

    The sample map equals W at the left end of the window and I from the
    right end on. Retraction failures propagate.
    """
    x0, x1 = window
    if x1 < x0:
        raise OperatorInputError(f"window [{x0}, {x1}] is reversed")
    mismatch = commutator_norm(w, h_local)
    result = build_homotopy(h_local, w, max(delta, mismatch), samples_per_stage)
    h_norm = operator_norm(h_local)
    threshold = homotopy_constant(h_norm) * (2 * epsilon + result.certificate.delta) ** 0.25
    report = GlueReport(
        node=node,
        window=(x0, x1),
        mismatch_commutator=mismatch,
        sup_commutator=result.certificate.sup_commutator,
        threshold=threshold,
        guaranteed=result.certificate.bounds_guaranteed,
    )
    logger.debug(
        "glue at node %d: ||[W, h]||=%.3e sup=%.3e threshold=%.3e",
        node,
        mismatch,
        report.sup_commutator,
        threshold,
    )
    return GlueMap(window=(x0, x1), homotopy=result, report=report)


def block_jump(curves_left: np.ndarray, curves_right: np.ndarray) -> np.ndarray:
    """Per-curve max |entry| of the block difference; arrays shaped (n, p, p)"""
    diff = np.abs(curves_left - curves_right)
    return diff.reshape(diff.shape[0], -1).max(axis=1)


def node_tolerance(norm: float) -> float:
    return FIELD_TOL_FACTOR * max(1.0, norm)


def apply_glue(frames: np.ndarray, glue: Callable[[float], np.ndarray], xs: list[float]) -> list[np.ndarray]:
    return [frame @ glue(x) for frame, x in zip(frames, xs)]


def cauchy_bound(c: float, eps_prev: float, eps_curr: float) -> float:
    return 2.0 * c * math.pow(eps_prev + eps_curr, 0.25)

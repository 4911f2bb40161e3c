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

"""Four-step homotopy from an almost-commuting unitary to the identity.

All stage algebra runs in the q-frame, where the spectral blocks of h are
contiguous index ranges; samples are conjugated back to the input basis
before they are emitted. The parameter interval [0, 1] is split into four
equal stages.
"""

import logging
import math
from typing import Callable, Optional, Union

import numpy as np
import pandas as pd
from scipy.linalg import block_diag

from opfield.config import ENDPOINT_TOL, SAMPLES_PER_STAGE, STAGE2_EPS_FACTOR, UNITARY_TOL
from opfield.exceptions import OperatorInputError, RetractionError, SingularityError
from opfield.models import (
    BlockStructure,
    CheckResult,
    HermitianOperator,
    HomotopyCertificate,
    HomotopyResult,
    HomotopyThresholds,
    OperatorPath,
    SpectralPartition,
    UnitaryOperator,
    VerificationReport,
)
from opfield.utils.block_utils import three_diagonal_truncate, triangularize_pair, truncate_in_frame
from opfield.utils.linalg_utils import (
    commutator_norm,
    hermitian_eigen,
    operator_norm,
    polar_unitary,
    unitary_distance,
    unitary_geodesic,
)
from opfield.utils.partition_utils import block_structure, build_partition

logger = logging.getLogger(__name__)

STAGE_MARKS = [0.0, 0.25, 0.5, 0.75, 1.0]

# (t_start, t_end, intervals, stage, s -> in-frame matrix)
Piece = tuple[float, float, int, int, Callable[[float], np.ndarray]]


def homotopy_constant(h_norm: float) -> float:
    """C with 6 r + 96 ||h||^(3/2) r = C r"""
    return 6.0 + 96.0 * h_norm**1.5


def homotopy_thresholds(h_norm: float, delta: float) -> HomotopyThresholds:
    r = delta**0.25
    root = math.sqrt(h_norm)
    return HomotopyThresholds(
        truncation=4.0 * root * r,
        stage3_distance=24.0 * root * r,
        retraction_gap=48.0 * root * r,
        commutator=homotopy_constant(h_norm) * r,
        pre_commutator=max(6.0 * r, 2.0 * delta + 8.0 * h_norm**1.5 * r),
    )


def _sample_pieces(pieces: list[Piece]) -> tuple[list[float], list[int], list[np.ndarray]]:
    """Evaluate pieces on a shared grid; the start of a piece reuses the previous end"""
    ts, stages, mats = [], [], []
    for idx, (t0, t1, intervals, stage, func) in enumerate(pieces):
        for j in range(0 if idx == 0 else 1, intervals + 1):
            s = j / intervals
            ts.append(t1 if j == intervals else (1 - s) * t0 + s * t1)
            stages.append(stage)
            mats.append(func(s))
    return ts, stages, mats


def _linear(start: np.ndarray, end: np.ndarray) -> Callable[[float], np.ndarray]:
    return lambda s: (1 - s) * start + s * end


def _block_diagonal(a: np.ndarray, blocks: BlockStructure) -> np.ndarray:
    """d_0(a): keep the diagonal blocks only"""
    out = np.zeros_like(a)
    for i in range(blocks.m):
        rows, cols = blocks.block(i, i)
        out[rows, cols] = a[rows, cols]
    return out


def _stage2_pieces(
    d: np.ndarray,
    partition: SpectralPartition,
    blocks: BlockStructure,
    epsilon: float,
    samples_per_stage: int,
) -> tuple[list[Piece], np.ndarray]:
    """Sequential rotations v_1 ... v_{m-1}; returns the pieces and u_bar"""
    m = blocks.m
    t0, t1 = STAGE_MARKS[1], STAGE_MARKS[2]
    intervals = max(1, -(-samples_per_stage // (m - 1)))
    pieces: list[Piece] = []
    current = d.copy()

    for k in range(m - 1):
        a_k = (1 - k / (m - 1)) * t0 + (k / (m - 1)) * t1
        b_k = t1 if k == m - 2 else (1 - (k + 1) / (m - 1)) * t0 + ((k + 1) / (m - 1)) * t1

        if partition.separated_flags[k]:
            # lacuna between the segments: v_k = 1
            frozen = current.copy()
            pieces.append((a_k, b_k, intervals, 2, lambda s, frozen=frozen: frozen))
            continue

        rows = blocks.span(k, k + 1)
        split = blocks.ranges[k][1] - blocks.ranges[k][0]
        rotation = triangularize_pair(current[rows, rows], split, epsilon)
        start = current.copy()

        ending = start.copy()
        ending[rows, :] = rotation.at(1.0) @ start[rows, :]
        ending[blocks.block(k + 1, k)] = 0.0

        def rotate(s, start=start, rotation=rotation, rows=rows, ending=ending):
            if s == 1.0:
                return ending
            out = start.copy()
            out[rows, :] = rotation.at(s) @ start[rows, :]
            return out

        pieces.append((a_k, b_k, intervals, 2, rotate))
        current = ending
        logger.debug("stage 2 rotation %d: residual %.3e", k + 1, rotation.residual)

    return pieces, current


def _stage4_pieces(
    d0: np.ndarray,
    blocks: BlockStructure,
    samples_per_stage: int,
) -> list[Piece]:
    try:
        ws = [
            polar_unitary(d0[blocks.block(i, i)], "auto").matrix for i in range(blocks.m)
        ]
    except SingularityError as exc:
        raise RetractionError(4, STAGE_MARKS[3], exc) from exc
    w = block_diag(*ws)
    first = max(1, math.ceil(samples_per_stage / 2))
    second = max(1, samples_per_stage - first)
    middle = 0.5 * STAGE_MARKS[3] + 0.5 * STAGE_MARKS[4]

    def to_identity(s):
        if s == 1.0:
            return np.eye(w.shape[0], dtype=np.complex128)
        return block_diag(*[unitary_geodesic(wi, 1.0 - s).matrix for wi in ws])

    return [
        (STAGE_MARKS[3], middle, first, 4, _linear(d0, w)),
        (middle, STAGE_MARKS[4], second, 4, to_identity),
    ]


def _retract(ts: list[float], stages: list[int], mats: list[np.ndarray]) -> list[np.ndarray]:
    retracted = []
    for t, stage, mat in zip(ts, stages, mats):
        try:
            retracted.append(polar_unitary(mat, 0.0).matrix)
        except SingularityError as exc:
            raise RetractionError(stage, t, exc) from exc
    return retracted


def _stage_max(values: list[float], stages: list[int], count: int) -> list[float]:
    return [max([v for v, s in zip(values, stages) if s == k + 1], default=0.0) for k in range(count)]


def build_homotopy(
    h: Union[HermitianOperator, np.ndarray],
    u: Union[UnitaryOperator, np.ndarray],
    delta: float,
    samples_per_stage: int = SAMPLES_PER_STAGE,
) -> HomotopyResult:
    """Connect u to the identity through unitaries that almost commute with h.

    Args:
        h: Hermitian operator
        u: unitary with ||[u, h]|| <= delta; a larger measured commutator replaces delta
        delta: commutator budget
        samples_per_stage: sampling density of every stage

    Returns:
        HomotopyResult with the pre-retraction path u'(t), the retracted unitary
        path u(t) and the certificate of measured envelopes against the thresholds.

    Raises:
        OperatorInputError: delta <= 0, mismatched dims or a bad sample count
        RetractionError: a pre-retraction sample is singular
    """
    if not isinstance(h, HermitianOperator):
        h = HermitianOperator(matrix=h)
    if not isinstance(u, UnitaryOperator):
        u = UnitaryOperator(matrix=u)
    if h.dim != u.dim:
        raise OperatorInputError(f"h has dim {h.dim} but u has dim {u.dim}")
    if not (delta > 0 and math.isfinite(delta)):
        raise OperatorInputError(f"delta must be a positive finite number, got {delta}")
    if samples_per_stage < 1:
        raise OperatorInputError("samples_per_stage must be positive")

    measured = commutator_norm(u, h)
    delta_used = delta
    if measured > delta:
        logger.warning(
            "||[u, h]|| = %.3e exceeds delta = %.3e, using the measured value", measured, delta
        )
        delta_used = measured

    eig = hermitian_eigen(h)
    partition = build_partition(eig, delta_used)
    blocks = block_structure(partition)
    a = blocks.to_frame(u.matrix)
    d = truncate_in_frame(a, partition, blocks)

    if partition.m == 1:
        branch = "single_segment"
        stage_marks = [0.0, 1.0]
        pieces: list[Piece] = [
            (
                0.0,
                1.0,
                4 * samples_per_stage,
                1,
                lambda s: a if s == 0.0 else blocks.to_frame(unitary_geodesic(u, 1.0 - s).matrix),
            )
        ]
    else:
        branch = "four_step"
        stage_marks = list(STAGE_MARKS)
        h_prime = partition.midpoint_operator().matrix
        logger.debug(
            "stage 2 input: ||[d(u), h']|| = %.3e, ||h - h'|| = %.3e",
            commutator_norm(blocks.from_frame(d), h_prime),
            operator_norm(h.matrix - h_prime),
        )
        stage2, u_bar = _stage2_pieces(
            d, partition, blocks, delta_used * STAGE2_EPS_FACTOR, samples_per_stage
        )
        d0 = _block_diagonal(u_bar, blocks)
        pieces = [
            (STAGE_MARKS[0], STAGE_MARKS[1], samples_per_stage, 1, _linear(a, d)),
            *stage2,
            (STAGE_MARKS[2], STAGE_MARKS[3], samples_per_stage, 3, _linear(u_bar, d0)),
            *_stage4_pieces(d0, blocks, samples_per_stage),
        ]

    ts, stages, frame_mats = _sample_pieces(pieces)
    pre = [blocks.from_frame(mat) for mat in frame_mats]
    pre[0] = u.matrix
    retracted = _retract(ts, stages, pre)

    pre_path = OperatorPath(
        ts=ts, matrices=pre, stage_marks=stage_marks, is_retracted=False, delta=delta_used
    )
    path = OperatorPath(
        ts=ts, matrices=retracted, stage_marks=stage_marks, is_retracted=True, delta=delta_used
    )

    h_norm = operator_norm(h)
    thresholds = homotopy_thresholds(h_norm, delta_used)
    commutators = [commutator_norm(m, h.matrix) for m in retracted]
    pre_commutators = [commutator_norm(m, h.matrix) for m in pre]
    distances = [unitary_distance(m) for m in pre]
    stage_count = 1 if branch == "single_segment" else 4
    spectral_length = partition.spectral_length

    certificate = HomotopyCertificate(
        delta=delta_used,
        delta_requested=delta,
        delta_substituted=delta_used != delta,
        h_norm=h_norm,
        C=homotopy_constant(h_norm),
        spectral_length=spectral_length,
        C_centered=homotopy_constant(spectral_length / 2),
        branch=branch,
        m=partition.m,
        N=partition.N,
        samples_per_stage=samples_per_stage,
        sup_commutator=max(commutators),
        sup_pre_commutator=max(pre_commutators),
        sup_unitary_distance=max(distances),
        retraction_gap=max(operator_norm(r - p) for r, p in zip(retracted, pre)),
        truncation_error=operator_norm(a - d),
        stage_distances=_stage_max(distances, stages, stage_count),
        stage_commutators=_stage_max(pre_commutators, stages, stage_count),
        endpoint_error_start=operator_norm(retracted[0] - u.matrix),
        endpoint_error_end=operator_norm(retracted[-1] - np.eye(u.dim)),
        thresholds=thresholds,
        bounds_guaranteed=thresholds.stage3_distance < 1.0,
    )
    logger.info(
        "homotopy %s: dim=%d m=%d delta=%.3e sup||[u(t),h]||=%.3e threshold=%.3e",
        branch,
        u.dim,
        partition.m,
        delta_used,
        certificate.sup_commutator,
        thresholds.commutator,
    )
    return HomotopyResult(pre_path=pre_path, path=path, certificate=certificate)


def _check(name: str, measured: float, threshold: float, enforced: bool) -> CheckResult:
    return CheckResult(
        name=name,
        measured=measured,
        threshold=threshold,
        margin=threshold - measured,
        passed=measured <= threshold,
        enforced=enforced,
    )


def verify_certificate(
    path: OperatorPath,
    h: Union[HermitianOperator, np.ndarray],
    cert: HomotopyCertificate,
    u: Union[UnitaryOperator, np.ndarray],
    pre_path: Optional[OperatorPath] = None,
) -> VerificationReport:
    """Re-measure a homotopy from its samples and compare with the certificate.

    Failures are report entries, never exceptions. The commutator and the
    distance envelopes are enforced only when the certificate says the
    bounds are guaranteed; unitarity and endpoints are always enforced.
    """
    h_mat = h.matrix if isinstance(h, HermitianOperator) else np.asarray(h, dtype=np.complex128)
    u_mat = u.matrix if isinstance(u, UnitaryOperator) else np.asarray(u, dtype=np.complex128)
    guaranteed = cert.bounds_guaranteed
    eye = np.eye(path.dim)

    sup_commutator = max(commutator_norm(m, h_mat) for m in path.matrices)
    checks = [
        _check("commutator", sup_commutator, cert.thresholds.commutator, guaranteed),
        _check(
            "unitarity",
            max(unitary_distance(m) for m in path.matrices),
            UNITARY_TOL,
            True,
        ),
        _check("endpoint_start", operator_norm(path.matrices[0] - u_mat), ENDPOINT_TOL, True),
        _check("endpoint_end", operator_norm(path.matrices[-1] - eye), ENDPOINT_TOL, True),
        _check(
            "certificate_consistency",
            abs(sup_commutator - cert.sup_commutator),
            1e-12 * (1.0 + cert.sup_commutator),
            True,
        ),
    ]

    partition = build_partition(hermitian_eigen(h_mat), cert.delta)
    truncated = three_diagonal_truncate(u_mat, partition, block_structure(partition))
    checks.append(
        _check("truncation", operator_norm(u_mat - truncated), cert.thresholds.truncation, guaranteed)
    )

    if pre_path is not None:
        checks.append(
            _check(
                "unitary_distance",
                max(unitary_distance(m) for m in pre_path.matrices),
                cert.thresholds.stage3_distance,
                guaranteed,
            )
        )
        checks.append(
            _check(
                "retraction_gap",
                max(operator_norm(r - p) for r, p in zip(path.matrices, pre_path.matrices)),
                cert.thresholds.retraction_gap,
                guaranteed,
            )
        )

    notes = []
    if not guaranteed:
        notes.append("unguaranteed: delta is outside the small-delta regime, envelopes not enforced")
    if cert.delta_substituted:
        notes.append(
            f"delta {cert.delta_requested:.3e} replaced by the measured commutator {cert.delta:.3e}"
        )
    passed = all(c.passed for c in checks if c.enforced)
    for c in checks:
        if c.enforced and not c.passed:
            logger.warning("check %s failed: %.3e > %.3e", c.name, c.measured, c.threshold)
    return VerificationReport(checks=checks, passed=passed, guaranteed=guaranteed, notes=notes)


def path_profile(result: HomotopyResult, h: Union[HermitianOperator, np.ndarray]) -> pd.DataFrame:
    """Per-sample (t, commutator_norm, unitary_distance) for plotting"""
    h_mat = h.matrix if isinstance(h, HermitianOperator) else np.asarray(h, dtype=np.complex128)
    return pd.DataFrame(
        {
            "t": result.path.ts,
            "commutator_norm": [commutator_norm(m, h_mat) for m in result.path.matrices],
            "unitary_distance": [unitary_distance(m) for m in result.pre_path.matrices],
        }
    )

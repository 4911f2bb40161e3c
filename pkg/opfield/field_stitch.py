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

"""Diagonalize a sampled Hermitian field into ordered p x p eigenvalue blocks.

Per node the spectrum is snapped to the epsilon grid and grouped into
blocks (independent per node, optionally threaded). Frames are then
transported sequentially along the base; at every node where the snapped
spectrum changes, the frame mismatch is damped to the identity by a
short homotopy.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Optional

import numpy as np

from opfield.config import FIELD_TOL_FACTOR, GLUE_WINDOW_CELLS, WORKERS
from opfield.exceptions import OperatorInputError, RetractionError
from opfield.models import (
    CauchyCheck,
    DensityViolation,
    EigenDecomposition,
    EigenvalueField,
    GlueReport,
    HermitianOperator,
    IterationSummary,
    OperatorField,
    RefinementResult,
    RefinementSchedule,
    UnitaryOperator,
)
from opfield.homotopy import homotopy_constant
from opfield.utils.field_utils import (
    apply_glue,
    approx_finite_spectrum,
    block_jump,
    cauchy_bound,
    glue_breakpoint,
    group_eigenvalues,
    match_breakpoint,
    node_tolerance,
    ordering_holds,
    snap_values,
)
from opfield.utils.linalg_utils import commutator_norm, hermitian_eigen, operator_norm

logger = logging.getLogger(__name__)


def node_eigens(field: OperatorField, workers: int = WORKERS) -> list[EigenDecomposition]:
    """Eigendecomposition per node; threads only change wall time, not results"""
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(hermitian_eigen, field.values))
    return [hermitian_eigen(k) for k in field.values]


def _snapped(eig: EigenDecomposition, epsilon: float) -> EigenDecomposition:
    return EigenDecomposition(values=snap_values(eig.values, epsilon), frame=eig.frame)


def _density_violations(field: OperatorField, epsilon: float) -> list[DensityViolation]:
    violations = []
    for j in range(1, len(field.values)):
        distance = operator_norm(field.values[j].matrix - field.values[j - 1].matrix)
        if distance >= epsilon:
            violations.append(DensityViolation(node=j, distance=distance, epsilon=epsilon))
    if violations:
        logger.warning(
            "grid too coarse for epsilon=%.3e at %d node(s), first at node %d",
            epsilon,
            len(violations),
            violations[0].node,
        )
    return violations


def _glue(
    w: np.ndarray,
    values: np.ndarray,
    window: tuple[float, float],
    epsilon: float,
    node: int,
):
    """Run glue_breakpoint; a retraction failure becomes a failed report"""
    h_local = HermitianOperator(matrix=np.diag(values).astype(np.complex128))
    w_op = UnitaryOperator(matrix=w)
    try:
        glue = glue_breakpoint(
            w_op, h_local, window, FIELD_TOL_FACTOR * epsilon, epsilon=epsilon, node=node
        )
    except RetractionError as exc:
        logger.warning("glue at node %d failed: %s", node, exc)
        mismatch = commutator_norm(w_op, h_local)
        return None, GlueReport(
            node=node,
            window=window,
            mismatch_commutator=mismatch,
            sup_commutator=None,
            threshold=homotopy_constant(operator_norm(h_local)) * (2 * epsilon + mismatch) ** 0.25,
            guaranteed=False,
            failure=exc.detail,
        )
    return glue, glue.report


def _damp(glued: list, frames: list, glue, xs: list[float], start: int, end: int) -> None:
    """Multiply the frames of nodes start..end-1 by the glue path; a failed glue leaves them"""
    if glue is None:
        return
    span = range(start, end if end > start else start + 1)
    for j, value in zip(span, apply_glue([frames[j] for j in span], glue, [xs[j] for j in span])):
        glued[j] = value


def stitch_field(
    field: OperatorField,
    epsilon: float,
    reference: Optional[EigenvalueField] = None,
    eigs: Optional[list[EigenDecomposition]] = None,
) -> EigenvalueField:
    """Ordered eigenvalue blocks for every node of `field`.

    Args:
        field: grid-sampled Hermitian field
        epsilon: snapping grid and density tolerance
        reference: earlier result whose node-0 frame seeds the transport
        eigs: precomputed node eigendecompositions

    Returns:
        EigenvalueField; grid-density violations and failed glues are
        reported in it, not raised.
    """
    if not epsilon > 0:
        raise OperatorInputError(f"epsilon must be positive, got {epsilon}")
    eigs = eigs if eigs is not None else node_eigens(field)
    if len(eigs) != len(field.values):
        raise OperatorInputError("one eigendecomposition per node is required")

    nodes = len(field.values)
    xs = field.grid.tolist()
    snapped = [_snapped(eig, epsilon) for eig in eigs]
    snap_errors = [
        approx_finite_spectrum(k, epsilon, eig)[1] for k, eig in zip(field.values, eigs)
    ]
    violations = _density_violations(field, epsilon)

    # sequential frame transport
    frames = []
    current = snapped[0]
    if reference is not None:
        ref_values = np.concatenate([np.real(np.diag(c)) for c in reference.curves[:, 0]])
        ref_eig = EigenDecomposition(
            values=ref_values, frame=UnitaryOperator(matrix=reference.frames[0])
        )
        matched = match_breakpoint(
            HermitianOperator(matrix=ref_eig.reconstruct()),
            HermitianOperator(matrix=current.reconstruct()),
            field.p,
            eig_left=ref_eig,
            eig_right=current,
        )
        current = EigenDecomposition(values=current.values, frame=matched.aligned_frame)
    frames.append(current.frame.matrix)
    for j in range(1, nodes):
        right = snapped[j]
        matched = match_breakpoint(
            HermitianOperator(matrix=current.reconstruct()),
            HermitianOperator(matrix=right.reconstruct()),
            field.p,
            eig_left=current,
            eig_right=right,
        )
        current = EigenDecomposition(values=right.values, frame=matched.aligned_frame)
        frames.append(current.frame.matrix)

    breakpoints = [
        j for j in range(1, nodes) if not np.array_equal(snapped[j].values, snapped[j - 1].values)
    ]

    glued = [f.copy() for f in frames]
    glue_reports = []
    bounds = breakpoints + [nodes - 1]
    for idx, b in enumerate(breakpoints):
        end = min(b + GLUE_WINDOW_CELLS, bounds[idx + 1], nodes - 1)
        window = (xs[b], xs[end])
        w = frames[b].conj().T @ frames[b - 1]
        glue, report = _glue(w, snapped[b].values, window, epsilon, b)
        glue_reports.append(report)
        _damp(glued, frames, glue, xs, b, end)

    curves_per_node = [group_eigenvalues(s, field.p) for s in snapped]
    curves = np.array([[blk.matrix for blk in node] for node in curves_per_node]).transpose(1, 0, 2, 3)
    jumps = np.zeros(field.n)
    for j in range(1, nodes):
        jumps = np.maximum(jumps, block_jump(curves[:, j], curves[:, j - 1]))

    norms = [float(np.max(np.abs(eig.values))) for eig in eigs]
    ordering_ok = all(
        ordering_holds(blocks, node_tolerance(norm)) for blocks, norm in zip(curves_per_node, norms)
    )

    holonomy_jump = holonomy_commutator = None
    if field.base.kind == "circle":
        holonomy_jump = float(block_jump(curves[:, -1], curves[:, 0]).max())
        w = frames[0].conj().T @ frames[-1]
        end = min(GLUE_WINDOW_CELLS, breakpoints[0] if breakpoints else nodes - 1)
        # the seam is one more breakpoint: x_0 takes over the frame of x_M
        glue, report = _glue(w, snapped[0].values, (xs[0], xs[end]), epsilon, 0)
        glue_reports.append(report)
        _damp(glued, frames, glue, xs, 0, end)
        holonomy_commutator = report.mismatch_commutator
        logger.info(
            "circle seam: field mismatch %.3e, holonomy jump %.3e",
            field.seam_mismatch,
            holonomy_jump,
        )

    logger.info(
        "stitched %d nodes at epsilon=%.3e: %d breakpoint(s), max jump %.3e, %d density violation(s)",
        nodes,
        epsilon,
        len(breakpoints),
        float(jumps.max()) if jumps.size else 0.0,
        len(violations),
    )
    return EigenvalueField(
        base=field.base,
        grid=field.grid,
        p=field.p,
        n=field.n,
        epsilon=epsilon,
        curves=curves,
        frames=np.array(frames),
        glued_frames=np.array(glued),
        breakpoints=breakpoints,
        jump_report=jumps.tolist(),
        ordering_ok=ordering_ok,
        snap_errors=snap_errors,
        density_violations=violations,
        glue_reports=glue_reports,
        holonomy_jump=holonomy_jump,
        holonomy_commutator=holonomy_commutator,
    )


def refine_field(field: OperatorField, schedule: RefinementSchedule) -> RefinementResult:
    """Stitch at eps_0 > eps_1 > ... and check successive results are Cauchy"""
    eigs = node_eigens(field)
    c = homotopy_constant(max(operator_norm(k) for k in field.values))
    epsilons = schedule.epsilons

    previous: Optional[EigenvalueField] = None
    cauchy, summaries = [], []
    for m, epsilon in enumerate(epsilons):
        try:
            result = stitch_field(field, epsilon, reference=previous, eigs=eigs)
        except OperatorInputError as exc:
            raise OperatorInputError(f"refinement iteration {m}: {exc.detail}") from exc

        if previous is not None:
            delta = float(np.max(np.abs(result.curves - previous.curves)))
            bound = cauchy_bound(c, epsilons[m - 1], epsilon)
            cauchy.append(CauchyCheck(iteration=m, delta=delta, bound=bound, passed=delta <= bound))
            logger.info("refinement %d: cauchy delta %.3e (bound %.3e)", m, delta, bound)

        summaries.append(
            IterationSummary(
                iteration=m,
                epsilon=epsilon,
                max_snap_error=max(result.snap_errors),
                max_jump=result.max_jump,
                breakpoints=len(result.breakpoints),
                density_violations=len(result.density_violations),
            )
        )
        previous = result

    return RefinementResult(final=previous, cauchy=cauchy, iterations=summaries)

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
from typing import Union

import numpy as np
from scipy.linalg import schur, svd

from opfield.config import JACOBI_MAX_SWEEPS, JACOBI_TOL, POLAR_AUTO_FACTOR
from opfield.exceptions import OperatorInputError, SingularityError
from opfield.models import (
    EigenDecomposition,
    HermitianOperator,
    UnitaryOperator,
    as_complex_matrix,
)

logger = logging.getLogger(__name__)

MatrixLike = Union[np.ndarray, HermitianOperator, UnitaryOperator]

# coordinates below this magnitude count as zero when fixing eigenvector phases
_NONZERO = 1e-12


def as_square(a: MatrixLike, name: str = "matrix") -> np.ndarray:
    arr = as_complex_matrix(a, name)
    if arr.shape[0] != arr.shape[1]:
        raise OperatorInputError(f"{name} must be square, got shape {arr.shape}")
    return arr


def operator_norm(a: MatrixLike) -> float:
    """Largest singular value"""
    return float(np.linalg.norm(as_complex_matrix(a), 2))


def commutator_norm(a: MatrixLike, b: MatrixLike) -> float:
    x, y = as_square(a), as_square(b)
    return float(np.linalg.norm(x @ y - y @ x, 2))


def unitary_distance(a: MatrixLike) -> float:
    """Distance to the unitary group in operator norm: max |sigma_i - 1|"""
    sigma = np.linalg.svd(as_square(a), compute_uv=False)
    return float(np.max(np.abs(sigma - 1.0)))


def unitarity_error(a: MatrixLike) -> float:
    """||A*A - I||"""
    m = as_square(a)
    return float(np.linalg.norm(m.conj().T @ m - np.eye(m.shape[0]), 2))


def identity(n: int) -> UnitaryOperator:
    return UnitaryOperator(matrix=np.eye(n, dtype=np.complex128))


def _off_diagonal_norm(a: np.ndarray) -> float:
    return float(np.linalg.norm(a - np.diag(np.diag(a))))


def _jacobi_rotate(a: np.ndarray, v: np.ndarray, p: int, q: int) -> None:
    """Annihilate a[p, q] in place with one complex Jacobi rotation"""
    apq = a[p, q]
    r = abs(apq)
    if r == 0.0:
        return
    phase = np.conj(apq / r)
    theta = 0.5 * math.atan2(2.0 * r, (a[q, q] - a[p, p]).real)
    c, s = math.cos(theta), math.sin(theta)
    rot = np.array([[c, s], [-s * phase, c * phase]], dtype=np.complex128)
    idx = [p, q]
    a[:, idx] = a[:, idx] @ rot
    a[idx, :] = rot.conj().T @ a[idx, :]
    v[:, idx] = v[:, idx] @ rot
    a[p, q] = a[q, p] = 0.0
    a[p, p] = a[p, p].real
    a[q, q] = a[q, q].real


def _canonical_order(values: np.ndarray, vectors: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Sort descending; exact ties ordered by the phase-normalized vectors"""
    n = values.shape[0]
    vectors = vectors.copy()
    leads = []
    for k in range(n):
        col = vectors[:, k]
        lead = int(np.argmax(np.abs(col) > _NONZERO))
        vectors[:, k] = col * (abs(col[lead]) / col[lead])
        leads.append(lead)
    order = sorted(
        range(n),
        key=lambda k: (-values[k], leads[k], -abs(vectors[leads[k], k])),
    )
    return values[order], vectors[:, order]


def hermitian_eigen(
    h: MatrixLike,
    tol: float = JACOBI_TOL,
    max_sweeps: int = JACOBI_MAX_SWEEPS,
) -> EigenDecomposition:
    """Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi rotations.

    Args:
        h: Hermitian operator (a raw array is validated first)
        tol: stop once the off-diagonal Frobenius mass is at most tol * ||h||
        max_sweeps: sweep cap; hitting it logs a warning and returns the current iterate

    Returns:
        EigenDecomposition with values sorted non-increasing. The output is a
        deterministic function of the input.
    """
    if not isinstance(h, HermitianOperator):
        h = HermitianOperator(matrix=h)
    a = (h.matrix + h.matrix.conj().T) / 2
    n = a.shape[0]
    v = np.eye(n, dtype=np.complex128)
    target = tol * operator_norm(a)

    sweeps = 0
    while _off_diagonal_norm(a) > target:
        if sweeps == max_sweeps:
            logger.warning(
                "Jacobi sweep cap %d hit at dim %d, off-diagonal mass %.3e",
                max_sweeps,
                n,
                _off_diagonal_norm(a),
            )
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                _jacobi_rotate(a, v, p, q)
        sweeps += 1

    logger.debug("Jacobi converged in %d sweeps at dim %d", sweeps, n)
    values, vectors = _canonical_order(np.real(np.diag(a)).copy(), v)
    return EigenDecomposition(values=values, frame=UnitaryOperator(matrix=vectors))


def polar_unitary(a: MatrixLike, regularization: Union[float, str] = "auto") -> UnitaryOperator:
    """Unitary factor of the polar decomposition A = W P.

    Lifting singular values up to `regularization` leaves the unitary factor
    unchanged; it only decides whether A counts as invertible. The sentinel
    "auto" means 1e-12 * ||A||.
    """
    m = as_square(a)
    n = m.shape[0]
    left, sigma, right_h = svd(m, lapack_driver="gesvd")
    if regularization == "auto":
        reg = POLAR_AUTO_FACTOR * float(sigma[0])
    else:
        reg = float(regularization)
        if reg < 0:
            raise OperatorInputError(f"regularization must be nonnegative, got {reg}")
    floor = np.finfo(float).eps * n * float(sigma[0])
    if float(sigma[-1]) + reg <= floor:
        raise SingularityError("polar factor of a singular matrix", float(sigma[-1]))
    return UnitaryOperator(matrix=left @ right_h)


def unitary_geodesic(u: MatrixLike, t: float) -> UnitaryOperator:
    """exp(t log U) with eigenphases on the branch (-pi, pi]"""
    if not 0.0 <= t <= 1.0:
        raise OperatorInputError(f"t={t} outside [0, 1]")
    if not isinstance(u, UnitaryOperator):
        u = UnitaryOperator(matrix=u)
    if t == 0.0:
        return identity(u.dim)
    if t == 1.0:
        return u
    # a normal matrix has a diagonal complex Schur form
    triangular, z = schur(u.matrix, output="complex")
    phases = np.angle(np.diag(triangular))
    phases = np.where(phases <= -np.pi, np.pi, phases)
    return UnitaryOperator(matrix=(z * np.exp(1j * t * phases)) @ z.conj().T)

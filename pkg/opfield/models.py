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

"""Domain value types shared by every module.

Matrices are numpy arrays held by frozen pydantic models; arrays are copied
on construction and marked read-only, so a model never changes after it
has been validated.
"""

from typing import Literal, Optional

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from opfield.config import HERMITIAN_TOL, UNITARY_TOL
from opfield.exceptions import OperatorInputError

ComplexMatrix = npt.NDArray[np.complex128]


def as_complex_matrix(value, name: str = "matrix") -> np.ndarray:
    """Copy `value` into a finite 2-D complex array or raise OperatorInputError"""
    if isinstance(value, (HermitianOperator, UnitaryOperator)):
        value = value.matrix
    arr = np.array(value, dtype=np.complex128)
    if arr.ndim != 2 or 0 in arr.shape:
        raise OperatorInputError(f"{name} must be a non-empty 2-D matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise OperatorInputError(f"{name} has non-finite entries")
    return arr


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def _spectral_norm(arr: np.ndarray) -> float:
    return float(np.linalg.norm(arr, 2))


class FrozenModel(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)


class _SquareMatrix(FrozenModel):
    matrix: np.ndarray

    @field_validator("matrix", mode="before")
    @classmethod
    def _coerce_matrix(cls, value):
        arr = as_complex_matrix(value)
        if arr.shape[0] != arr.shape[1]:
            raise OperatorInputError(f"matrix must be square, got shape {arr.shape}")
        return _readonly(arr)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


class HermitianOperator(_SquareMatrix):
    """Self-adjoint matrix: the role of h in the homotopy and of K(x) in a field"""

    @model_validator(mode="after")
    def _check_hermitian(self):
        m = self.matrix
        asym = _spectral_norm(m - m.conj().T)
        if asym > HERMITIAN_TOL * _spectral_norm(m):
            raise OperatorInputError(f"matrix is not Hermitian: ||M - M*|| = {asym:.3e}")
        return self


class UnitaryOperator(_SquareMatrix):
    @model_validator(mode="after")
    def _check_unitary(self):
        m = self.matrix
        err = _spectral_norm(m.conj().T @ m - np.eye(m.shape[0]))
        if err > UNITARY_TOL:
            raise OperatorInputError(f"matrix is not unitary: ||U*U - I|| = {err:.3e}")
        return self


class EigenDecomposition(FrozenModel):
    """Eigenvalues sorted non-increasing with the eigenvector columns in `frame`"""

    values: np.ndarray
    frame: UnitaryOperator

    @field_validator("values", mode="before")
    @classmethod
    def _coerce_values(cls, value):
        arr = np.array(value, dtype=float).reshape(-1)
        if not np.all(np.isfinite(arr)):
            raise OperatorInputError("eigenvalues must be finite")
        if np.any(np.diff(arr) > 0):
            raise OperatorInputError("eigenvalues must be sorted non-increasing")
        return _readonly(arr)

    @model_validator(mode="after")
    def _check_sizes(self):
        if self.values.shape[0] != self.frame.dim:
            raise OperatorInputError(
                f"{self.values.shape[0]} eigenvalues for a frame of dim {self.frame.dim}"
            )
        return self

    @property
    def dim(self) -> int:
        return self.frame.dim

    def reconstruct(self, values: Optional[np.ndarray] = None) -> np.ndarray:
        """V diag(values) V*, by default with the decomposition's own values"""
        vals = self.values if values is None else np.asarray(values, dtype=float)
        v = self.frame.matrix
        return (v * vals) @ v.conj().T


# ----------------------------------------------------------------------------
# Spectral partition
# ----------------------------------------------------------------------------


class Segment(FrozenModel):
    index: int
    # position on the grid anchored at the lowest eigenvalue, empty cells included
    cell: int
    lo: float
    hi: float
    midpoint: float
    eigen_indices: list[int]

    @model_validator(mode="after")
    def _check_segment(self):
        if not self.eigen_indices:
            raise OperatorInputError(f"segment {self.index} holds no eigenvalue")
        if self.hi < self.lo:
            raise OperatorInputError(f"segment {self.index} has hi < lo")
        return self


class CoarseSegment(Segment):
    """A cell of length δ^(1/4) holding at least one eigenvalue"""


class FineSegment(Segment):
    """A cell of length δ holding at least one eigenvalue"""


class SpectralPartition(FrozenModel):
    delta: float
    quarter_root: float
    eigenvalues: np.ndarray
    coarse: list[CoarseSegment]
    fine: list[FineSegment]
    coarse_of: list[int]
    fine_of: list[int]
    q_frames: list[np.ndarray]
    separated_flags: list[bool]

    @field_validator("eigenvalues", mode="before")
    @classmethod
    def _coerce_eigenvalues(cls, value):
        return _readonly(np.array(value, dtype=float).reshape(-1))

    @field_validator("q_frames", mode="before")
    @classmethod
    def _coerce_frames(cls, value):
        return [_readonly(np.array(f, dtype=np.complex128)) for f in value]

    @property
    def m(self) -> int:
        return len(self.coarse)

    @property
    def N(self) -> int:
        return len(self.fine)

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]

    @property
    def spectral_length(self) -> float:
        return float(self.eigenvalues[0] - self.eigenvalues[-1])

    @property
    def h_norm(self) -> float:
        return float(np.max(np.abs(self.eigenvalues)))

    def midpoint_operator(self) -> HermitianOperator:
        """h' = sum_k mu_k q_k, the coarse-midpoint operator"""
        n = self.dim
        h_prime = np.zeros((n, n), dtype=np.complex128)
        for segment, frame in zip(self.coarse, self.q_frames):
            h_prime += segment.midpoint * (frame @ frame.conj().T)
        return HermitianOperator(matrix=(h_prime + h_prime.conj().T) / 2)


class SnappedOperator(FrozenModel):
    h_bar: HermitianOperator
    approximation_error: float
    delta: float

    @model_validator(mode="after")
    def _check_error(self):
        # the anchor eigenvalue sits on a cell edge, so equality is attained
        rounding = 16 * np.finfo(float).eps * (1.0 + _spectral_norm(self.h_bar.matrix))
        if self.approximation_error > 0.5 * self.delta * (1 + 1e-12) + rounding:
            raise OperatorInputError(
                f"||h - h_bar|| = {self.approximation_error:.3e} exceeds delta/2"
            )
        return self


class BlockStructure(FrozenModel):
    """Contiguous index ranges of the q_k blocks in the q-frame basis"""

    ranges: list[tuple[int, int]]
    frame: np.ndarray

    @field_validator("frame", mode="before")
    @classmethod
    def _coerce_frame(cls, value):
        return _readonly(np.array(value, dtype=np.complex128))

    @property
    def m(self) -> int:
        return len(self.ranges)

    @property
    def positions(self) -> dict[tuple[int, int], tuple[tuple[int, int], tuple[int, int]]]:
        return {
            (i, j): (self.ranges[i], self.ranges[j])
            for i in range(self.m)
            for j in range(self.m)
        }

    def block(self, i: int, j: int) -> tuple[slice, slice]:
        (r0, r1), (c0, c1) = self.ranges[i], self.ranges[j]
        return slice(r0, r1), slice(c0, c1)

    def span(self, i: int, j: int) -> slice:
        """Rows covering blocks i..j inclusive"""
        return slice(self.ranges[i][0], self.ranges[j][1])

    def to_frame(self, a: np.ndarray) -> np.ndarray:
        return self.frame.conj().T @ a @ self.frame

    def from_frame(self, a: np.ndarray) -> np.ndarray:
        return self.frame @ a @ self.frame.conj().T


# ----------------------------------------------------------------------------
# Homotopy
# ----------------------------------------------------------------------------


class OperatorPath(FrozenModel):
    """Sampled path t -> M(t) on [0, 1]"""

    ts: np.ndarray
    matrices: np.ndarray
    stage_marks: list[float]
    is_retracted: bool
    delta: float

    @field_validator("ts", mode="before")
    @classmethod
    def _coerce_ts(cls, value):
        return _readonly(np.array(value, dtype=float).reshape(-1))

    @field_validator("matrices", mode="before")
    @classmethod
    def _coerce_matrices(cls, value):
        arr = np.array(value, dtype=np.complex128)
        if arr.ndim != 3 or arr.shape[1] != arr.shape[2]:
            raise OperatorInputError(f"path samples must be square matrices, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise OperatorInputError("path samples have non-finite entries")
        return _readonly(arr)

    @model_validator(mode="after")
    def _check_path(self):
        ts = self.ts
        if ts.shape[0] != self.matrices.shape[0]:
            raise OperatorInputError("number of t values and samples differ")
        if ts.shape[0] < 2 or ts[0] != 0.0 or ts[-1] != 1.0:
            raise OperatorInputError("path must start at t=0 and end at t=1")
        if np.any(np.diff(ts) <= 0):
            raise OperatorInputError("path t values must be strictly increasing")
        if self.is_retracted:
            eye = np.eye(self.dim)
            for t, m in zip(ts, self.matrices):
                err = _spectral_norm(m.conj().T @ m - eye)
                if err > UNITARY_TOL:
                    raise OperatorInputError(
                        f"retracted sample at t={t:.6f} is not unitary ({err:.3e})"
                    )
        return self

    @property
    def dim(self) -> int:
        return self.matrices.shape[1]

    @property
    def samples(self) -> list[tuple[float, np.ndarray]]:
        return list(zip(self.ts.tolist(), self.matrices))

    def at(self, t: float) -> np.ndarray:
        """Value at t: a stored sample, or the (retracted) linear interpolant"""
        if not 0.0 <= t <= 1.0:
            raise OperatorInputError(f"t={t} outside [0, 1]")
        idx = int(np.searchsorted(self.ts, t))
        if idx < self.ts.shape[0] and abs(self.ts[idx] - t) <= 1e-15:
            return self.matrices[idx]
        if idx > 0 and abs(self.ts[idx - 1] - t) <= 1e-15:
            return self.matrices[idx - 1]
        t0, t1 = self.ts[idx - 1], self.ts[idx]
        w = (t - t0) / (t1 - t0)
        value = (1 - w) * self.matrices[idx - 1] + w * self.matrices[idx]
        if self.is_retracted:
            from opfield.utils.linalg_utils import polar_unitary

            value = polar_unitary(value, "auto").matrix
        return value


class HomotopyThresholds(FrozenModel):
    truncation: float
    stage3_distance: float
    retraction_gap: float
    commutator: float
    pre_commutator: float


class HomotopyCertificate(FrozenModel):
    delta: float
    delta_requested: float
    delta_substituted: bool
    h_norm: float
    C: float
    spectral_length: float
    C_centered: float
    branch: Literal["single_segment", "four_step"]
    m: int
    N: int
    samples_per_stage: int
    sup_commutator: float
    sup_pre_commutator: float
    sup_unitary_distance: float
    retraction_gap: float
    truncation_error: float
    stage_distances: list[float]
    stage_commutators: list[float]
    endpoint_error_start: float
    endpoint_error_end: float
    thresholds: HomotopyThresholds
    bounds_guaranteed: bool

    @model_validator(mode="after")
    def _check_nonnegative(self):
        measured = [
            self.sup_commutator,
            self.sup_pre_commutator,
            self.sup_unitary_distance,
            self.retraction_gap,
            self.truncation_error,
            self.endpoint_error_start,
            self.endpoint_error_end,
            *self.stage_distances,
            *self.stage_commutators,
        ]
        if any(value < 0 for value in measured):
            raise OperatorInputError("certificate holds a negative measurement")
        return self


class HomotopyResult(FrozenModel):
    pre_path: OperatorPath
    path: OperatorPath
    certificate: HomotopyCertificate


class CheckResult(FrozenModel):
    name: str
    measured: float
    threshold: float
    margin: float
    passed: bool
    enforced: bool


class VerificationReport(FrozenModel):
    checks: list[CheckResult]
    passed: bool
    guaranteed: bool
    notes: list[str] = []

    def check(self, name: str) -> CheckResult:
        return next(c for c in self.checks if c.name == name)


class NormBoundReport(FrozenModel):
    precondition_met: bool
    bound_holds: bool
    measured_norm: float
    bound: float
    row_norms: list[float]


class BlockRotation(FrozenModel):
    """The unitary family v(t) that pushes the (2, 1) block of a 2x2 block matrix to ~0.

    With alpha = a21 inv(a11_bar) = L diag(s) R*,

        v(t) = [[P(t), t P(t) alpha*], [-t Q(t) alpha, Q(t)]]

    where P(t) = (1 + t^2 alpha* alpha)^(-1/2) and Q(t) = (1 + t^2 alpha alpha*)^(-1/2),
    both evaluated through the one SVD of alpha.
    """

    split: int
    alpha: np.ndarray
    left: np.ndarray
    right_h: np.ndarray
    singular_values: np.ndarray
    residual: float
    epsilon: float

    @field_validator("alpha", "left", "right_h", mode="before")
    @classmethod
    def _coerce_complex(cls, value):
        return _readonly(np.array(value, dtype=np.complex128))

    @field_validator("singular_values", mode="before")
    @classmethod
    def _coerce_real(cls, value):
        return _readonly(np.array(value, dtype=float).reshape(-1))

    @property
    def dim(self) -> int:
        return self.split + self.alpha.shape[0]

    def _damping(self, size: int, t: float) -> np.ndarray:
        s2 = np.zeros(size)
        k = min(size, self.singular_values.shape[0])
        s2[:k] = self.singular_values[:k] ** 2
        return 1.0 / np.sqrt(1.0 + t * t * s2)

    def at(self, t: float) -> np.ndarray:
        n1 = self.split
        n2 = self.alpha.shape[0]
        r = self.right_h.conj().T
        p = (r * self._damping(n1, t)) @ self.right_h
        q = (self.left * self._damping(n2, t)) @ self.left.conj().T
        v = np.empty((n1 + n2, n1 + n2), dtype=np.complex128)
        v[:n1, :n1] = p
        v[:n1, n1:] = t * (p @ self.alpha.conj().T)
        v[n1:, :n1] = -t * (q @ self.alpha)
        v[n1:, n1:] = q
        return v

    @property
    def endpoint(self) -> UnitaryOperator:
        return UnitaryOperator(matrix=self.at(1.0))


# ----------------------------------------------------------------------------
# Operator fields over an interval or a circle
# ----------------------------------------------------------------------------


class BaseSpace(FrozenModel):
    kind: Literal["interval", "circle"]
    a: float
    b: float

    @model_validator(mode="after")
    def _check_endpoints(self):
        if not self.a < self.b:
            raise OperatorInputError(f"base endpoints must satisfy a < b, got [{self.a}, {self.b}]")
        return self


class OperatorField(FrozenModel):
    base: BaseSpace
    grid: np.ndarray
    p: int
    n: int
    values: list[HermitianOperator]

    @field_validator("grid", mode="before")
    @classmethod
    def _coerce_grid(cls, value):
        return _readonly(np.array(value, dtype=float).reshape(-1))

    @model_validator(mode="after")
    def _check_field(self):
        grid = self.grid
        if self.p < 1 or self.n < 1:
            raise OperatorInputError("fiber dim p and module rank n must be positive")
        if grid.shape[0] < 2 or np.any(np.diff(grid) <= 0):
            raise OperatorInputError("grid must be strictly increasing with at least two nodes")
        if not (np.isclose(grid[0], self.base.a) and np.isclose(grid[-1], self.base.b)):
            raise OperatorInputError("grid endpoints must meet the base endpoints")
        if len(self.values) != grid.shape[0]:
            raise OperatorInputError(f"{len(self.values)} values for {grid.shape[0]} grid nodes")
        dims = {value.dim for value in self.values}
        if dims != {self.n * self.p}:
            raise OperatorInputError(
                f"field values must all have dim n*p = {self.n * self.p}, got {sorted(dims)}"
            )
        return self

    @property
    def dim(self) -> int:
        return self.n * self.p

    @property
    def seam_mismatch(self) -> float:
        """||K(x_0) - K(x_M)||, recorded for circle bases"""
        return _spectral_norm(self.values[0].matrix - self.values[-1].matrix)


class DensityViolation(FrozenModel):
    node: int
    distance: float
    epsilon: float


class GlueReport(FrozenModel):
    node: int
    window: tuple[float, float]
    mismatch_commutator: float
    sup_commutator: Optional[float]
    threshold: float
    guaranteed: bool
    failure: Optional[str] = None


class EigenvalueField(FrozenModel):
    """Ordered p x p "eigenvalue" blocks per grid node, in their own eigenbasis"""

    base: BaseSpace
    grid: np.ndarray
    p: int
    n: int
    epsilon: float
    curves: np.ndarray
    frames: np.ndarray
    breakpoints: list[int]
    jump_report: list[float]
    ordering_ok: bool
    snap_errors: list[float]
    density_violations: list[DensityViolation]
    glued_frames: np.ndarray
    glue_reports: list[GlueReport]
    holonomy_jump: Optional[float] = None
    holonomy_commutator: Optional[float] = None

    @field_validator("grid", mode="before")
    @classmethod
    def _coerce_grid(cls, value):
        return _readonly(np.array(value, dtype=float).reshape(-1))

    @field_validator("curves", "frames", "glued_frames", mode="before")
    @classmethod
    def _coerce_arrays(cls, value):
        return _readonly(np.array(value, dtype=np.complex128))

    @property
    def scalar_curves(self) -> np.ndarray:
        """Real diagonals, shape (n, nodes, p)"""
        return np.real(np.diagonal(self.curves, axis1=2, axis2=3))

    @property
    def max_jump(self) -> float:
        return max(self.jump_report) if self.jump_report else 0.0


class RefinementSchedule(FrozenModel):
    eps0: float
    ratio: float
    iterations: int

    @model_validator(mode="after")
    def _check_schedule(self):
        if self.eps0 <= 0:
            raise OperatorInputError("eps0 must be positive")
        if not 0 < self.ratio < 1:
            raise OperatorInputError("ratio must lie in (0, 1)")
        if self.iterations < 1:
            raise OperatorInputError("iterations must be positive")
        return self

    @property
    def epsilons(self) -> list[float]:
        return [self.eps0 * self.ratio**m for m in range(self.iterations)]

    @property
    def quarter_root_series(self) -> float:
        """Partial sum of (eps_{m-1} + eps_m)^(1/4); converges since ratio < 1"""
        eps = self.epsilons
        return float(sum((eps[m - 1] + eps[m]) ** 0.25 for m in range(1, len(eps))))


class CauchyCheck(FrozenModel):
    iteration: int
    delta: float
    bound: float
    passed: bool


class IterationSummary(FrozenModel):
    iteration: int
    epsilon: float
    max_snap_error: float
    max_jump: float
    breakpoints: int
    density_violations: int


class RefinementResult(FrozenModel):
    final: EigenvalueField
    cauchy: list[CauchyCheck]
    iterations: list[IterationSummary]

    @property
    def cauchy_deltas(self) -> list[float]:
        return [check.delta for check in self.cauchy]


# ----------------------------------------------------------------------------
# Instance generation
# ----------------------------------------------------------------------------


class SpectrumSpec(FrozenModel):
    kind: Literal["explicit", "uniform", "clustered"] = "uniform"
    values: Optional[list[float]] = None
    low: float = -1.0
    high: float = 1.0
    clusters: int = 2
    spread: float = 0.0

    @model_validator(mode="after")
    def _check_spectrum(self):
        if self.kind == "explicit" and not self.values:
            raise OperatorInputError("explicit spectrum needs a list of values")
        if self.low > self.high:
            raise OperatorInputError("spectrum range needs low <= high")
        if self.clusters < 1 or self.spread < 0:
            raise OperatorInputError("clusters must be positive and spread nonnegative")
        return self


FieldShape = Literal["constant", "conjugated-smooth", "avoided-crossing", "exact-crossing"]


class GeneratorSpec(FrozenModel):
    """Everything a generator needs; identical specs give bit-identical instances"""

    seed: int = 0
    dim: Optional[int] = None
    n: Optional[int] = None
    p: Optional[int] = None
    spectrum: SpectrumSpec = SpectrumSpec()
    target_delta: float = 1e-6
    theta: float = 1.0
    field_shape: FieldShape = "constant"
    coupling: float = 0.1
    winding: int = 1
    base: BaseSpace = BaseSpace(kind="interval", a=-1.0, b=1.0)
    grid_size: int = 101

    @model_validator(mode="after")
    def _check_spec(self):
        if not 0 <= self.seed < 2**64:
            raise OperatorInputError("seed must be a 64-bit unsigned integer")
        if self.dim is None and self.n is None:
            raise OperatorInputError("give either dim or (n, p)")
        if self.dim is not None and self.dim < 1:
            raise OperatorInputError("dim must be positive")
        if self.n is not None and (self.n < 1 or (self.p or 1) < 1):
            raise OperatorInputError("n and p must be positive")
        if self.dim is not None and self.n is not None and self.dim != self.n * (self.p or 1):
            raise OperatorInputError(f"dim {self.dim} disagrees with n*p")
        if self.target_delta < 0:
            raise OperatorInputError("target_delta must be nonnegative")
        if self.grid_size < 2:
            raise OperatorInputError("grid_size must be at least 2")
        return self

    @property
    def fiber_dim(self) -> int:
        return self.p or 1

    @property
    def module_rank(self) -> int:
        return self.n if self.n is not None else self.dim

    @property
    def total_dim(self) -> int:
        return self.dim if self.dim is not None else self.n * self.fiber_dim

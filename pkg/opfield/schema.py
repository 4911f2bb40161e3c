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
import os
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, field_validator, model_validator

from opfield.models import (
    BaseSpace,
    EigenvalueField,
    HermitianOperator,
    HomotopyCertificate,
    OperatorField,
    OperatorPath,
    RefinementSchedule,
    VerificationReport,
)


class MatrixFile(BaseModel):
    rows: int
    cols: int
    entries: list[tuple[float, float]]

    @model_validator(mode="after")
    def _check_entries(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError("rows and cols must be positive")
        if len(self.entries) != self.rows * self.cols:
            raise ValueError(
                f"expected {self.rows * self.cols} entries for a {self.rows}x{self.cols} matrix, "
                f"got {len(self.entries)}"
            )
        if not all(math.isfinite(re) and math.isfinite(im) for re, im in self.entries):
            raise ValueError("matrix entries must be finite")
        return self

    def to_array(self) -> np.ndarray:
        flat = np.array(self.entries, dtype=float)
        return (flat[:, 0] + 1j * flat[:, 1]).reshape(self.rows, self.cols)

    @classmethod
    def from_array(cls, a: np.ndarray) -> "MatrixFile":
        a = np.asarray(a, dtype=np.complex128)
        return cls(
            rows=a.shape[0],
            cols=a.shape[1],
            entries=[(float(z.real), float(z.imag)) for z in a.reshape(-1)],
        )


class PathSample(BaseModel):
    t: float
    matrix: MatrixFile


class PathFile(BaseModel):
    delta: float
    stage_marks: list[float]
    is_retracted: bool = True
    samples: list[PathSample]

    def to_path(self, check_unitarity: bool = True) -> OperatorPath:
        """Build the path; with check_unitarity=False a retracted path is loaded
        as is, so a verifier can report non-unitary samples itself."""
        path = OperatorPath(
            ts=[s.t for s in self.samples],
            matrices=[s.matrix.to_array() for s in self.samples],
            stage_marks=self.stage_marks,
            is_retracted=self.is_retracted and check_unitarity,
            delta=self.delta,
        )
        if path.is_retracted != self.is_retracted:
            path = path.model_copy(update={"is_retracted": self.is_retracted})
        return path

    @classmethod
    def from_path(cls, path: OperatorPath) -> "PathFile":
        return cls(
            delta=path.delta,
            stage_marks=path.stage_marks,
            is_retracted=path.is_retracted,
            samples=[
                PathSample(t=t, matrix=MatrixFile.from_array(m)) for t, m in path.samples
            ],
        )


class CertificateFile(BaseModel):
    certificate: HomotopyCertificate
    verification: Optional[VerificationReport] = None


class FieldFile(BaseModel):
    base: BaseSpace
    p: int
    n: int
    grid: list[float]
    values: list[MatrixFile]

    def to_field(self) -> OperatorField:
        return OperatorField(
            base=self.base,
            grid=self.grid,
            p=self.p,
            n=self.n,
            values=[HermitianOperator(matrix=v.to_array()) for v in self.values],
        )

    @classmethod
    def from_field(cls, field: OperatorField) -> "FieldFile":
        return cls(
            base=field.base,
            p=field.p,
            n=field.n,
            grid=field.grid.tolist(),
            values=[MatrixFile.from_array(k.matrix) for k in field.values],
        )


class EigenvalueFieldFile(BaseModel):
    base: BaseSpace
    p: int
    n: int
    epsilon: float
    grid: list[float]
    breakpoints: list[int]
    ordering_ok: bool
    curves: list[list[MatrixFile]]

    @classmethod
    def from_result(cls, result: EigenvalueField) -> "EigenvalueFieldFile":
        return cls(
            base=result.base,
            p=result.p,
            n=result.n,
            epsilon=result.epsilon,
            grid=result.grid.tolist(),
            breakpoints=result.breakpoints,
            ordering_ok=result.ordering_ok,
            curves=[[MatrixFile.from_array(block) for block in curve] for curve in result.curves],
        )


class JumpReportFile(BaseModel):
    epsilon: float
    jump_report: list[float]
    max_jump: float
    snap_errors: list[float]
    density_violations: list[dict]
    glue_reports: list[dict]
    holonomy_jump: Optional[float] = None
    holonomy_commutator: Optional[float] = None
    seam_mismatch: Optional[float] = None

    @classmethod
    def from_result(cls, result: EigenvalueField, field: OperatorField) -> "JumpReportFile":
        return cls(
            epsilon=result.epsilon,
            jump_report=result.jump_report,
            max_jump=result.max_jump,
            snap_errors=result.snap_errors,
            density_violations=[v.model_dump() for v in result.density_violations],
            glue_reports=[g.model_dump() for g in result.glue_reports],
            holonomy_jump=result.holonomy_jump,
            holonomy_commutator=result.holonomy_commutator,
            seam_mismatch=field.seam_mismatch if field.base.kind == "circle" else None,
        )


def parse_schedule(text: str) -> RefinementSchedule:
    """'eps0:ratio:iters' -> RefinementSchedule"""
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"schedule must look like eps0:ratio:iters, got {text!r}")
    return RefinementSchedule(eps0=float(parts[0]), ratio=float(parts[1]), iterations=int(parts[2]))


class RunConfig(BaseModel):
    command: Literal["homotopy", "stitch", "refine", "gen", "verify"]
    inputs: dict[str, str] = {}
    out: str
    delta: Optional[float] = None
    epsilon: Optional[float] = None
    schedule: Optional[str] = None
    samples_per_stage: Optional[int] = None
    seed: Optional[int] = None
    emit_csv: bool = False
    log_level: str = "INFO"

    @field_validator("inputs")
    @classmethod
    def _inputs_exist(cls, value: dict[str, str]) -> dict[str, str]:
        for role, path in value.items():
            if not os.path.isfile(path):
                raise ValueError(f"{role} file not found: {path}")
        return value

    @model_validator(mode="after")
    def _check_parameters(self):
        for name in ("delta", "epsilon"):
            value = getattr(self, name)
            if value is not None and not (value > 0 and math.isfinite(value)):
                raise ValueError(f"{name} must be positive, got {value}")
        if self.samples_per_stage is not None and self.samples_per_stage < 1:
            raise ValueError("samples must be positive")
        if self.seed is not None and not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.schedule is not None:
            parse_schedule(self.schedule)
        return self

    @property
    def refinement(self) -> RefinementSchedule:
        return parse_schedule(self.schedule)

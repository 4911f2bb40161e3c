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

from typing import Optional

EXIT_INPUT = 1
EXIT_BOUND = 2
EXIT_DENSITY = 3


class OpfieldError(Exception):
    """Base error; `exit_code` is what the CLI returns for it"""

    exit_code = EXIT_INPUT

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


class OperatorInputError(OpfieldError, ValueError):
    """Input violates a type invariant or an operation precondition"""


class SingularityError(OpfieldError, ArithmeticError):
    exit_code = EXIT_BOUND

    def __init__(self, detail: str, singular_value: float):
        super().__init__(f"{detail} (smallest singular value {singular_value:.3e})")
        self.singular_value = singular_value


class RetractionError(OpfieldError):
    """A pre-retraction homotopy sample has no well-defined polar factor"""

    exit_code = EXIT_BOUND

    def __init__(self, stage: int, t: float, cause: Optional[Exception] = None):
        message = f"retraction failed in stage {stage} at t={t:.6f}"
        if cause is not None:
            message += f": {cause}"
        super().__init__(message)
        self.stage = stage
        self.t = t


class GenerationError(OpfieldError):
    pass


class FileFormatError(OpfieldError):
    """Malformed artifact file; `detail` carries line context when known"""

    def __init__(
        self,
        path: str,
        message: str,
        line: Optional[int] = None,
        column: Optional[int] = None,
        source_line: Optional[str] = None,
    ):
        location = f"{path}"
        if line is not None:
            location += f":{line}:{column}"
        detail = f"{location}: {message}"
        if source_line is not None:
            detail += f"\n    {source_line}"
            if column is not None:
                detail += "\n    " + " " * max(column - 1, 0) + "^"
        super().__init__(detail)
        self.path = path
        self.line = line
        self.column = column

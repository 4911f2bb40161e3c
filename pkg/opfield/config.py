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

import os

from dotenv import load_dotenv

# Load environment variables
load_dotenv()

ENV_PREFIX = "OPFIELD_"


def _env_float(name: str, default: float) -> float:
    return float(os.getenv(ENV_PREFIX + name, default))


def _env_int(name: str, default: int) -> int:
    return int(os.getenv(ENV_PREFIX + name, default))


# Type invariants
HERMITIAN_TOL = _env_float("HERMITIAN_TOL", 1e-12)
UNITARY_TOL = _env_float("UNITARY_TOL", 1e-10)
EIG_TOL = _env_float("EIG_TOL", 1e-12)

# Cyclic Jacobi eigensolver
JACOBI_TOL = _env_float("JACOBI_TOL", 1e-14)
JACOBI_MAX_SWEEPS = _env_int("JACOBI_MAX_SWEEPS", 60)

# Homotopy construction
SAMPLES_PER_STAGE = _env_int("SAMPLES_PER_STAGE", 64)
STAGE2_EPS_FACTOR = _env_float("STAGE2_EPS_FACTOR", 1e-3)
POLAR_AUTO_FACTOR = _env_float("POLAR_AUTO_FACTOR", 1e-12)
ENDPOINT_TOL = _env_float("ENDPOINT_TOL", 1e-10)

# Field stitching
GLUE_SAMPLES_PER_STAGE = _env_int("GLUE_SAMPLES_PER_STAGE", 8)
GLUE_WINDOW_CELLS = _env_int("GLUE_WINDOW_CELLS", 1)
FIELD_TOL_FACTOR = _env_float("FIELD_TOL_FACTOR", 1e-9)
WORKERS = _env_int("WORKERS", 1)

# Instance generation
BISECTION_MAX_ITER = _env_int("BISECTION_MAX_ITER", 64)

# CLI defaults (flags and OPFIELD_* variables override these)
DEFAULT_DELTA = 1e-6
DEFAULT_EPSILON = 1e-2
DEFAULT_SCHEDULE = "1e-2:0.0625:4"
DEFAULT_SEED = 0
DEFAULT_OUT = "out"

LOG_LEVEL = os.getenv(ENV_PREFIX + "LOG_LEVEL", "INFO")

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

"""Seeded test instances.

Randomness comes from SplitMix64, fixed by its recurrence

    state <- state + 0x9E3779B97F4A7C15  (mod 2^64)
    z <- state
    z <- (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9  (mod 2^64)
    z <- (z ^ (z >> 27)) * 0x94D049BB133111EB  (mod 2^64)
    output z ^ (z >> 31)

Uniforms take the top 53 bits of an output; normals use Box-Muller on
consecutive uniforms. Any implementation of the recurrence reproduces the
same instances.
"""

import logging
import math

import numpy as np
from scipy.linalg import expm, qr

from opfield.config import BISECTION_MAX_ITER
from opfield.exceptions import GenerationError, OperatorInputError
from opfield.models import GeneratorSpec, HermitianOperator, OperatorField, UnitaryOperator
from opfield.utils.linalg_utils import commutator_norm

logger = logging.getLogger(__name__)

MASK64 = (1 << 64) - 1

# beyond this the perturbation dominates S_c and doubling stops
MAX_ETA = 1e3


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def uniform(self) -> float:
        """Uniform on [0, 1)"""
        return (self.next_u64() >> 11) * 2.0**-53

    def uniforms(self, count: int) -> np.ndarray:
        return np.array([self.uniform() for _ in range(count)])

    def normals(self, count: int) -> np.ndarray:
        out = []
        while len(out) < count:
            u1 = 1.0 - self.uniform()
            u2 = self.uniform()
            radius = math.sqrt(-2.0 * math.log(u1))
            out.append(radius * math.cos(2.0 * math.pi * u2))
            out.append(radius * math.sin(2.0 * math.pi * u2))
        return np.array(out[:count])

    def complex_normals(self, rows: int, cols: int) -> np.ndarray:
        re = self.normals(rows * cols).reshape(rows, cols)
        im = self.normals(rows * cols).reshape(rows, cols)
        return (re + 1j * im) / math.sqrt(2.0)


def haar_unitary(rng: SplitMix64, n: int) -> np.ndarray:
    """QR of a complex Ginibre matrix with the phases of diag(R) divided out"""
    q, r = qr(rng.complex_normals(n, n))
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_hermitian(rng: SplitMix64, n: int) -> np.ndarray:
    g = rng.complex_normals(n, n)
    s = (g + g.conj().T) / 2
    return s / np.linalg.norm(s, 2)


def gen_spectrum(spec: GeneratorSpec, rng: SplitMix64) -> np.ndarray:
    """Eigenvalues sorted non-increasing"""
    dim = spec.total_dim
    shape = spec.spectrum
    if shape.kind == "explicit":
        values = np.array(shape.values, dtype=float)
        if values.shape[0] != dim:
            raise OperatorInputError(f"{values.shape[0]} explicit eigenvalues for dim {dim}")
    elif shape.kind == "uniform":
        values = shape.low + (shape.high - shape.low) * rng.uniforms(dim)
    else:
        centers = np.linspace(shape.low, shape.high, shape.clusters)
        jitter = shape.spread * (rng.uniforms(dim) - 0.5)
        values = np.array([centers[i % shape.clusters] for i in range(dim)]) + jitter
    return np.sort(values)[::-1]


def _conjugate(v: np.ndarray, values: np.ndarray) -> np.ndarray:
    m = (v * values) @ v.conj().T
    return (m + m.conj().T) / 2


def gen_almost_commuting_pair(spec: GeneratorSpec) -> tuple[HermitianOperator, UnitaryOperator, float]:
    """h with the requested spectrum and u = exp(i theta (S_c + eta S_p)) with ||[u, h]|| in [target/2, target].

    S_c shares the eigenvectors of h and S_p is a random Hermitian
    perturbation of norm one; eta is found by doubling then bisection.
    """
    rng = SplitMix64(spec.seed)
    dim = spec.total_dim
    values = gen_spectrum(spec, rng)
    v = haar_unitary(rng, dim)
    h = _conjugate(v, values)
    s_c = _conjugate(v, rng.normals(dim))
    s_p = random_hermitian(rng, dim)

    def unitary(eta: float) -> np.ndarray:
        return expm(1j * spec.theta * (s_c + eta * s_p))

    def commutator(eta: float) -> float:
        return commutator_norm(unitary(eta), h)

    target = spec.target_delta
    eta = 0.0
    if target > 0:
        if values[0] - values[-1] <= 1e-14 * max(1.0, float(np.max(np.abs(values)))):
            raise GenerationError(
                "a scalar h commutes with every unitary; use a spectrum with distinct eigenvalues"
            )
        lo, hi = 0.0, target
        for _ in range(BISECTION_MAX_ITER):
            if commutator(hi) >= 0.5 * target:
                break
            if hi > MAX_ETA:
                raise GenerationError(
                    f"no eta up to {MAX_ETA:g} reaches ||[u, h]|| >= {0.5 * target:.3e}; "
                    "lower target_delta or widen the spectrum"
                )
            lo, hi = hi, 2.0 * hi
        else:
            raise GenerationError(
                f"could not reach ||[u, h]|| >= {0.5 * target:.3e}; "
                "use a spectrum with distinct eigenvalues or a smaller target_delta"
            )
        eta = hi
        for _ in range(BISECTION_MAX_ITER):
            value = commutator(eta)
            if 0.5 * target <= value <= target:
                break
            if value < 0.5 * target:
                lo = eta
            else:
                hi = eta
            eta = 0.5 * (lo + hi)
        else:
            raise GenerationError(
                f"bisection did not land in [{0.5 * target:.3e}, {target:.3e}]; "
                "try another seed or theta"
            )

    u = unitary(eta)
    measured = commutator_norm(u, h)
    logger.debug("pair seed=%d dim=%d eta=%.3e measured delta=%.3e", spec.seed, dim, eta, measured)
    return HermitianOperator(matrix=h), UnitaryOperator(matrix=u), measured


def gen_field(spec: GeneratorSpec) -> OperatorField:
    """Sampled Hermitian field of shape `spec.field_shape` on `spec.base`"""
    rng = SplitMix64(spec.seed)
    n, p = spec.module_rank, spec.fiber_dim
    dim = n * p
    base = spec.base
    grid = np.linspace(base.a, base.b, spec.grid_size)

    if spec.field_shape == "constant":
        k0 = _conjugate(haar_unitary(rng, dim), gen_spectrum(spec, rng))
        values = [k0 for _ in grid]
    elif spec.field_shape == "conjugated-smooth":
        k0 = _conjugate(haar_unitary(rng, dim), gen_spectrum(spec, rng))
        r = haar_unitary(rng, dim)
        freqs = np.floor(rng.uniforms(dim) * (2 * spec.winding + 1)) - spec.winding
        values = []
        for x in grid:
            s = (x - base.a) / (base.b - base.a)
            v = (r * np.exp(2j * math.pi * freqs * s)) @ r.conj().T
            m = v @ k0 @ v.conj().T
            values.append((m + m.conj().T) / 2)
    elif spec.field_shape == "avoided-crossing":
        if dim % 2:
            raise OperatorInputError(f"avoided-crossing needs an even n*p, got {dim}")
        c = spec.coupling
        values = [
            np.kron(np.eye(dim // 2), np.array([[x, c], [c, -x]], dtype=np.complex128))
            for x in grid
        ]
    else:
        if dim % 2:
            raise OperatorInputError(f"exact-crossing needs an even n*p, got {dim}")
        r = haar_unitary(rng, dim)
        values = [_conjugate(r, np.kron(np.ones(dim // 2), np.array([x, -x]))) for x in grid]

    return OperatorField(
        base=base,
        grid=grid,
        p=p,
        n=n,
        values=[HermitianOperator(matrix=k) for k in values],
    )

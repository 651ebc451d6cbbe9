"""
This file is part of decolab.
Copyright 2024-present decolab contributors.

decolab is free software: you can redistribute it and/or modify it under the terms of the
Affero GNU General Public License as published by the Free Software Foundation, either
version 3 of the License, or (at your option) any later version.

decolab is distributed in the hope that it will be useful, but WITHOUT ANY WARRANTY;
without even the implied warranty of MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.
See the Affero GNU General Public License for more details.

You should have received a copy of the Affero GNU General Public License along with decolab.
If not, see <https://www.gnu.org/licenses/>.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np
import pandas as pd

from decolab.errors import InvalidParameterError
from decolab.models.spectrum import BandlimitedFunction
from decolab.numerics.bandlimited import position
from decolab.numerics.quantum_core import CompositeDensity, PointerGrid, SystemObservable, SystemState
from decolab.tooling import get_logger

__all__ = (
    "VonNeumannModel",
    "premeasurement_density",
    "postulated_reduction",
    "gaussian_coherence_factor",
    "log_gaussian_coherence_factor",
    "gaussian_factor_table",
)
logger = get_logger("Decolab.Numerics.VonNeumann")

METER_NORM_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class VonNeumannModel:
    """
    Two-body measurement driven by ``lam * A (x) B``.

    ``meter0`` holds the samples of the initial meter state on ``grid``, normalized under the grid weights.
    """

    hbar: float
    lam: float
    observable: SystemObservable
    state: SystemState
    grid: PointerGrid
    meter0: np.ndarray

    def __post_init__(self):
        if not self.hbar > 0:
            raise InvalidParameterError("hbar", self.hbar, "must be positive")
        if not self.lam >= 0:
            raise InvalidParameterError("lam", self.lam, "coupling cannot be negative")
        if self.observable.dimension != self.state.dimension:
            raise InvalidParameterError(
                "state", self.state.dimension, f"observable has {self.observable.dimension} eigenvalues"
            )
        meter = np.array(self.meter0, dtype=np.complex128, copy=True)
        if meter.shape != (self.grid.size,):
            raise InvalidParameterError("meter0", meter.shape, "meter samples must match the pointer grid")
        norm = float(np.sum(self.grid.weights * np.abs(meter) ** 2))
        if abs(norm - 1.0) > METER_NORM_TOL:
            raise InvalidParameterError("meter0", norm, "meter state is not normalized under the grid weights")
        meter.setflags(write=False)
        object.__setattr__(self, "meter0", meter)

    @classmethod
    def from_bandlimited(
        cls,
        hbar: float,
        lam: float,
        observable: SystemObservable,
        state: SystemState,
        pointer0: BandlimitedFunction,
        grid: PointerGrid,
    ) -> VonNeumannModel:
        samples = np.asarray(position(pointer0, grid.points), dtype=np.complex128)
        mass = float(np.sum(grid.weights * np.abs(samples) ** 2))
        logger.debug(f"meter mass inside [-{grid.half_width:.6g}, {grid.half_width:.6g}]: {mass:.12f}")
        return cls(hbar, lam, observable, state, grid, samples / np.sqrt(mass))

    def branches(self) -> np.ndarray:
        """``c_k phi_k(b_i)`` with ``phi_k(b) = exp(i lam a_k b / hbar) phi0(b)``, shape ``(N, P)``."""
        phase = np.exp(1j * self.lam / self.hbar * np.multiply.outer(self.observable.eigenvalues, self.grid.points))
        return self.state.amps[:, None] * phase * self.meter0[None, :]


def premeasurement_density(m: VonNeumannModel) -> CompositeDensity:
    psi = m.branches()
    blocks = np.einsum("ki,lj->klij", psi, np.conj(psi))
    return CompositeDensity(m.grid, blocks)


@lru_cache(maxsize=1)
def _warn_reduction_index() -> None:
    logger.warning(
        "The textbook reduction pairs |phi_k><phi_l| with |c_k|^2; using the diagonal mixture |phi_k><phi_k| instead"
    )


def postulated_reduction(rho: CompositeDensity) -> CompositeDensity:
    """Zero every off-diagonal system block, keeping the diagonal blocks bit for bit."""
    _warn_reduction_index()
    reduced = np.zeros_like(rho.blocks)
    for k in range(rho.dimension):
        reduced[k, k] = rho.blocks[k, k]
    return CompositeDensity(rho.grid, reduced)


def _check_oscillator(mu: float, omega: float, hbar: float) -> None:
    for name, value in (("mu", mu), ("omega", omega), ("hbar", hbar)):
        if not value > 0:
            raise InvalidParameterError(name, value, "must be positive")


def log_gaussian_coherence_factor(alpha: float, a_k: float, a_l: float, mu: float, omega: float, hbar: float) -> float:
    """``-alpha^2 (a_k - a_l)^2 / (4 mu omega hbar)``; finite for every finite coupling."""
    _check_oscillator(mu, omega, hbar)
    return -(alpha**2) * (a_k - a_l) ** 2 / (4.0 * mu * omega * hbar)


def gaussian_coherence_factor(alpha: float, a_k: float, a_l: float, mu: float, omega: float, hbar: float) -> float:
    """
    Coherence suppression left by a harmonic-oscillator ground-state probe.

    The factor is positive for every finite ``alpha``; in double precision it underflows to zero once the
    exponent drops below about -745, so compare :func:`log_gaussian_coherence_factor` for strong couplings.
    """
    return float(np.exp(log_gaussian_coherence_factor(alpha, a_k, a_l, mu, omega, hbar)))


def gaussian_factor_table(
    alphas: Sequence[float], delta_a: float, mu: float = 1.0, omega: float = 1.0, hbar: float = 1.0
) -> pd.DataFrame:
    rows = []
    for alpha in alphas:
        log_factor = log_gaussian_coherence_factor(alpha, delta_a, 0.0, mu, omega, hbar)
        rows.append(
            {
                "alpha": float(alpha),
                "delta_a": float(delta_a),
                "factor": float(np.exp(log_factor)),
                "log_factor": log_factor,
            }
        )
    return pd.DataFrame(rows, columns=["alpha", "delta_a", "factor", "log_factor"])

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
from typing import Any, Sequence

import numpy as np
import orjson

from decolab.errors import (
    CoverageError,
    DegeneracyError,
    GridMismatchError,
    IndexOutOfRangeError,
    InvalidParameterError,
    NumericalContractError,
)
from decolab.models.spectrum import BandlimitedFunction
from decolab.numerics.bandlimited import mass_within
from decolab.numerics.quadrature import gauss_legendre
from decolab.tooling import get_logger
from decolab.utils import split_complex

__all__ = (
    "SystemObservable",
    "SystemState",
    "PointerGrid",
    "OperatorKernel",
    "CompositeDensity",
    "min_gap",
    "hs_inner",
    "hs_norm",
    "kernel_compose",
    "kernel_trace",
    "identity_kernel",
    "weighted_matrix",
    "min_eigenvalue",
)
logger = get_logger("Decolab.Numerics.QuantumCore")

STATE_NORM_TOL = 1e-12
HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-8
PSD_FLOOR = -1e-8


def _readonly(arr: Any, dtype) -> np.ndarray:
    out = np.array(arr, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


def min_gap(obs: SystemObservable | Sequence[float]) -> float:
    """
    Smallest positive difference between eigenvalues, ``a0``.

    Raises
    ------
    DegeneracyError
        When two eigenvalues coincide.
    InvalidParameterError
        When there are fewer than two eigenvalues.
    """
    values = np.sort(np.asarray(obs.eigenvalues if isinstance(obs, SystemObservable) else obs, dtype=np.float64))
    if values.size < 2:
        raise InvalidParameterError("eigenvalues", values.tolist(), "a gap needs at least two eigenvalues")
    gaps = np.diff(values)
    if np.any(gaps <= 0.0):
        raise DegeneracyError(values.tolist())
    return float(np.min(gaps))


@dataclass(frozen=True, eq=False)
class SystemObservable:
    eigenvalues: np.ndarray
    """Eigenvalues a_k of the measured observable"""

    def __post_init__(self):
        values = _readonly(self.eigenvalues, np.float64)
        if values.ndim != 1 or values.size < 1 or not np.all(np.isfinite(values)):
            raise InvalidParameterError("eigenvalues", self.eigenvalues, "need a finite list of eigenvalues")
        object.__setattr__(self, "eigenvalues", values)
        if values.size >= 2:
            min_gap(values)

    @property
    def dimension(self) -> int:
        return int(self.eigenvalues.size)

    def check_index(self, k: int) -> int:
        if not 0 <= k < self.dimension:
            raise IndexOutOfRangeError(k, self.dimension)
        return k


@dataclass(frozen=True, eq=False)
class SystemState:
    amps: np.ndarray
    """Expansion coefficients c_k in the eigenbasis"""

    def __post_init__(self):
        amps = _readonly(self.amps, np.complex128)
        if amps.ndim != 1 or amps.size < 1:
            raise InvalidParameterError("amps", self.amps, "need a non-empty amplitude vector")
        norm = float(np.sum(np.abs(amps) ** 2))
        if abs(norm - 1.0) > STATE_NORM_TOL:
            raise InvalidParameterError("amps", norm, "state must satisfy sum |c_k|^2 = 1")
        object.__setattr__(self, "amps", amps)

    @classmethod
    def from_parts(cls, re: Sequence[float], im: Sequence[float] | None = None) -> SystemState:
        real = np.asarray(re, dtype=np.float64)
        imag = np.zeros_like(real) if im is None else np.asarray(im, dtype=np.float64)
        return cls(real + 1j * imag)

    @property
    def dimension(self) -> int:
        return int(self.amps.size)

    @property
    def populations(self) -> np.ndarray:
        return np.abs(self.amps) ** 2


@dataclass(frozen=True, eq=False)
class PointerGrid:
    """Quadrature grid on the pointer coordinate ``b``."""

    points: np.ndarray
    weights: np.ndarray
    half_width: float

    def __post_init__(self):
        points = _readonly(self.points, np.float64)
        weights = _readonly(self.weights, np.float64)
        if points.shape != weights.shape or points.ndim != 1 or points.size < 2:
            raise InvalidParameterError("points", points.size, "points and weights must be equal length >= 2")
        if np.any(np.diff(points) <= 0.0):
            raise InvalidParameterError("points", None, "pointer grid must be strictly increasing")
        if np.any(weights <= 0.0):
            raise InvalidParameterError("weights", float(np.min(weights)), "weights must be positive")
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "half_width", float(self.half_width))

    @property
    def size(self) -> int:
        return int(self.points.size)

    @classmethod
    def gauss_legendre(cls, half_width: float, n: int = 256) -> PointerGrid:
        if not half_width > 0:
            raise InvalidParameterError("half_width", half_width, "pointer range must be positive")
        points, weights = gauss_legendre(n, -half_width, half_width)
        return cls(points, weights, half_width)

    @classmethod
    def auto(cls, pointer0: BandlimitedFunction, n: int = 256, mass_tol: float = 1e-10, cap: float = 200.0):
        """
        Grow ``[-B, B]`` by doubling until the pointer mass outside is below ``mass_tol``.

        Raises
        ------
        CoverageError
            When ``B`` would have to exceed ``cap``.
        """
        B = min(8.0 / pointer0.kappa, cap)
        while True:
            deficit = max(0.0, 1.0 - mass_within(pointer0, B))
            logger.debug(f"pointer range scan: B={B:.6g}, deficit={deficit:.3e}")
            if deficit < mass_tol:
                return cls.gauss_legendre(B, n)
            if B >= cap:
                raise CoverageError(deficit, mass_tol, B)
            B = min(2.0 * B, cap)

    def same_as(self, other: PointerGrid) -> bool:
        return self is other or (
            np.array_equal(self.points, other.points) and np.array_equal(self.weights, other.weights)
        )

    def to_dict(self) -> dict[str, Any]:
        return {"points": self.points.tolist(), "weights": self.weights.tolist(), "half_width": self.half_width}


@dataclass(frozen=True, eq=False)
class OperatorKernel:
    """Discretized integral kernel ``K(b_i, b_j)`` acting with the grid weights."""

    grid: PointerGrid
    entries: np.ndarray
    hermitian: bool = False

    def __post_init__(self):
        entries = _readonly(self.entries, np.complex128)
        if entries.shape != (self.grid.size, self.grid.size):
            raise InvalidParameterError("entries", entries.shape, "kernel must be square on its grid")
        if not np.all(np.isfinite(entries)):
            raise InvalidParameterError("entries", None, "kernel entries must be finite")
        if self.hermitian:
            residual = float(np.max(np.abs(entries - entries.conj().T)))
            if residual > HERMITIAN_TOL:
                raise InvalidParameterError("hermitian", residual, "kernel flagged Hermitian but K != K^dagger")
        object.__setattr__(self, "entries", entries)

    def to_dict(self) -> dict[str, Any]:
        return {"grid": self.grid.to_dict(), **split_complex(self.entries)}


def _same_grid(x: OperatorKernel, y: OperatorKernel) -> None:
    if not x.grid.same_as(y.grid):
        raise GridMismatchError(x.grid.size, y.grid.size)


def hs_inner(x: OperatorKernel, y: OperatorKernel) -> complex:
    """Quadrature Hilbert-Schmidt inner product ``sum_ij u_i u_j conj(x_ij) y_ij``."""
    _same_grid(x, y)
    u = x.grid.weights
    return complex(u @ (np.conj(x.entries) * y.entries) @ u)


def hs_norm(x: OperatorKernel) -> float:
    u = x.grid.weights
    return float(np.sqrt(max(0.0, float(u @ (np.abs(x.entries) ** 2) @ u))))


def kernel_compose(x: OperatorKernel, y: OperatorKernel) -> OperatorKernel:
    """``(x o y)(b_i, b_j) = sum_m u_m x(b_i, b_m) y(b_m, b_j)``."""
    _same_grid(x, y)
    return OperatorKernel(x.grid, (x.entries * x.grid.weights[None, :]) @ y.entries)


def kernel_trace(x: OperatorKernel) -> complex:
    return complex(np.sum(x.grid.weights * np.diag(x.entries)))


def identity_kernel(grid: PointerGrid) -> OperatorKernel:
    return OperatorKernel(grid, np.diag(1.0 / grid.weights), hermitian=True)


def weighted_matrix(x: OperatorKernel) -> np.ndarray:
    """Similarity transform ``sqrt(u_i) K_ij sqrt(u_j)``; same spectrum as the kernel operator."""
    root = np.sqrt(x.grid.weights)
    return root[:, None] * x.entries * root[None, :]


def min_eigenvalue(x: OperatorKernel) -> float:
    m = weighted_matrix(x)
    return float(np.linalg.eigvalsh(0.5 * (m + m.conj().T))[0])


@dataclass(frozen=True, eq=False)
class CompositeDensity:
    """
    Reduced system-pointer density. ``blocks[k, l, i, j]`` is
    ``<phi_k| <b_i| rho |phi_l> |b_j>`` sampled on the pointer grid.
    """

    grid: PointerGrid
    blocks: np.ndarray

    def __post_init__(self):
        blocks = _readonly(self.blocks, np.complex128)
        n = blocks.shape[0] if blocks.ndim == 4 else 0
        if blocks.ndim != 4 or blocks.shape != (n, n, self.grid.size, self.grid.size) or n < 1:
            raise InvalidParameterError("blocks", blocks.shape, "expected an (N, N, P, P) block array")
        object.__setattr__(self, "blocks", blocks)

    @property
    def dimension(self) -> int:
        return int(self.blocks.shape[0])

    def block(self, k: int, l: int) -> OperatorKernel:  # noqa: E741
        for idx in (k, l):
            if not 0 <= idx < self.dimension:
                raise IndexOutOfRangeError(idx, self.dimension)
        return OperatorKernel(self.grid, self.blocks[k, l])

    def block_traces(self) -> np.ndarray:
        u = self.grid.weights
        diag = np.diagonal(self.blocks, axis1=2, axis2=3)
        return np.array([float(np.sum(u * diag[k, k]).real) for k in range(self.dimension)])

    def trace(self) -> float:
        return float(np.sum(self.block_traces()))

    def purity(self) -> float:
        u = self.grid.weights
        weighted = self.blocks * u[None, None, :, None] * u[None, None, None, :]
        # sum_{k,l,i,j} u_i u_j rho_kl(i,j) rho_lk(j,i)
        return float(np.einsum("klij,lkji->", weighted, self.blocks).real)

    def hermiticity_residual(self) -> float:
        adjoint = np.conj(np.transpose(self.blocks, (1, 0, 3, 2)))
        return float(np.max(np.abs(self.blocks - adjoint)))

    def weighted_matrix(self) -> np.ndarray:
        n, p = self.dimension, self.grid.size
        root = np.sqrt(self.grid.weights)
        scaled = self.blocks * root[None, None, :, None] * root[None, None, None, :]
        return scaled.transpose(0, 2, 1, 3).reshape(n * p, n * p)

    def min_eigenvalue(self) -> float:
        m = self.weighted_matrix()
        return float(np.linalg.eigvalsh(0.5 * (m + m.conj().T))[0])

    def offdiag_norms(self) -> np.ndarray:
        norms = np.zeros((self.dimension, self.dimension))
        for k in range(self.dimension):
            for l in range(self.dimension):  # noqa: E741
                if k != l:
                    norms[k, l] = hs_norm(self.block(k, l))
        return norms

    def max_offdiag_norm(self) -> float:
        if self.dimension < 2:
            return 0.0
        return float(np.max(self.offdiag_norms()))

    def validate(self, *, trace_tol: float = TRACE_TOL, psd_floor: float = PSD_FLOOR) -> None:
        """Assert Hermiticity, unit trace and positivity; raises :class:`NumericalContractError`."""
        residual = self.hermiticity_residual()
        if residual > HERMITIAN_TOL:
            raise NumericalContractError("hermiticity residual", residual, HERMITIAN_TOL)
        trace_error = abs(self.trace() - 1.0)
        if trace_error > trace_tol:
            raise NumericalContractError("trace error", trace_error, trace_tol)
        if np.any(self.block_traces() < -trace_tol):
            raise NumericalContractError("negative block trace", float(np.min(self.block_traces())), trace_tol)
        lowest = self.min_eigenvalue()
        if lowest < psd_floor:
            raise NumericalContractError("smallest eigenvalue", lowest, abs(psd_floor))

    def to_dict(self) -> dict[str, Any]:
        return {"dimension": self.dimension, "grid": self.grid.to_dict(), **split_complex(self.blocks)}

    def to_json(self) -> bytes:
        return orjson.dumps(self.to_dict())

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

from typing import Optional

import msgspec
from msgspec import field

__all__ = (
    "Thresholds",
    "BoundCheck",
    "LemmaReport",
    "ProductTypeReport",
    "SweepPoint",
    "DecoherenceReport",
    "PVMReport",
    "OracleCheck",
    "encode_report",
)


class Thresholds(msgspec.Struct, frozen=True):
    alpha_D: float  # noqa: N815
    """Decoherence threshold 2 hbar kappa0 / a0"""
    lambda_0: float
    """Minimum induced coupling 2 hbar b0 / a0"""
    alpha_0: Optional[float] = None
    """Orthogonality threshold, absent unless lambda > lambda_0"""
    alpha_0_reason: Optional[str] = None
    """Why alpha_0 is absent"""
    hbar: float = 1.0
    kappa0: float = 0.0
    """Probe type"""
    b0: float = 0.0
    """Pointer type"""
    a0: float = 0.0
    """Minimum eigenvalue gap"""
    lam: float = 0.0
    """The induced coupling the thresholds were computed for"""


class BoundCheck(msgspec.Struct, frozen=True):
    gamma: float
    """Contour shift into the upper half-plane"""
    a: float
    """Frequency"""
    measured: float
    """|exp(-a gamma) int exp(i a x) f(x + i gamma) dx|"""
    bound: float
    """M exp(-gamma (a - tau))"""
    passed: bool
    decreasing: bool = True
    """measured is below the value at the previous, smaller gamma"""


class LemmaReport(msgspec.Struct):
    tau: float
    """Claimed exponential type"""
    frequencies: list[float]
    magnitudes: list[float]
    """Structural |int exp(i a x) f dx|, exactly 0 beyond tau"""
    quadrature_magnitudes: list[float]
    """Truncated-domain quadrature of the same transform"""
    truncation_estimates: list[float]
    l1_norm: float
    """M, the position-space L1 norm"""
    half_width: float
    """Quadrature window [-L, L]"""
    bound_checks: list[BoundCheck] = field(default_factory=list)
    bound_decreasing: bool = True
    """Contour measurements fall monotonically in gamma"""
    structural_zero_tol: float = 0.0
    quadrature_zero_tol: float = 1e-6
    label: str = ""
    passed: bool = False


class ProductTypeReport(msgspec.Struct, frozen=True):
    kappa_f: float
    kappa_g: float
    kappa_product: float
    outside_frequencies: list[float]
    outside_max: float
    """Largest structural magnitude beyond kappa_f + kappa_g (must be literally 0)"""
    inside_max: float
    """Largest structural magnitude inside the support"""
    passed: bool


class SweepPoint(msgspec.Struct, frozen=True):
    alpha: float
    beta: float
    max_offdiag_coherence: float
    max_pointer_overlap: float
    oracle_residual: Optional[float]
    decohered: bool
    orthogonal: bool


class DecoherenceReport(msgspec.Struct):
    thresholds: Thresholds
    points: list[SweepPoint]
    pointer_grams: list[list[list[float]]]
    """Per alpha, the N x N matrix of HS norms of rho_k o rho_l"""
    config_hash: str = ""

    @property
    def alphas(self) -> list[float]:
        return [p.alpha for p in self.points]

    @property
    def coherence_norms(self) -> list[float]:
        return [p.max_offdiag_coherence for p in self.points]


class PVMReport(msgspec.Struct, frozen=True):
    rank_tol: float
    support_dims: list[int]
    pairwise_max: float
    """max over k != l of ||Pi_k o Pi_l||_HS"""
    idempotence_max: float
    completeness: float
    reproduction_max: float
    """max over k of ||Pi_k o rho_k - rho_k||_HS"""
    tolerance: float = 1e-6
    passed: bool = False


class OracleCheck(msgspec.Struct, frozen=True):
    alpha: float
    beta: float
    residual: float
    """max entrywise |analytic - oracle|"""
    effective_coupling: float
    q_grid_size: int
    coverage_half_width: float
    coverage_deficit: float
    passed: bool


def encode_report(report: msgspec.Struct) -> bytes:
    return msgspec.json.encode(report)

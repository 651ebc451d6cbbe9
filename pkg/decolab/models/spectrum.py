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

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Optional

import numpy as np
import orjson

from decolab.errors import InvalidParameterError
from decolab.utils import join_complex

__all__ = (
    "Parity",
    "Reality",
    "Spectrum",
    "BandlimitedFunction",
    "PositionForm",
)

NORMALIZATION_TOL = 1e-12
SYMMETRY_TOL = 1e-10
PositionForm = Callable[[np.ndarray], np.ndarray]


class Parity(str, Enum):
    EVEN = "even"
    ODD = "odd"
    NONE = "none"


class Reality(str, Enum):
    REAL = "real"
    COMPLEX = "complex"


def _frozen(arr: Any, dtype) -> np.ndarray:
    out = np.array(arr, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class Spectrum:
    """
    Sampled momentum-space amplitude with certified support ``[-kappa, kappa]``.

    Nodes are composite Gauss-Legendre points, the same count on every panel between
    consecutive ``breaks``. The position function is ``psi(x) = sum_j w_j exp(i x k_j) amps_j``.
    """

    kappa: float
    """Certified spectral half-width"""
    nodes: np.ndarray
    """Quadrature abscissae, ascending, inside [-kappa, kappa]"""
    weights: np.ndarray
    """Quadrature weights, strictly positive"""
    amps: np.ndarray
    """Complex amplitudes at the nodes"""
    breaks: np.ndarray = field(default=None)  # type: ignore
    """Panel edges, the first is -kappa and the last is kappa"""
    normalized: bool = True
    """Whether 2 pi sum w |amps|^2 = 1 is part of the contract"""

    def __post_init__(self):
        kappa = float(self.kappa)
        if not np.isfinite(kappa) or kappa <= 0.0:
            raise InvalidParameterError("kappa", self.kappa, "spectral half-width must be positive")
        nodes = _frozen(self.nodes, np.float64)
        weights = _frozen(self.weights, np.float64)
        amps = _frozen(self.amps, np.complex128)
        breaks = np.array([-kappa, kappa]) if self.breaks is None else self.breaks
        breaks = _frozen(breaks, np.float64)
        object.__setattr__(self, "kappa", kappa)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "amps", amps)
        object.__setattr__(self, "breaks", breaks)

        if not (nodes.shape == weights.shape == amps.shape) or nodes.ndim != 1 or nodes.size < 2:
            raise InvalidParameterError("nodes", nodes.size, "nodes, weights and amps must be equal length >= 2")
        if np.any(np.abs(nodes) > kappa):
            raise InvalidParameterError("nodes", float(np.max(np.abs(nodes))), "node outside [-kappa, kappa]")
        if np.any(weights <= 0.0):
            raise InvalidParameterError("weights", float(np.min(weights)), "weights must be strictly positive")
        if np.any(np.diff(nodes) <= 0.0):
            raise InvalidParameterError("nodes", None, "nodes must be strictly increasing")
        if breaks[0] != -kappa or breaks[-1] != kappa or np.any(np.diff(breaks) <= 0.0):
            raise InvalidParameterError("breaks", breaks.tolist(), "panel edges must rise from -kappa to kappa")
        if nodes.size % (breaks.size - 1) != 0:
            raise InvalidParameterError("breaks", breaks.size - 1, "every panel must hold the same node count")
        if self.normalized:
            norm = self.l2_norm_squared()
            if abs(norm - 1.0) > NORMALIZATION_TOL:
                raise InvalidParameterError("amps", norm, "spectrum flagged normalized but 2 pi sum w|amps|^2 != 1")

    @property
    def panels(self) -> int:
        return self.breaks.size - 1

    @property
    def per_panel(self) -> int:
        return self.nodes.size // self.panels

    def l2_norm_squared(self) -> float:
        return float(2.0 * np.pi * np.sum(self.weights * np.abs(self.amps) ** 2))

    def l1_norm(self) -> float:
        """Spectral L1 norm ``sum w |amps|``, the constant in the growth bound along the imaginary axis."""
        return float(np.sum(self.weights * np.abs(self.amps)))

    def interpolate(self, k) -> np.ndarray:
        """Piecewise polynomial interpolant of the amplitudes, exactly zero outside the support."""
        # decolab.numerics imports this module, so the helper is resolved at call time
        from decolab.numerics.quadrature import barycentric_eval

        karr = np.atleast_1d(np.asarray(k, dtype=np.float64))
        out = np.zeros(karr.shape, dtype=np.complex128)
        inside = np.abs(karr) <= self.kappa
        if not np.any(inside):
            return out
        kin = karr[inside]
        panel = np.clip(np.searchsorted(self.breaks, kin, side="right") - 1, 0, self.panels - 1)
        values = np.empty(kin.shape, dtype=np.complex128)
        m = self.per_panel
        for p in np.unique(panel):
            sel = panel == p
            values[sel] = barycentric_eval(
                self.breaks[p], self.breaks[p + 1], self.amps[p * m : (p + 1) * m], kin[sel]
            )
        out[inside] = values
        return out

    def with_amps(self, amps: np.ndarray, *, normalized: Optional[bool] = None) -> Spectrum:
        return Spectrum(
            kappa=self.kappa,
            nodes=self.nodes,
            weights=self.weights,
            amps=amps,
            breaks=self.breaks,
            normalized=self.normalized if normalized is None else normalized,
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "kappa": self.kappa,
            "nodes": self.nodes.tolist(),
            "weights": self.weights.tolist(),
            "re": self.amps.real.tolist(),
            "im": self.amps.imag.tolist(),
            "breaks": self.breaks.tolist(),
            "normalized": self.normalized,
        }

    def to_json(self) -> bytes:
        return orjson.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> Spectrum:
        return cls(
            kappa=data["kappa"],
            nodes=data["nodes"],
            weights=data["weights"],
            amps=join_complex(data["re"], data["im"]),
            breaks=data.get("breaks"),
            normalized=bool(data.get("normalized", False)),
        )

    @classmethod
    def from_json(cls, raw: bytes | str) -> Spectrum:
        return cls.from_dict(orjson.loads(raw))


@dataclass(frozen=True, eq=False)
class BandlimitedFunction:
    """A momentum-limited wavefunction: a certified spectrum plus verified symmetry metadata."""

    spectrum: Spectrum
    parity: Parity = Parity.NONE
    reality: Reality = Reality.COMPLEX
    closed_form: Optional[PositionForm] = None
    """Exact position-space evaluator of the continuum function, when one is known"""
    label: str = "sampled"

    def __post_init__(self):
        if self.parity is Parity.NONE and self.reality is Reality.COMPLEX:
            return
        kappa = self.spectrum.kappa
        x = np.linspace(0.0, 12.0 / kappa, 25)
        plus = self.sample(x)
        minus = self.sample(-x)
        if self.parity is Parity.EVEN and np.max(np.abs(plus - minus)) > SYMMETRY_TOL:
            raise InvalidParameterError("parity", self.parity.value, "function is not even on the test grid")
        if self.parity is Parity.ODD and np.max(np.abs(plus + minus)) > SYMMETRY_TOL:
            raise InvalidParameterError("parity", self.parity.value, "function is not odd on the test grid")
        if self.reality is Reality.REAL:
            if max(np.max(np.abs(plus.imag)), np.max(np.abs(minus.imag))) > SYMMETRY_TOL:
                raise InvalidParameterError("reality", self.reality.value, "function is not real on the test grid")

    @property
    def kappa(self) -> float:
        return self.spectrum.kappa

    def sample(self, x) -> np.ndarray:
        """Quadrature realization ``sum_j w_j exp(i x k_j) amps_j``."""
        xarr = np.asarray(x)
        phase = np.exp(1j * np.multiply.outer(xarr, self.spectrum.nodes))
        return phase @ (self.spectrum.weights * self.spectrum.amps)

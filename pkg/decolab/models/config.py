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

from enum import Enum
from pathlib import Path
from typing import Any, Literal, Optional, Union

import numpy as np
import orjson
from pydantic import BaseModel, Extra, Field, PositiveFloat, ValidationError, root_validator, validator

from decolab.errors import ConfigError
from decolab.models.encoder import dumps
from decolab.tooling import get_logger
from decolab.utils import config_hash

__all__ = (
    "FunctionKind",
    "OutputFormat",
    "StateConfig",
    "ProbeConfig",
    "PointerConfig",
    "SystemConfig",
    "AlphaSweepConfig",
    "CouplingConfig",
    "GridConfig",
    "ToleranceConfig",
    "OutputConfig",
    "ExperimentConfig",
)
logger = get_logger("Decolab.Models.Config")

RENORMALIZE_LIMIT = 1e-6
EXACT_NORM_TOL = 1e-12


class FunctionKind(str, Enum):
    FEJER = "fejer"
    JACKSON = "jackson"
    BSPLINE = "bspline"
    GAMMA_RECIPROCAL = "gamma_reciprocal"


class OutputFormat(str, Enum):
    CSV = "csv"
    JSON = "json"


class StateConfig(BaseModel):
    """
    A momentum-limited wavefunction by family name.

    B-spline families take ``kappa`` (and ``order`` for ``bspline``), the reciprocal gamma pair takes ``g_a`` and
    ``g_b``. ``n`` overrides the spectral node count of the grid section.
    """

    kind: FunctionKind = FunctionKind.FEJER
    kappa: Optional[float] = Field(default=None, gt=0)
    order: Optional[int] = Field(default=None, ge=2)
    g_a: Optional[float] = Field(default=None, gt=1)
    g_b: Optional[float] = Field(default=None, gt=0)
    n: Optional[int] = Field(default=None, ge=8)

    class Config:
        extra = Extra.forbid

    @root_validator(skip_on_failure=True)
    def _check_family_parameters(cls, values: dict[str, Any]):
        kind = values["kind"]
        if kind is FunctionKind.GAMMA_RECIPROCAL:
            missing = [name for name in ("g_a", "g_b") if values.get(name) is None]
        else:
            missing = ["kappa"] if values.get("kappa") is None else []
            if kind is FunctionKind.BSPLINE and values.get("order") is None:
                missing.append("order")
        if missing:
            raise ValueError(f"{kind.value} needs {', '.join(missing)}")
        return values

    @property
    def type_width(self) -> float:
        """Certified spectral half-width of the described function."""
        if self.kind is FunctionKind.GAMMA_RECIPROCAL:
            return float(np.pi * self.g_b)
        return float(self.kappa)


class ProbeConfig(StateConfig):
    """The probe traced out after the interaction."""


class PointerConfig(StateConfig):
    """The pointer that registers the outcome."""


class SystemConfig(BaseModel):
    eigenvalues: list[float] = Field(min_items=2)
    amplitudes_re: list[float]
    amplitudes_im: Optional[list[float]] = None

    class Config:
        extra = Extra.forbid

    @validator("eigenvalues")
    def _check_distinct(cls, value: list[float]):
        if len(set(value)) != len(value):
            raise ValueError("eigenvalues must be pairwise distinct")
        return value

    @root_validator(skip_on_failure=True)
    def _check_amplitudes(cls, values: dict[str, Any]):
        size = len(values["eigenvalues"])
        re = np.asarray(values["amplitudes_re"], dtype=np.float64)
        im_raw = values.get("amplitudes_im")
        im = np.zeros_like(re) if im_raw is None else np.asarray(im_raw, dtype=np.float64)
        if re.size != size or im.size != size:
            raise ValueError(f"expected {size} amplitudes to match the eigenvalues")
        norm = float(np.sum(re**2 + im**2))
        error = abs(norm - 1.0)
        if error > RENORMALIZE_LIMIT:
            raise ValueError(f"amplitudes have squared norm {norm:.9g}, too far from 1 to renormalize")
        if error > EXACT_NORM_TOL:
            logger.warning(f"Renormalizing amplitudes (squared norm {norm:.12g})")
            scale = 1.0 / np.sqrt(norm)
            values["amplitudes_re"] = (re * scale).tolist()
            values["amplitudes_im"] = None if im_raw is None else (im * scale).tolist()
        return values

    @property
    def amplitudes(self) -> np.ndarray:
        re = np.asarray(self.amplitudes_re, dtype=np.float64)
        im = np.zeros_like(re) if self.amplitudes_im is None else np.asarray(self.amplitudes_im, dtype=np.float64)
        return re + 1j * im


class AlphaSweepConfig(BaseModel):
    min: float = Field(gt=0)
    max: float = Field(gt=0)
    steps: int = Field(ge=1)

    class Config:
        extra = Extra.forbid

    @root_validator(skip_on_failure=True)
    def _check_order(cls, values: dict[str, Any]):
        if values["max"] < values["min"]:
            raise ValueError("max must not be below min")
        if values["steps"] > 1 and values["max"] == values["min"]:
            raise ValueError("a multi-step sweep needs max > min")
        return values

    def values(self) -> list[float]:
        return np.linspace(self.min, self.max, self.steps).tolist()


class CouplingConfig(BaseModel):
    lam: float = Field(alias="lambda", gt=0)
    alpha: Optional[float] = Field(default=None, gt=0)
    alpha_sweep: Optional[AlphaSweepConfig] = None

    class Config:
        extra = Extra.forbid
        allow_population_by_field_name = True

    @root_validator(skip_on_failure=True)
    def _check_alpha(cls, values: dict[str, Any]):
        if values.get("alpha") is None and values.get("alpha_sweep") is None:
            raise ValueError("give either alpha or alpha_sweep")
        return values

    def alphas(self) -> list[float]:
        if self.alpha_sweep is not None:
            return self.alpha_sweep.values()
        return [float(self.alpha)]


class GridConfig(BaseModel):
    spectral_n: int = Field(default=128, ge=8)
    pointer_n: int = Field(default=256, ge=8)
    pointer_range: Union[PositiveFloat, Literal["auto"]] = "auto"
    q_grid_size: Optional[int] = Field(default=None, ge=2)

    class Config:
        extra = Extra.forbid


class ToleranceConfig(BaseModel):
    quadrature: float = Field(default=1e-6, gt=0)
    """Oracle residual contract"""
    zero: float = Field(default=1e-8, gt=0)
    """Pointer orthogonality contract"""
    pointer_mass: float = Field(default=1e-10, gt=0)
    coverage: float = Field(default=1e-10, gt=0)
    rank: float = Field(default=1e-8, gt=0)

    class Config:
        extra = Extra.forbid


class OutputConfig(BaseModel):
    format: OutputFormat = OutputFormat.CSV
    path: Optional[Path] = None

    class Config:
        extra = Extra.forbid


class ExperimentConfig(BaseModel):
    """One experiment: the system, both meter parts, couplings, grids, tolerances and where results go."""

    hbar: float = Field(default=1.0, gt=0)
    system: SystemConfig
    probe: ProbeConfig
    pointer: PointerConfig
    couplings: CouplingConfig
    grids: GridConfig = Field(default_factory=GridConfig)
    tolerances: ToleranceConfig = Field(default_factory=ToleranceConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)

    class Config:
        extra = Extra.forbid

    @classmethod
    def from_dict(cls, data: Any) -> ExperimentConfig:
        try:
            return cls.parse_obj(data)
        except ValidationError as exc:
            messages = [f"{'.'.join(str(part) for part in err['loc'])}: {err['msg']}" for err in exc.errors()]
            raise ConfigError(messages) from exc

    @classmethod
    def load(cls, path: Path) -> ExperimentConfig:
        try:
            raw = orjson.loads(path.read_bytes())
        except FileNotFoundError as exc:
            raise ConfigError([f"{path}: no such file"]) from exc
        except orjson.JSONDecodeError as exc:
            raise ConfigError([f"{path}: {exc}"]) from exc
        logger.debug(f"Loaded configuration from {path}")
        return cls.from_dict(raw)

    def canonical(self) -> dict[str, Any]:
        return orjson.loads(dumps(self.dict(by_alias=True)))

    @property
    def config_hash(self) -> str:
        return config_hash(self.canonical())

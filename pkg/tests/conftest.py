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

from typing import Callable, Optional

import numpy as np
import pytest

from decolab.models import BandlimitedFunction
from decolab.numerics import (
    MeasurementModel,
    PointerGrid,
    SystemObservable,
    SystemState,
    make_fejer,
    make_jackson,
)

ModelFactory = Callable[..., MeasurementModel]


@pytest.fixture(scope="session")
def fejer_probe() -> BandlimitedFunction:
    return make_fejer(1.0, 64)


@pytest.fixture(scope="session")
def fejer_pointer() -> BandlimitedFunction:
    return make_fejer(0.5, 64)


@pytest.fixture(scope="session")
def jackson_pointer() -> BandlimitedFunction:
    return make_jackson(0.5, 64)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


def _model_factory(
    eigenvalues: list[float], amps: np.ndarray, probe: BandlimitedFunction, default_pointer: BandlimitedFunction
) -> ModelFactory:
    observable = SystemObservable(eigenvalues)
    state = SystemState(amps)

    def factory(
        alpha: float,
        lam: float = 2.0,
        *,
        half_width: float = 20.0,
        n: int = 48,
        pointer: Optional[BandlimitedFunction] = None,
    ) -> MeasurementModel:
        return MeasurementModel(
            hbar=1.0,
            alpha=alpha,
            lam=lam,
            observable=observable,
            state=state,
            probe=probe,
            pointer0=default_pointer if pointer is None else pointer,
            grid=PointerGrid.gauss_legendre(half_width, n),
        )

    return factory


@pytest.fixture(scope="session")
def make_qubit(fejer_probe, fejer_pointer) -> ModelFactory:
    """Qubit with a = {0, 1} in the equal superposition; alpha_D = 2, lambda_0 = 1, alpha_0 = 8 at lam = 2."""
    return _model_factory([0.0, 1.0], np.array([1.0, 1.0]) / np.sqrt(2.0), fejer_probe, fejer_pointer)


@pytest.fixture(scope="session")
def make_qutrit(fejer_probe, fejer_pointer) -> ModelFactory:
    amps = np.array([1.0, 1.0, 1.0j]) / np.sqrt(3.0)
    return _model_factory([0.0, 1.0, 2.5], amps, fejer_probe, fejer_pointer)


@pytest.fixture(scope="session")
def jackson_model(fejer_probe, jackson_pointer) -> MeasurementModel:
    """Far above alpha_0 with a Jackson pointer, resolved finely enough for the projector checks."""
    return MeasurementModel(
        hbar=1.0,
        alpha=40.0,
        lam=2.0,
        observable=SystemObservable([0.0, 1.0]),
        state=SystemState(np.array([0.6, 0.8])),
        probe=fejer_probe,
        pointer0=jackson_pointer,
        grid=PointerGrid.gauss_legendre(80.0, 384),
    )

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

import logging

import numpy as np
import pytest

from decolab.errors import InvalidParameterError
from decolab.numerics import (
    PointerGrid,
    SystemObservable,
    SystemState,
    VonNeumannModel,
    gaussian_coherence_factor,
    gaussian_factor_table,
    log_gaussian_coherence_factor,
    postulated_reduction,
    premeasurement_density,
)
from decolab.numerics import vonneumann


@pytest.fixture(scope="module")
def meter_model(jackson_pointer) -> VonNeumannModel:
    return VonNeumannModel.from_bandlimited(
        hbar=1.0,
        lam=2.0,
        observable=SystemObservable([0.0, 1.0, 2.5]),
        state=SystemState(np.array([0.6, 0.0, 0.8j])),
        pointer0=jackson_pointer,
        grid=PointerGrid.gauss_legendre(40.0, 128),
    )


def test_premeasurement_state_is_pure(meter_model):
    rho = premeasurement_density(meter_model)
    rho.validate()
    assert rho.purity() == pytest.approx(1.0, abs=1e-10)
    np.testing.assert_allclose(rho.block_traces(), [0.36, 0.0, 0.64], atol=1e-12)


def test_branches_carry_the_coupling_phase(meter_model):
    branches = meter_model.branches()
    b = meter_model.grid.points
    ratio = branches[2] / branches[0]
    np.testing.assert_allclose(ratio, (0.8j / 0.6) * np.exp(1j * 2.0 * 2.5 * b), rtol=1e-12)


def test_postulated_reduction_keeps_diagonal_bitwise(meter_model, caplog):
    vonneumann._warn_reduction_index.cache_clear()
    rho = premeasurement_density(meter_model)
    with caplog.at_level(logging.WARNING):
        reduced = postulated_reduction(rho)
        postulated_reduction(rho)
    assert sum("diagonal mixture" in record.getMessage() for record in caplog.records) == 1
    for k in range(3):
        np.testing.assert_array_equal(reduced.blocks[k, k], rho.blocks[k, k])
    assert reduced.max_offdiag_norm() == 0.0
    assert reduced.trace() == pytest.approx(rho.trace(), abs=1e-14)
    assert reduced.purity() < 1.0


def test_zero_coupling_is_allowed_but_negative_is_not(jackson_pointer):
    grid = PointerGrid.gauss_legendre(40.0, 64)
    obs, state = SystemObservable([0.0, 1.0]), SystemState(np.array([1.0, 0.0]))
    model = VonNeumannModel.from_bandlimited(1.0, 0.0, obs, state, jackson_pointer, grid)
    np.testing.assert_allclose(model.branches()[0], model.meter0)
    with pytest.raises(InvalidParameterError):
        VonNeumannModel.from_bandlimited(1.0, -0.1, obs, state, jackson_pointer, grid)


def test_meter_must_be_normalized_on_the_grid():
    grid = PointerGrid.gauss_legendre(1.0, 16)
    with pytest.raises(InvalidParameterError):
        VonNeumannModel(1.0, 1.0, SystemObservable([0.0]), SystemState(np.array([1.0])), grid, np.ones(16))


def test_gaussian_factor_decays_but_never_vanishes_exactly():
    alphas = np.linspace(0.0, 30.0, 61)
    factors = np.array([gaussian_coherence_factor(a, 1.0, 0.0, 1.0, 1.0, 1.0) for a in alphas])
    assert factors[0] == 1.0
    assert np.all(np.diff(factors) <= 0.0)
    logs = np.array([log_gaussian_coherence_factor(a, 1.0, 0.0, 1.0, 1.0, 1.0) for a in alphas])
    assert np.all(np.isfinite(logs))
    assert np.all(logs[1:] < 0.0)
    np.testing.assert_allclose(logs, -(alphas**2) / 4.0)


def test_gaussian_factor_underflow_is_only_numerical():
    # exp(-4e4) is below the smallest double; the log form stays exact
    assert gaussian_coherence_factor(400.0, 1.0, 0.0, 1.0, 1.0, 1.0) == 0.0
    assert log_gaussian_coherence_factor(400.0, 1.0, 0.0, 1.0, 1.0, 1.0) == -40000.0


def test_gaussian_factor_validates_oscillator():
    with pytest.raises(InvalidParameterError):
        gaussian_coherence_factor(1.0, 1.0, 0.0, 0.0, 1.0, 1.0)
    with pytest.raises(InvalidParameterError):
        log_gaussian_coherence_factor(1.0, 1.0, 0.0, 1.0, -1.0, 1.0)


def test_gaussian_factor_table():
    table = gaussian_factor_table([1.0, 2.0], 2.0, mu=2.0)
    assert list(table.columns) == ["alpha", "delta_a", "factor", "log_factor"]
    np.testing.assert_allclose(table["log_factor"], [-0.5, -2.0])
    np.testing.assert_allclose(table["factor"], np.exp([-0.5, -2.0]))

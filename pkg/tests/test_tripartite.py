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

import numpy as np
import pytest

from decolab.errors import (
    CoverageError,
    IndexOutOfRangeError,
    InvalidPairError,
    InvalidParameterError,
    PreconditionError,
)
from decolab.models import BandlimitedFunction
from decolab.numerics import (
    MeasurementModel,
    PointerGrid,
    SystemObservable,
    SystemState,
    coherence_kernel,
    coherence_matrix,
    coherence_sweep,
    dense_oracle,
    effective_coupling,
    extract_pvm,
    hs_norm,
    kernel_compose,
    kernel_trace,
    make_fejer,
    oracle_check,
    orthogonality_kernel,
    pointer_gram,
    pointer_overlap_function,
    pointer_state,
    position,
    probe_coverage,
    reduced_density,
    thresholds,
)
from decolab.numerics import tripartite
from decolab.numerics.tripartite import BELOW_LAMBDA0


def test_thresholds_of_the_qubit(make_qubit):
    limits = thresholds(make_qubit(1.0))
    assert limits.alpha_D == pytest.approx(2.0)
    assert limits.lambda_0 == pytest.approx(1.0)
    assert limits.alpha_0 == pytest.approx(8.0)
    assert limits.alpha_0_reason is None


def test_alpha_0_is_absent_at_and_below_lambda_0(make_qubit):
    for lam in (1.0, 0.5):
        limits = thresholds(make_qubit(1.0, lam))
        assert limits.alpha_0 is None
        assert limits.alpha_0_reason == BELOW_LAMBDA0


def test_alpha_0_exceeds_alpha_d_for_random_parameters(rng):
    grid = PointerGrid.gauss_legendre(10.0, 8)
    for _ in range(50):
        size = int(rng.integers(2, 5))
        eigenvalues = np.sort(rng.uniform(-5.0, 5.0, size))
        probe = make_fejer(float(rng.uniform(0.2, 3.0)), 32)
        pointer = make_fejer(float(rng.uniform(0.1, 2.0)), 32)
        hbar = float(rng.uniform(0.1, 3.0))
        a0 = float(np.min(np.diff(eigenvalues)))
        lam = 2.0 * hbar * pointer.kappa / a0 * float(rng.uniform(1.01, 6.0))
        state = SystemState(np.ones(size) / np.sqrt(size))
        m = MeasurementModel(hbar, 1.0, lam, SystemObservable(eigenvalues), state, probe, pointer, grid)
        limits = thresholds(m)
        assert limits.alpha_0 is not None
        assert limits.alpha_0 > limits.alpha_D


def test_model_validation(fejer_probe, fejer_pointer):
    grid = PointerGrid.gauss_legendre(10.0, 16)
    obs, state = SystemObservable([0.0, 1.0]), SystemState(np.array([1.0, 0.0]))
    with pytest.raises(InvalidParameterError):
        MeasurementModel(1.0, 0.0, 1.0, obs, state, fejer_probe, fejer_pointer, grid)
    with pytest.raises(InvalidParameterError):
        MeasurementModel(1.0, 1.0, 1.0, SystemObservable([0.0]), state, fejer_probe, fejer_pointer, grid)
    spec = fejer_probe.spectrum
    lopsided = BandlimitedFunction(spec.with_amps(spec.amps * (1.0 + 0.5 * spec.nodes), normalized=False))
    scaled = lopsided.spectrum.with_amps(
        lopsided.spectrum.amps / np.sqrt(lopsided.spectrum.l2_norm_squared()), normalized=True
    )
    with pytest.raises(InvalidParameterError):
        MeasurementModel(1.0, 1.0, 1.0, obs, state, BandlimitedFunction(scaled), fejer_pointer, grid)


def test_coherence_kernel_diagonal_at_coinciding_points(make_qubit):
    m = make_qubit(1.0)
    for k in range(2):
        assert coherence_kernel(m, k, k, 0.7, 0.7) == pytest.approx(1.0, abs=1e-10)


def test_coherence_kernel_matches_probe_overlap(make_qubit):
    m = make_qubit(1.0)
    # at b = b' = 0 the kernel is int exp(i q) |psi(q)|^2 dq, a quarter for the unit Fejer probe
    value = coherence_kernel(m, 0, 1, 0.0, 0.0)
    assert value == pytest.approx(0.25, abs=1e-10)
    q = np.arange(-4096.0, 4096.0 + 0.25, 0.5)
    direct = 0.5 * np.sum(np.exp(1j * q) * np.abs(position(m.probe, q)) ** 2)
    assert abs(value - direct) < 1e-6


def test_coherence_vanishes_exactly_above_alpha_d(make_qubit, make_qutrit):
    m = make_qubit(3.0)
    for b, b_prime in ((0.0, 0.0), (1.5, -2.0), (7.0, 7.0)):
        assert coherence_kernel(m, 0, 1, b, b_prime) == 0j
    assert np.all(coherence_matrix(m, 1, 0) == 0.0)
    # qutrit gaps are 1, 1.5 and 2.5: at alpha = 1.6 only the closest pair survives
    rho = reduced_density(make_qutrit(1.6))
    norms = rho.offdiag_norms()
    assert norms[0, 1] > 0.0
    assert norms[1, 2] == 0.0
    assert norms[0, 2] == 0.0


def test_coherence_survives_below_alpha_d(make_qubit):
    rho = reduced_density(make_qubit(1.0))
    assert rho.max_offdiag_norm() > 1e-3


def test_coherence_matrix_agrees_with_kernel(make_qubit):
    m = make_qubit(1.0)
    matrix = coherence_matrix(m, 0, 1)
    b = m.grid.points
    for i, j in ((20, 20), (18, 27), (30, 15)):
        assert matrix[i, j] == pytest.approx(coherence_kernel(m, 0, 1, b[i], b[j]), abs=1e-9)


def test_coherence_index_is_checked(make_qubit):
    with pytest.raises(IndexOutOfRangeError):
        coherence_kernel(make_qubit(1.0), 0, 2, 0.0, 0.0)


@pytest.mark.parametrize("alpha", [0.5, 1.0, 3.0, 10.0])
def test_reduced_density_is_a_state(make_qubit, alpha):
    rho = reduced_density(make_qubit(alpha))
    rho.validate()
    np.testing.assert_allclose(rho.block_traces(), [0.5, 0.5], atol=1e-8)


@pytest.mark.parametrize("alpha", [0.5, 1.0, 3.0, 10.0])
def test_reduced_density_matches_dense_oracle_for_qubit(make_qubit, alpha):
    m = make_qubit(alpha)
    oracle = dense_oracle(m)
    assert np.max(np.abs(reduced_density(m).blocks - oracle.blocks)) <= 1e-6


@pytest.mark.parametrize("alpha", [0.5, 1.6, 10.0])
def test_reduced_density_matches_dense_oracle_for_qutrit(make_qutrit, alpha):
    m = make_qutrit(alpha, n=32)
    check = oracle_check(m)
    assert check.passed, check.residual
    assert check.coverage_deficit < 1e-10


def test_oracle_single_level_gives_the_pointer_state(fejer_probe, fejer_pointer):
    m = MeasurementModel(
        hbar=1.0,
        alpha=1.0,
        lam=1e-6,
        observable=SystemObservable([0.0]),
        state=SystemState(np.array([1.0])),
        probe=fejer_probe,
        pointer0=fejer_pointer,
        grid=PointerGrid.gauss_legendre(20.0, 48),
    )
    oracle = dense_oracle(m)
    np.testing.assert_allclose(oracle.blocks[0, 0], pointer_state(m, 0).entries, atol=1e-8)
    assert oracle.purity() == pytest.approx(1.0, abs=1e-8)
    assert oracle.max_offdiag_norm() == 0.0


def test_oracle_rejects_a_short_probe_grid(make_qubit):
    m = make_qubit(1.0)
    with pytest.raises(CoverageError) as excinfo:
        dense_oracle(m, q_grid_size=200)
    assert excinfo.value.deficit >= 1e-10


def test_oracle_check_flags_a_reduced_state_with_the_wrong_pointer_phase(make_qubit, monkeypatch):
    m = make_qubit(1.0)
    assert oracle_check(m).passed

    def flipped(model: MeasurementModel) -> np.ndarray:
        a = model.observable.eigenvalues
        phase = np.exp(-1j * model.lam / model.hbar * np.multiply.outer(a, model.grid.points))
        return model.state.amps[:, None] * phase * model.pointer_samples[None, :]

    monkeypatch.setattr(tripartite, "_branch_pointer", flipped)
    check = oracle_check(m)
    assert not check.passed
    assert check.residual > 1e-3
    # the oracle never sees the analytic phase, so it still reports the configured coupling
    assert check.effective_coupling == pytest.approx(2.0, abs=1e-5)


def test_oracle_diagonal_blocks_are_the_pointer_states(make_qubit):
    m = make_qubit(3.0)
    oracle = dense_oracle(m)
    populations = m.state.populations
    for k in range(m.dimension):
        np.testing.assert_allclose(oracle.blocks[k, k] / populations[k], pointer_state(m, k).entries, atol=2e-6)
    # a_0 = 0 leaves the first pointer state without a phase
    assert np.max(np.abs(pointer_state(m, 0).entries.imag)) <= 1e-12
    assert np.max(np.abs(oracle.blocks[0, 0].imag)) <= 1e-7


@pytest.mark.parametrize("alpha", [1.5, 1.9, 3.0])
def test_coherence_norms_survive_grid_refinement(alpha):
    norms = []
    for spectral_n, pointer_n in ((64, 96), (128, 192)):
        m = MeasurementModel(
            hbar=1.0,
            alpha=alpha,
            lam=2.0,
            observable=SystemObservable([0.0, 1.0]),
            state=SystemState(np.array([1.0, 1.0]) / np.sqrt(2.0)),
            probe=make_fejer(1.0, spectral_n),
            pointer0=make_fejer(0.5, spectral_n),
            grid=PointerGrid.gauss_legendre(20.0, pointer_n),
        )
        norms.append(reduced_density(m).offdiag_norms())
    np.testing.assert_allclose(norms[1], norms[0], rtol=1e-5, atol=1e-12)


def test_probe_coverage_for_fejer(make_qubit):
    coverage = probe_coverage(make_qubit(1.0))
    assert coverage.deficit < 1e-10
    assert coverage.half_width == pytest.approx(8.0 * 2**9)


def test_effective_coupling_is_recovered(make_qubit):
    assert effective_coupling(make_qubit(3.0)) == pytest.approx(2.0, abs=1e-5)


def test_pointer_overlap_function_is_real_even_autocorrelation(make_qubit):
    m = make_qubit(4.0)
    overlap = pointer_overlap_function(m)
    assert overlap.kappa == pytest.approx(m.beta * m.kappa0)
    eta = np.array([0.0, 1.0, 2.5, 6.0])
    beta_eta = m.beta * eta
    expected = 6.0 * (1.0 / beta_eta[1:] ** 2 - np.sin(beta_eta[1:]) / beta_eta[1:] ** 3)
    values = np.asarray(position(overlap, eta))
    assert values[0] == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(values[1:].real, expected, atol=1e-10)


def test_pointer_states_are_unit_trace(make_qubit):
    m = make_qubit(4.0)
    for k in range(2):
        rho_k = pointer_state(m, k)
        assert kernel_trace(rho_k).real == pytest.approx(1.0, abs=1e-12)
        assert abs(kernel_trace(rho_k).imag) < 1e-14


def test_orthogonality_kernel_matches_composition(make_qubit):
    m = make_qubit(4.0, half_width=40.0, n=256)
    composed = kernel_compose(pointer_state(m, 0), pointer_state(m, 1))
    b = m.grid.points
    phi = m.pointer_samples
    a = m.observable.eigenvalues
    for i, j in ((128, 128), (120, 136), (140, 110)):
        phase = np.exp(1j * m.lam * (a[0] * b[i] - a[1] * b[j]) / m.hbar)
        expected = phase * phi[i] * np.conj(phi[j]) * orthogonality_kernel(m, 0, 1, b[i], b[j]) / m.pointer_mass
        assert composed.entries[i, j] == pytest.approx(expected, abs=1e-6)


def test_orthogonality_kernel_vanishes_above_alpha_0(make_qubit):
    m = make_qubit(10.0)
    assert orthogonality_kernel(m, 0, 1, 0.0, 0.0) == 0j
    assert orthogonality_kernel(m, 1, 0, 3.0, -2.0) == 0j
    assert orthogonality_kernel(make_qubit(4.0), 0, 1, 0.0, 0.0) != 0j
    with pytest.raises(InvalidPairError):
        orthogonality_kernel(m, 1, 1, 0.0, 0.0)


def test_pointer_gram_above_alpha_0(make_qubit):
    gram = pointer_gram(make_qubit(10.0, half_width=80.0, n=384))
    assert gram[0, 1] <= 1e-8
    assert gram[0, 1] == gram[1, 0]
    assert gram[0, 0] > 0.1


@pytest.mark.parametrize("alpha", [5.0, 10.0, 20.0])
def test_pointer_gram_below_lambda_0_stays_overlapping(make_qubit, alpha):
    gram = pointer_gram(make_qubit(alpha, 0.5, half_width=40.0, n=192))
    assert gram[0, 1] > 1e-3


def test_pointer_gram_is_stable_under_refinement(make_qubit):
    coarse = pointer_gram(make_qubit(10.0, half_width=40.0, n=256))
    fine = pointer_gram(make_qubit(10.0, half_width=40.0, n=384))
    assert abs(coarse[0, 0] - fine[0, 0]) <= 1e-6


def test_extract_pvm_requires_orthogonal_pointers(make_qubit):
    with pytest.raises(PreconditionError) as excinfo:
        extract_pvm(make_qubit(10.0, 0.5))
    assert (excinfo.value.k, excinfo.value.l) == (0, 1)


def test_extract_pvm_for_jackson_pointer(jackson_model):
    pvm = extract_pvm(jackson_model, rank_tol=1e-6)
    report = pvm.report
    assert report.pairwise_max <= 1e-6
    assert report.idempotence_max <= 1e-6
    assert report.reproduction_max <= 1e-5
    assert report.completeness <= 1e-10
    for projector in pvm.projectors:
        assert kernel_trace(projector).real >= 1.0 - 1e-8
    assert hs_norm(pvm.remainder) > 0.0


def test_coherence_sweep_flags_and_order(make_qubit):
    report = coherence_sweep(make_qubit(1.0), [1.0, 1.9, 2.1, 3.0], with_oracle=False)
    assert report.alphas == [1.0, 1.9, 2.1, 3.0]
    assert [p.decohered for p in report.points] == [False, False, True, True]
    assert report.points[0].max_offdiag_coherence > 1e-3
    assert report.points[2].max_offdiag_coherence == 0.0
    assert all(p.oracle_residual is None for p in report.points)
    assert not any(p.orthogonal for p in report.points)
    assert len(report.pointer_grams) == 4


def test_coherence_sweep_with_oracle_in_parallel(make_qubit):
    report = coherence_sweep(make_qubit(1.0), [1.0, 3.0], n_jobs=2, with_oracle=True)
    assert [p.alpha for p in report.points] == [1.0, 3.0]
    assert all(p.oracle_residual <= 1e-6 for p in report.points)


def test_coherence_sweep_rejects_unsorted_alphas(make_qubit):
    with pytest.raises(InvalidParameterError):
        coherence_sweep(make_qubit(1.0), [2.0, 1.0])
    with pytest.raises(InvalidParameterError):
        coherence_sweep(make_qubit(1.0), [])

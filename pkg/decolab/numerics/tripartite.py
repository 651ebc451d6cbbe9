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

from dataclasses import dataclass, replace
from functools import cached_property
from typing import NamedTuple, Optional, Sequence

import numpy as np
from joblib import Parallel, delayed
from scipy.fft import fft, fftfreq, ifft

from decolab.errors import (
    CoverageError,
    InvalidPairError,
    InvalidParameterError,
    NumericalContractError,
    PreconditionError,
    ResolutionError,
)
from decolab.models.reports import DecoherenceReport, OracleCheck, PVMReport, SweepPoint, Thresholds
from decolab.models.spectrum import BandlimitedFunction, Parity, Reality, Spectrum
from decolab.numerics.bandlimited import (
    autocorrelation,
    conjugate,
    fourier_at,
    mass_within,
    position,
    product,
    shift,
)
from decolab.numerics.quadrature import MAX_PANEL_NODES, composite_rule, nodes_for_phase
from decolab.numerics.quantum_core import (
    CompositeDensity,
    OperatorKernel,
    PointerGrid,
    SystemObservable,
    SystemState,
    hs_norm,
    identity_kernel,
    kernel_compose,
    min_gap,
    weighted_matrix,
)
from decolab.tooling import get_logger

__all__ = (
    "MeasurementModel",
    "ProbeCoverage",
    "ProjectionValuedMeasure",
    "thresholds",
    "coherence_kernel",
    "coherence_matrix",
    "probe_coverage",
    "dense_oracle",
    "reduced_density",
    "pointer_overlap_function",
    "pointer_state",
    "orthogonality_kernel",
    "pointer_gram",
    "extract_pvm",
    "effective_coupling",
    "oracle_residual",
    "oracle_check",
    "coherence_sweep",
)
logger = get_logger("Decolab.Numerics.Tripartite")

SYMMETRY_TOL = 1e-10
BELOW_LAMBDA0 = "induced coupling below λ0"
_ORACLE_CHUNK_ENTRIES = 2_000_000
_ORACLE_PADDING = 3
_COVERAGE_DOUBLINGS = 16


@dataclass(frozen=True, eq=False)
class MeasurementModel:
    """
    System, probe and pointer coupled through ``alpha A (x) Q + beta B (x) P`` with ``beta = 2 lam / alpha``.

    The probe is traced out; everything grid-level lives on ``grid`` and uses the pointer samples
    normalized under the grid weights.
    """

    hbar: float
    alpha: float
    lam: float
    observable: SystemObservable
    state: SystemState
    probe: BandlimitedFunction
    pointer0: BandlimitedFunction
    grid: PointerGrid

    def __post_init__(self):
        for name in ("hbar", "alpha", "lam"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise InvalidParameterError(name, value, "must be a positive finite number")
        if self.observable.dimension != self.state.dimension:
            raise InvalidParameterError(
                "state", self.state.dimension, f"observable has {self.observable.dimension} eigenvalues"
            )
        for name, func in (("probe", self.probe), ("pointer0", self.pointer0)):
            norm = func.spectrum.l2_norm_squared()
            if abs(norm - 1.0) > SYMMETRY_TOL:
                raise InvalidParameterError(name, norm, "wavefunction must be normalized")
        spec = self.probe.spectrum
        asymmetry = float(np.max(np.abs(np.abs(spec.interpolate(-spec.nodes)) - np.abs(spec.amps))))
        if asymmetry > SYMMETRY_TOL:
            raise InvalidParameterError("probe", asymmetry, "|psi~(-k)| must equal |psi~(k)|")

    @property
    def beta(self) -> float:
        return 2.0 * self.lam / self.alpha

    @property
    def kappa0(self) -> float:
        return self.probe.kappa

    @property
    def b0(self) -> float:
        return self.pointer0.kappa

    @property
    def dimension(self) -> int:
        return self.observable.dimension

    def with_alpha(self, alpha: float) -> MeasurementModel:
        return replace(self, alpha=float(alpha))

    def check_index(self, k: int) -> int:
        return self.observable.check_index(k)

    @cached_property
    def pointer_mass(self) -> float:
        """Pointer probability inside the grid window, ``sum u_i |Phi0(b_i)|^2``."""
        raw = np.asarray(position(self.pointer0, self.grid.points))
        return float(np.sum(self.grid.weights * np.abs(raw) ** 2))

    @cached_property
    def pointer_samples(self) -> np.ndarray:
        raw = np.asarray(position(self.pointer0, self.grid.points), dtype=np.complex128)
        return raw / np.sqrt(self.pointer_mass)

    @cached_property
    def overlap_matrix(self) -> np.ndarray:
        """``F(b_j - b_i)`` at ``[i, j]``, symmetrized since ``F`` is real and even."""
        b = self.grid.points
        values = np.asarray(autocorrelation(self.probe, self.beta * (b[None, :] - b[:, None]))).real
        return 0.5 * (values + values.T)


class ProbeCoverage(NamedTuple):
    half_width: float
    deficit: float


@dataclass(frozen=True)
class ProjectionValuedMeasure:
    projectors: list[OperatorKernel]
    remainder: OperatorKernel
    """Identity on the grid minus the sum of the projectors"""
    report: PVMReport


def thresholds(m: MeasurementModel) -> Thresholds:
    """
    Coupling thresholds: ``alpha_D`` for exact decoherence, ``lambda_0`` and ``alpha_0`` for exact pointer
    orthogonality. ``alpha_0`` only exists above ``lambda_0`` (strict).
    """
    a0 = min_gap(m.observable)
    alpha_d = 2.0 * m.hbar * m.kappa0 / a0
    lambda_0 = 2.0 * m.hbar * m.b0 / a0
    alpha_0: Optional[float] = None
    reason: Optional[str] = None
    if m.lam > lambda_0:
        alpha_0 = 4.0 * m.hbar * m.kappa0 / (a0 - 2.0 * m.hbar * m.b0 / m.lam)
        if not alpha_0 > alpha_d:
            raise NumericalContractError("alpha_0 - alpha_D", alpha_0 - alpha_d, 0.0)
    else:
        reason = BELOW_LAMBDA0
    logger.info(f"Thresholds: alpha_D={alpha_d:.6g}, lambda_0={lambda_0:.6g}, alpha_0={alpha_0}")
    return Thresholds(
        alpha_D=alpha_d,
        lambda_0=lambda_0,
        alpha_0=alpha_0,
        alpha_0_reason=reason,
        hbar=m.hbar,
        kappa0=m.kappa0,
        b0=m.b0,
        a0=a0,
        lam=m.lam,
    )


def _branch_frequency(m: MeasurementModel, k: int, l: int) -> float:  # noqa: E741
    a = m.observable.eigenvalues
    return m.alpha * float(a[k] - a[l]) / m.hbar


def _coherence_vanishes(m: MeasurementModel, k: int, l: int) -> bool:  # noqa: E741
    return k != l and abs(_branch_frequency(m, k, l)) >= 2.0 * m.kappa0


def coherence_kernel(m: MeasurementModel, k: int, l: int, b: float, b_prime: float) -> complex:  # noqa: E741
    """
    ``I_kl(b, b') = int dq exp(-i alpha (a_k - a_l) q / hbar) psi(q - beta b) conj(psi(q - beta b'))``.

    The integrand is a product of two type-``kappa0`` functions, so the result is exactly zero once
    ``alpha |a_k - a_l| / hbar`` reaches ``2 kappa0``.
    """
    m.check_index(k)
    m.check_index(l)
    if _coherence_vanishes(m, k, l):
        return 0j
    left = shift(m.probe, m.beta * b)
    right = conjugate(shift(m.probe, m.beta * b_prime))
    return complex(fourier_at(product(left, right), -_branch_frequency(m, k, l)))


def coherence_matrix(m: MeasurementModel, k: int, l: int) -> np.ndarray:  # noqa: E741
    """
    ``I_kl(b_i, b_j)`` on the pointer grid, from the spectral overlap
    ``2 pi exp(-i s' w) int psi~(k) conj(psi~(k - w)) exp(-i (s - s') k) dk`` with ``s = beta b``.
    """
    m.check_index(k)
    m.check_index(l)
    size = m.grid.size
    if _coherence_vanishes(m, k, l):
        return np.zeros((size, size), dtype=np.complex128)

    spec = m.probe.spectrum
    omega = _branch_frequency(m, k, l)
    lo, hi = max(-spec.kappa, omega - spec.kappa), min(spec.kappa, omega + spec.kappa)
    cuts = np.concatenate([[lo, hi], spec.breaks, omega + spec.breaks])
    cuts = np.unique(cuts[(cuts >= lo) & (cuts <= hi)])
    s = m.beta * m.grid.points
    extent = float(np.ptp(s)) * float(np.max(np.diff(cuts)))
    per_panel = nodes_for_phase(spec.per_panel, extent)
    if per_panel < 0:
        raise ResolutionError(int(0.75 * extent) + 32, MAX_PANEL_NODES, "coherence matrix")
    nodes, weights = composite_rule(cuts, per_panel)
    logger.debug(f"coherence matrix ({k}, {l}): {nodes.size} spectral nodes")

    density = 2.0 * np.pi * weights * spec.interpolate(nodes) * np.conj(spec.interpolate(nodes - omega))
    left = np.exp(-1j * np.multiply.outer(s, nodes))
    right = density[:, None] * np.exp(1j * np.multiply.outer(nodes, s))
    return (left @ right) * np.exp(-1j * s * omega)[None, :]


def _branch_pointer(m: MeasurementModel) -> np.ndarray:
    """``c_k exp(i lam a_k b_i / hbar) phi_i``, shape ``(N, P)``."""
    a = m.observable.eigenvalues
    phase = np.exp(1j * m.lam / m.hbar * np.multiply.outer(a, m.grid.points))
    return m.state.amps[:, None] * phase * m.pointer_samples[None, :]


def reduced_density(m: MeasurementModel) -> CompositeDensity:
    """System and pointer state after tracing out the probe, assembled from the coherence kernel."""
    n, size = m.dimension, m.grid.size
    branch = _branch_pointer(m)
    blocks = np.zeros((n, n, size, size), dtype=np.complex128)
    for k in range(n):
        for l in range(k, n):  # noqa: E741
            if _coherence_vanishes(m, k, l):
                continue
            block = np.outer(branch[k], np.conj(branch[l])) * coherence_matrix(m, k, l)
            if k == l:
                blocks[k, k] = 0.5 * (block + block.conj().T)
            else:
                blocks[k, l] = block
                blocks[l, k] = block.conj().T
    return CompositeDensity(m.grid, blocks)


def probe_coverage(m: MeasurementModel, tol: float = 1e-10) -> ProbeCoverage:
    """Smallest doubled half-width ``T`` with probe mass outside ``[-T, T]`` below ``tol``."""
    half_width = 8.0 / m.kappa0
    deficit = 1.0
    for _ in range(_COVERAGE_DOUBLINGS):
        deficit = max(0.0, 1.0 - mass_within(m.probe, half_width))
        if deficit < tol:
            logger.debug(f"probe coverage: T={half_width:.6g}, deficit={deficit:.3e}")
            return ProbeCoverage(half_width, deficit)
        half_width *= 2.0
    raise CoverageError(deficit, tol, half_width)


class _OracleGrid(NamedTuple):
    points: np.ndarray
    weights: np.ndarray
    step: float
    center: float
    reach: float
    deficit: float


def _oracle_grid(m: MeasurementModel, q_grid_size: Optional[int], coverage_tol: float) -> _OracleGrid:
    s = m.beta * m.grid.points
    spread = 0.5 * float(np.ptp(s))
    center = 0.5 * float(s[0] + s[-1])
    a = m.observable.eigenvalues
    omega_max = m.alpha * float(np.ptp(a)) / m.hbar
    kick_max = 0.5 * m.alpha * float(np.max(np.abs(a))) / m.hbar
    # branch products have type omega + 2 kappa0, a half-kicked probe has type kappa0 + kick
    step = 0.8 * min(2.0 * np.pi / (omega_max + 2.0 * m.kappa0), np.pi / (kick_max + m.kappa0))

    if q_grid_size is None:
        coverage = probe_coverage(m, coverage_tol)
        count = int(np.ceil(2.0 * (spread + coverage.half_width) / step)) + 1
        reach, deficit = coverage.half_width, coverage.deficit
    else:
        count = int(q_grid_size)
        reach = 0.5 * (count - 1) * step - spread
        deficit = 1.0 if reach <= 0 else max(0.0, 1.0 - mass_within(m.probe, reach))
        if deficit >= coverage_tol:
            raise CoverageError(deficit, coverage_tol, max(reach, 0.0))

    half = 0.5 * (count - 1) * step
    points = center - half + step * np.arange(count)
    weights = np.full(count, step)
    weights[0] = weights[-1] = 0.5 * step
    logger.debug(f"oracle q-grid: {count} points, step {step:.4g}, probe reach {reach:.6g}")
    return _OracleGrid(points, weights, step, center, reach, deficit)


def _evolved_branch(m: MeasurementModel, k: int, qgrid: _OracleGrid) -> np.ndarray:
    """
    Amplitude of ``|phi_k> |q_m> |b_j>`` after ``exp(-i (alpha a_k Q + beta b_j P) / hbar)`` acts on the probe,
    shape ``(M, P)``.

    ``[Q, P]`` is central, so half a position kick, one translation and another half kick is the exact propagator.
    The translation runs through the FFT of a zero-padded copy of the q-grid.
    """
    size = qgrid.points.size
    pad = _ORACLE_PADDING * size
    total = size + 2 * pad
    kick = 0.5 * m.alpha * float(m.observable.eigenvalues[k]) / m.hbar
    local = qgrid.points[0] - qgrid.center + qgrid.step * (np.arange(total) - pad)
    seed = np.exp(-1j * kick * local) * np.asarray(position(m.probe, local), dtype=np.complex128)
    seed_hat = fft(seed)
    wavenumbers = 2.0 * np.pi * fftfreq(total, d=qgrid.step)
    offsets = m.beta * m.grid.points - qgrid.center
    outgoing = np.exp(-1j * kick * qgrid.points)

    branch = np.empty((size, offsets.size), dtype=np.complex128)
    chunk = max(1, _ORACLE_CHUNK_ENTRIES // total)
    for start in range(0, offsets.size, chunk):
        delta = offsets[start : start + chunk]
        moved = ifft(seed_hat[:, None] * np.exp(-1j * np.multiply.outer(wavenumbers, delta)), axis=0)
        branch[:, start : start + chunk] = moved[pad : pad + size] * outgoing[:, None]
    return m.state.amps[k] * branch * m.pointer_samples[None, :]


def _run_oracle(m: MeasurementModel, q_grid_size: Optional[int], coverage_tol: float):
    if m.probe.closed_form is None:
        logger.warning(f"Probe {m.probe.label} has no closed form, the oracle falls back to spectral sums")
    qgrid = _oracle_grid(m, q_grid_size, coverage_tol)
    n, size = m.dimension, m.grid.size
    logger.debug(f"oracle: {n} branches of {qgrid.points.size} x {size} amplitudes")
    amplitudes = [_evolved_branch(m, k, qgrid) for k in range(n)]
    blocks = np.zeros((n, n, size, size), dtype=np.complex128)
    for k in range(n):
        for l in range(k, n):  # noqa: E741
            blocks[k, l] = amplitudes[k].T @ (qgrid.weights[:, None] * np.conj(amplitudes[l]))

    for k in range(n):
        blocks[k, k] = 0.5 * (blocks[k, k] + blocks[k, k].conj().T)
        for l in range(k + 1, n):  # noqa: E741
            blocks[l, k] = blocks[k, l].conj().T
    return CompositeDensity(m.grid, blocks), qgrid


def dense_oracle(
    m: MeasurementModel, q_grid_size: Optional[int] = None, *, coverage_tol: float = 1e-10
) -> CompositeDensity:
    """
    Brute-force reduced state: propagate every branch on an explicit probe grid and trace the probe by quadrature.

    Each branch starts from the sampled probe and is evolved under the coupling unitary on that grid; none of the
    analytic pointer phases enter. The probe position grid is uniform with a spacing that integrates the
    band-limited integrands exactly, wide enough that the probe mass beyond the shifted windows is below
    ``coverage_tol``.

    Raises
    ------
    CoverageError
        When an explicit ``q_grid_size`` cannot cover the shifted probes.
    """
    density, _ = _run_oracle(m, q_grid_size, coverage_tol)
    return density


def pointer_overlap_function(m: MeasurementModel) -> BandlimitedFunction:
    """
    ``F(eta) = 2 pi int |psi~(k)|^2 exp(i beta eta k) dk``, the probe autocorrelation at ``beta eta``.

    Real and even, of type ``beta kappa0``.
    """
    spec = m.probe.spectrum
    beta = m.beta
    density = Spectrum(
        kappa=beta * spec.kappa,
        nodes=beta * spec.nodes,
        weights=beta * spec.weights,
        amps=2.0 * np.pi * np.abs(spec.amps) ** 2 / beta,
        breaks=beta * spec.breaks,
        normalized=False,
    )

    def form(x, _probe=m.probe, _beta=beta):
        return autocorrelation(_probe, _beta * np.asarray(x, dtype=np.float64))

    return BandlimitedFunction(density, parity=Parity.EVEN, reality=Reality.REAL, closed_form=form, label="overlap")


def pointer_state(m: MeasurementModel, k: int) -> OperatorKernel:
    """``rho_k(b, b') = exp(i lam a_k (b - b') / hbar) F(b' - b) phi(b) conj(phi(b'))``."""
    m.check_index(k)
    b = m.grid.points
    phi = m.pointer_samples
    a_k = float(m.observable.eigenvalues[k])
    phase = np.exp(1j * m.lam * a_k / m.hbar * np.subtract.outer(b, b))
    entries = phase * m.overlap_matrix * np.outer(phi, np.conj(phi))
    return OperatorKernel(m.grid, entries, hermitian=True)


def orthogonality_kernel(m: MeasurementModel, k: int, l: int, b: float, b_prime: float) -> complex:  # noqa: E741
    """
    ``S_kl(b, b') = int db'' exp(i lam (a_l - a_k) b'' / hbar) |Phi0(b'')|^2 F(b' - b'') F(b'' - b)``.

    The integrand has type ``2 b0 + 2 beta kappa0``; past that frequency the kernel is exactly zero.

    Raises
    ------
    InvalidPairError
        When ``k == l``.
    """
    m.check_index(k)
    m.check_index(l)
    if k == l:
        raise InvalidPairError(k, l)
    a = m.observable.eigenvalues
    nu = m.lam * float(a[l] - a[k]) / m.hbar
    overlap = pointer_overlap_function(m)
    if abs(nu) >= 2.0 * m.b0 + 2.0 * overlap.kappa:
        return 0j
    density = product(m.pointer0, conjugate(m.pointer0))
    integrand = product(product(density, shift(overlap, b_prime)), shift(overlap, b))
    return complex(fourier_at(integrand, nu))


def pointer_gram(m: MeasurementModel) -> np.ndarray:
    """``g_kl = ||rho_k o rho_l||_HS`` on the pointer grid."""
    states = [pointer_state(m, k) for k in range(m.dimension)]
    gram = np.zeros((m.dimension, m.dimension))
    for k in range(m.dimension):
        for l in range(k, m.dimension):  # noqa: E741
            gram[k, l] = gram[l, k] = hs_norm(kernel_compose(states[k], states[l]))
    return gram


def _max_offdiag(matrix: np.ndarray) -> float:
    if matrix.shape[0] < 2:
        return 0.0
    mask = ~np.eye(matrix.shape[0], dtype=bool)
    return float(np.max(matrix[mask]))


def _difference(x: OperatorKernel, y: OperatorKernel) -> OperatorKernel:
    return OperatorKernel(x.grid, x.entries - y.entries)


def extract_pvm(
    m: MeasurementModel, rank_tol: float = 1e-8, *, tolerance: float = 1e-6, zero_tol: float = 1e-8
) -> ProjectionValuedMeasure:
    """
    Projectors onto the supports of the pointer states, plus the remainder ``Pi_0``.

    ``rank_tol`` is relative to the largest eigenvalue of each pointer state.

    Raises
    ------
    PreconditionError
        When two pointer states overlap by more than ``zero_tol``.
    """
    gram = pointer_gram(m)
    for k in range(m.dimension):
        for l in range(k + 1, m.dimension):  # noqa: E741
            if gram[k, l] > zero_tol:
                raise PreconditionError(k, l, float(gram[k, l]), zero_tol)

    root = np.sqrt(m.grid.weights)
    states = [pointer_state(m, k) for k in range(m.dimension)]
    projectors: list[OperatorKernel] = []
    support_dims: list[int] = []
    for state in states:
        matrix = weighted_matrix(state)
        values, vectors = np.linalg.eigh(0.5 * (matrix + matrix.conj().T))
        keep = values > rank_tol * values[-1]
        support = vectors[:, keep] / root[:, None]
        projectors.append(OperatorKernel(m.grid, support @ support.conj().T, hermitian=True))
        support_dims.append(int(np.count_nonzero(keep)))
    logger.debug(f"pointer state support dimensions: {support_dims}")

    identity = identity_kernel(m.grid)
    total = np.sum([p.entries for p in projectors], axis=0)
    remainder = OperatorKernel(m.grid, identity.entries - total, hermitian=True)

    pairwise = 0.0
    for k, left in enumerate(projectors):
        for l, right in enumerate(projectors):  # noqa: E741
            if k != l:
                pairwise = max(pairwise, hs_norm(kernel_compose(left, right)))
    idempotence = max(hs_norm(_difference(kernel_compose(p, p), p)) for p in [*projectors, remainder])
    completeness = hs_norm(OperatorKernel(m.grid, total + remainder.entries - identity.entries))
    reproduction = max(
        hs_norm(_difference(kernel_compose(p, state), state)) for p, state in zip(projectors, states)
    )
    report = PVMReport(
        rank_tol=rank_tol,
        support_dims=support_dims,
        pairwise_max=pairwise,
        idempotence_max=idempotence,
        completeness=completeness,
        reproduction_max=reproduction,
        tolerance=tolerance,
        passed=max(pairwise, idempotence, completeness, reproduction) <= tolerance,
    )
    return ProjectionValuedMeasure(projectors, remainder, report)


def _coupling_from(m: MeasurementModel, oracle: CompositeDensity) -> float:
    a = m.observable.eigenvalues
    populations = m.state.populations
    leverage = np.abs(a) * populations
    k = int(np.argmax(leverage))
    if leverage[k] == 0.0:
        logger.warning("No populated branch with a nonzero eigenvalue, the coupling phase is unobservable")
        return float("nan")
    b = m.grid.points
    phi = m.pointer_samples
    i = np.arange(m.grid.size - 1)
    j = i + 1
    expected = populations[k] * m.overlap_matrix[i, j] * phi[i] * np.conj(phi[j])
    observed = oracle.blocks[k, k, i, j]
    usable = np.abs(expected) > 1e-6 * np.max(np.abs(expected))
    slopes = np.angle(observed[usable] / expected[usable]) * m.hbar / (a[k] * (b[i] - b[j])[usable])
    return float(np.median(slopes))


def effective_coupling(
    m: MeasurementModel, q_grid_size: Optional[int] = None, *, coverage_tol: float = 1e-10
) -> float:
    """System-pointer coupling read off the phase of the oracle's diagonal blocks."""
    oracle, _ = _run_oracle(m, q_grid_size, coverage_tol)
    return _coupling_from(m, oracle)


def oracle_residual(m: MeasurementModel, q_grid_size: Optional[int] = None, *, coverage_tol: float = 1e-10) -> float:
    oracle, _ = _run_oracle(m, q_grid_size, coverage_tol)
    return float(np.max(np.abs(reduced_density(m).blocks - oracle.blocks)))


def oracle_check(
    m: MeasurementModel,
    *,
    tolerance: float = 1e-6,
    q_grid_size: Optional[int] = None,
    coverage_tol: float = 1e-10,
) -> OracleCheck:
    oracle, qgrid = _run_oracle(m, q_grid_size, coverage_tol)
    residual = float(np.max(np.abs(reduced_density(m).blocks - oracle.blocks)))
    return OracleCheck(
        alpha=m.alpha,
        beta=m.beta,
        residual=residual,
        effective_coupling=_coupling_from(m, oracle),
        q_grid_size=int(qgrid.points.size),
        coverage_half_width=qgrid.reach,
        coverage_deficit=qgrid.deficit,
        passed=residual <= tolerance,
    )


def _sweep_point(
    m: MeasurementModel,
    limits: Thresholds,
    with_oracle: bool,
    zero_tol: float,
    q_grid_size: Optional[int],
    coverage_tol: float,
) -> tuple[SweepPoint, list[list[float]]]:
    coherence = reduced_density(m).max_offdiag_norm()
    gram = pointer_gram(m)
    overlap = _max_offdiag(gram)
    residual = oracle_residual(m, q_grid_size, coverage_tol=coverage_tol) if with_oracle else None
    point = SweepPoint(
        alpha=m.alpha,
        beta=m.beta,
        max_offdiag_coherence=coherence,
        max_pointer_overlap=overlap,
        oracle_residual=residual,
        decohered=m.alpha > limits.alpha_D and coherence == 0.0,
        orthogonal=limits.alpha_0 is not None and m.alpha > limits.alpha_0 and overlap <= zero_tol,
    )
    logger.info(f"alpha={m.alpha:.6g}: coherence={coherence:.3e}, pointer overlap={overlap:.3e}")
    return point, gram.tolist()


def coherence_sweep(
    m: MeasurementModel,
    alphas: Sequence[float],
    *,
    n_jobs: int = 1,
    with_oracle: bool = True,
    zero_tol: float = 1e-8,
    q_grid_size: Optional[int] = None,
    coverage_tol: float = 1e-10,
) -> DecoherenceReport:
    """
    Recompute the reduced state, pointer Gram matrix and (optionally) the oracle residual at every coupling.

    Points are evaluated with joblib and returned in sweep order.
    """
    values = [float(alpha) for alpha in alphas]
    if not values or any(alpha <= 0 for alpha in values) or np.any(np.diff(values) <= 0):
        raise InvalidParameterError("alphas", values, "sweep couplings must be positive and strictly increasing")
    limits = thresholds(m)
    logger.info(f"Sweeping {len(values)} couplings over {n_jobs} worker(s)")
    results = Parallel(n_jobs=n_jobs)(
        delayed(_sweep_point)(m.with_alpha(alpha), limits, with_oracle, zero_tol, q_grid_size, coverage_tol)
        for alpha in values
    )
    return DecoherenceReport(
        thresholds=limits,
        points=[point for point, _ in results],
        pointer_grams=[gram for _, gram in results],
    )

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
from pathlib import Path
from typing import Any, Callable, Optional

import msgspec
import numpy as np
import pandas as pd

from decolab.errors import (
    ConfigError,
    CoverageError,
    NumericalContractError,
    PreconditionError,
    UnknownSubcommandError,
)
from decolab.models.config import ExperimentConfig, FunctionKind, OutputFormat, StateConfig
from decolab.models.encoder import dumps
from decolab.models.spectrum import BandlimitedFunction
from decolab.numerics.bandlimited import make_bspline, make_gamma_reciprocal
from decolab.numerics.paley_wiener import standard_frequency_grid, verify_lemma
from decolab.numerics.quantum_core import PointerGrid, SystemObservable, SystemState, min_gap
from decolab.numerics.tripartite import (
    MeasurementModel,
    coherence_sweep,
    extract_pvm,
    oracle_check,
    pointer_gram,
    thresholds,
)
from decolab.numerics.vonneumann import (
    VonNeumannModel,
    gaussian_factor_table,
    postulated_reduction,
    premeasurement_density,
)
from decolab.tooling import get_logger

__all__ = (
    "Subcommand",
    "RunOptions",
    "RunResult",
    "build_state",
    "build_grid",
    "build_model",
    "run",
)
logger = get_logger("Decolab.Experiments")

POINTER_RANGE_CAP = 200.0
PURITY_TOL = 1e-8


class Subcommand(str, Enum):
    THRESHOLDS = "thresholds"
    COHERENCE_SWEEP = "coherence-sweep"
    ORTHOGONALITY = "orthogonality"
    DENSE_CHECK = "dense-check"
    LEMMA = "lemma"
    BASELINE = "baseline"


@dataclass(frozen=True)
class RunOptions:
    out: Optional[Path] = None
    """Overrides ``output.path`` of the configuration"""
    format: Optional[OutputFormat] = None
    """Overrides ``output.format`` of the configuration"""
    seed: Optional[int] = None
    n_jobs: int = 1
    with_oracle: bool = True


@dataclass
class RunResult:
    subcommand: Subcommand
    content: str
    """The rendered artifact, also what goes to stdout without an output path"""
    path: Optional[Path] = None
    summary: list[str] = field(default_factory=list)
    """Human-readable lines for the console"""


def build_state(config: StateConfig, spectral_n: int) -> BandlimitedFunction:
    n = config.n or spectral_n
    if config.kind is FunctionKind.GAMMA_RECIPROCAL:
        return make_gamma_reciprocal(config.g_a, config.g_b, n, normalize=True)
    order = {FunctionKind.FEJER: 2, FunctionKind.JACKSON: 4}.get(config.kind, config.order)
    return make_bspline(config.kappa, n, order, normalize=True)


def build_grid(config: ExperimentConfig, pointer0: BandlimitedFunction) -> PointerGrid:
    grids = config.grids
    if grids.pointer_range != "auto":
        return PointerGrid.gauss_legendre(float(grids.pointer_range), grids.pointer_n)
    try:
        grid = PointerGrid.auto(pointer0, grids.pointer_n, config.tolerances.pointer_mass, cap=POINTER_RANGE_CAP)
    except CoverageError as exc:
        raise ConfigError(
            [
                f"grids.pointer_range: auto range reached B={exc.half_width:.6g} with pointer mass deficit "
                f"{exc.deficit:.3e} above {exc.tolerance:.1e}, give an explicit range"
            ]
        ) from exc
    logger.debug(f"auto pointer range: B={grid.half_width:.6g}")
    return grid


def _system(config: ExperimentConfig) -> tuple[SystemObservable, SystemState]:
    return SystemObservable(config.system.eigenvalues), SystemState(config.system.amplitudes)


def build_model(config: ExperimentConfig, alpha: Optional[float] = None) -> MeasurementModel:
    observable, state = _system(config)
    spectral_n = config.grids.spectral_n
    probe = build_state(config.probe, spectral_n)
    pointer0 = build_state(config.pointer, spectral_n)
    return MeasurementModel(
        hbar=config.hbar,
        alpha=config.couplings.alphas()[0] if alpha is None else alpha,
        lam=config.couplings.lam,
        observable=observable,
        state=state,
        probe=probe,
        pointer0=pointer0,
        grid=build_grid(config, pointer0),
    )


def _bool_column(values: list[bool]) -> list[str]:
    return ["true" if value else "false" for value in values]


def _render(table: Optional[pd.DataFrame], payload: Any, fmt: OutputFormat) -> str:
    if fmt is OutputFormat.CSV and table is not None:
        return table.to_csv(index=False, lineterminator="\n")
    return dumps(payload, indent=True).decode("utf-8") + "\n"


def _finish(
    subcommand: Subcommand,
    config: ExperimentConfig,
    options: RunOptions,
    table: Optional[pd.DataFrame],
    payload: Any,
    summary: list[str],
) -> RunResult:
    fmt = options.format or config.output.format
    if table is None and fmt is OutputFormat.CSV:
        logger.info(f"{subcommand.value} emits JSON only")
        fmt = OutputFormat.JSON
    content = _render(table, payload, fmt)
    path = options.out or config.output.path
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(content, encoding="utf-8", newline="\n")
        logger.info(f"Wrote {subcommand.value} {fmt.value} to {path}")
    return RunResult(subcommand, content, path, summary)


def _envelope(config: ExperimentConfig, options: RunOptions, **data: Any) -> dict[str, Any]:
    return {"config_hash": config.config_hash, "seed": options.seed, **data}


def run_thresholds(config: ExperimentConfig, options: RunOptions) -> RunResult:
    limits = thresholds(build_model(config))
    alpha_0 = "absent" if limits.alpha_0 is None else f"{limits.alpha_0:.12g}"
    summary = [
        f"alpha_D={limits.alpha_D:.12g}",
        f"lambda_0={limits.lambda_0:.12g}",
        f"alpha_0={alpha_0}" + (f" ({limits.alpha_0_reason})" if limits.alpha_0_reason else ""),
    ]
    table = pd.DataFrame(
        [
            {
                "alpha_D": limits.alpha_D,
                "lambda_0": limits.lambda_0,
                "alpha_0": limits.alpha_0,
                "config_hash": config.config_hash,
            }
        ]
    )
    payload = _envelope(config, options, thresholds=limits)
    return _finish(Subcommand.THRESHOLDS, config, options, table, payload, summary)


def run_coherence_sweep(config: ExperimentConfig, options: RunOptions) -> RunResult:
    model = build_model(config)
    report = coherence_sweep(
        model,
        config.couplings.alphas(),
        n_jobs=options.n_jobs,
        with_oracle=options.with_oracle,
        zero_tol=config.tolerances.zero,
        q_grid_size=config.grids.q_grid_size,
        coverage_tol=config.tolerances.coverage,
    )
    report = msgspec.structs.replace(report, config_hash=config.config_hash)
    table = pd.DataFrame(
        {
            "alpha": [p.alpha for p in report.points],
            "beta": [p.beta for p in report.points],
            "max_offdiag_coherence": [p.max_offdiag_coherence for p in report.points],
            "max_pointer_overlap": [p.max_pointer_overlap for p in report.points],
            "oracle_residual": [p.oracle_residual for p in report.points],
            "decohered": _bool_column([p.decohered for p in report.points]),
            "orthogonal": _bool_column([p.orthogonal for p in report.points]),
            "config_hash": config.config_hash,
        }
    )
    result = _finish(Subcommand.COHERENCE_SWEEP, config, options, table, report, [])
    residuals = [p.oracle_residual for p in report.points if p.oracle_residual is not None]
    if residuals and max(residuals) > config.tolerances.quadrature:
        raise NumericalContractError("oracle residual", max(residuals), config.tolerances.quadrature)
    return result


def run_orthogonality(config: ExperimentConfig, options: RunOptions) -> RunResult:
    base = build_model(config)
    limits = thresholds(base)
    rows: list[dict[str, Any]] = []
    entries: list[dict[str, Any]] = []
    violations: list[tuple[str, float, float]] = []
    for alpha in config.couplings.alphas():
        model = base.with_alpha(alpha)
        gram = pointer_gram(model)
        offdiag = gram[~np.eye(gram.shape[0], dtype=bool)]
        overlap = float(np.max(offdiag)) if offdiag.size else 0.0
        claimed = limits.alpha_0 is not None and alpha > limits.alpha_0
        if claimed and overlap > config.tolerances.zero:
            violations.append(("pointer overlap above alpha_0", overlap, config.tolerances.zero))
        pvm_report = None
        try:
            pvm_report = extract_pvm(
                model, config.tolerances.rank, tolerance=config.tolerances.quadrature, zero_tol=config.tolerances.zero
            ).report
        except PreconditionError as exc:
            logger.info(f"alpha={alpha:.6g}: no projection valued measure ({exc})")
        if pvm_report is not None and not pvm_report.passed:
            worst = max(
                pvm_report.pairwise_max,
                pvm_report.idempotence_max,
                pvm_report.completeness,
                pvm_report.reproduction_max,
            )
            violations.append(("projection valued measure residual", worst, pvm_report.tolerance))
        rows.append(
            {
                "alpha": alpha,
                "beta": model.beta,
                "max_pointer_overlap": overlap,
                "orthogonal": "true" if claimed and overlap <= config.tolerances.zero else "false",
                "pvm_passed": "" if pvm_report is None else ("true" if pvm_report.passed else "false"),
                "support_dims": "" if pvm_report is None else " ".join(str(d) for d in pvm_report.support_dims),
                "pairwise_max": None if pvm_report is None else pvm_report.pairwise_max,
                "idempotence_max": None if pvm_report is None else pvm_report.idempotence_max,
                "completeness": None if pvm_report is None else pvm_report.completeness,
                "reproduction_max": None if pvm_report is None else pvm_report.reproduction_max,
                "config_hash": config.config_hash,
            }
        )
        entries.append({"alpha": alpha, "pointer_gram": gram.tolist(), "pvm": pvm_report})
    payload = _envelope(config, options, thresholds=limits, points=entries)
    result = _finish(Subcommand.ORTHOGONALITY, config, options, pd.DataFrame(rows), payload, [])
    if violations:
        raise NumericalContractError(*violations[0])
    return result


def run_dense_check(config: ExperimentConfig, options: RunOptions) -> RunResult:
    base = build_model(config)
    checks = [
        oracle_check(
            base.with_alpha(alpha),
            tolerance=config.tolerances.quadrature,
            q_grid_size=config.grids.q_grid_size,
            coverage_tol=config.tolerances.coverage,
        )
        for alpha in config.couplings.alphas()
    ]
    table = pd.DataFrame([msgspec.structs.asdict(check) for check in checks])
    table["passed"] = _bool_column([check.passed for check in checks])
    table["config_hash"] = config.config_hash
    summary = [
        f"alpha={check.alpha:.6g}: residual {check.residual:.3e}, effective coupling {check.effective_coupling:.9g} "
        f"(configured {config.couplings.lam:.9g})"
        for check in checks
    ]
    result = _finish(
        Subcommand.DENSE_CHECK, config, options, table, _envelope(config, options, checks=checks), summary
    )
    worst = max(check.residual for check in checks)
    if worst > config.tolerances.quadrature:
        raise NumericalContractError("oracle residual", worst, config.tolerances.quadrature)
    return result


def run_lemma(config: ExperimentConfig, options: RunOptions) -> RunResult:
    spectral_n = config.grids.spectral_n
    reports = {}
    for name, state_config in (("probe", config.probe), ("pointer", config.pointer)):
        state = build_state(state_config, spectral_n)
        reports[name] = verify_lemma(
            state, standard_frequency_grid(state.kappa), tolerance=config.tolerances.quadrature
        )
    summary = [
        f"{name} ({report.label}): {'passed' if report.passed else 'FAILED'}" for name, report in reports.items()
    ]
    result = _finish(Subcommand.LEMMA, config, options, None, _envelope(config, options, **reports), summary)
    failed = [report for report in reports.values() if not report.passed]
    if failed:
        worst = max(max(r.quadrature_magnitudes[i] for i, a in enumerate(r.frequencies) if a > r.tau) for r in failed)
        raise NumericalContractError("transform beyond the type", worst, config.tolerances.quadrature)
    return result


def run_baseline(config: ExperimentConfig, options: RunOptions) -> RunResult:
    observable, state = _system(config)
    pointer0 = build_state(config.pointer, config.grids.spectral_n)
    model = VonNeumannModel.from_bandlimited(
        config.hbar, config.couplings.lam, observable, state, pointer0, build_grid(config, pointer0)
    )
    rho = premeasurement_density(model)
    purity = rho.purity()
    reduced_trace = postulated_reduction(rho).trace()
    delta_a = min_gap(observable) if observable.dimension > 1 else 0.0
    table = gaussian_factor_table(config.couplings.alphas(), delta_a, hbar=config.hbar)
    table["premeasurement_purity"] = purity
    table["reduced_trace"] = reduced_trace
    table["config_hash"] = config.config_hash
    payload = _envelope(
        config,
        options,
        premeasurement_purity=purity,
        reduced_trace=reduced_trace,
        gaussian_factors=table.drop(columns="config_hash").to_dict(orient="records"),
    )
    summary = [f"premeasurement purity {purity:.12g}, reduced trace {reduced_trace:.12g}"]
    result = _finish(Subcommand.BASELINE, config, options, table, payload, summary)
    if abs(purity - 1.0) > PURITY_TOL:
        raise NumericalContractError("premeasurement purity defect", abs(purity - 1.0), PURITY_TOL)
    return result


_RUNNERS: dict[Subcommand, Callable[[ExperimentConfig, RunOptions], RunResult]] = {
    Subcommand.THRESHOLDS: run_thresholds,
    Subcommand.COHERENCE_SWEEP: run_coherence_sweep,
    Subcommand.ORTHOGONALITY: run_orthogonality,
    Subcommand.DENSE_CHECK: run_dense_check,
    Subcommand.LEMMA: run_lemma,
    Subcommand.BASELINE: run_baseline,
}


def run(subcommand: str | Subcommand, config_path: Path, options: Optional[RunOptions] = None) -> RunResult:
    """
    Load ``config_path`` and run one subcommand.

    Raises
    ------
    UnknownSubcommandError
        For a name that is not a :class:`Subcommand`.
    ConfigError
        When the configuration does not validate or cannot serve the subcommand.
    NumericalContractError
        When a checked tolerance is violated; the artifact is still written first.
    """
    try:
        command = Subcommand(subcommand)
    except ValueError as exc:
        raise UnknownSubcommandError(str(subcommand), [item.value for item in Subcommand]) from exc
    config = ExperimentConfig.load(config_path)
    options = options or RunOptions()
    logger.info(f"Running {command.value} with config {config_path} ({config.config_hash[:12]})")
    return _RUNNERS[command](config, options)

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

import copy
from io import StringIO
from pathlib import Path

import orjson
import pandas as pd
import pytest

from decolab.errors import ConfigError, UnknownSubcommandError
from decolab.experiments import RunOptions, Subcommand, build_grid, build_model, run
from decolab.models import ExperimentConfig, OutputFormat

BASE = {
    "hbar": 1.0,
    "system": {"eigenvalues": [0.0, 1.0], "amplitudes_re": [0.7071067811865476, 0.7071067811865476]},
    "probe": {"kind": "fejer", "kappa": 1.0},
    "pointer": {"kind": "fejer", "kappa": 0.5},
    "couplings": {"lambda": 2.0, "alpha_sweep": {"min": 1.0, "max": 3.0, "steps": 3}},
    "grids": {"spectral_n": 64, "pointer_n": 48, "pointer_range": 20.0},
}


@pytest.fixture
def write_config(tmp_path: Path):
    def writer(**overrides) -> Path:
        data = copy.deepcopy(BASE)
        data.update(overrides)
        path = tmp_path / "experiment.json"
        path.write_bytes(orjson.dumps(data))
        return path

    return writer


def test_thresholds_summary(write_config):
    result = run("thresholds", write_config())
    assert result.summary == ["alpha_D=2", "lambda_0=1", "alpha_0=8"]


def test_thresholds_below_lambda_0(write_config):
    result = run(Subcommand.THRESHOLDS, write_config(couplings={"lambda": 0.5, "alpha": 1.0}))
    assert result.summary[-1] == "alpha_0=absent (induced coupling below λ0)"


def test_coherence_sweep_csv(write_config, tmp_path: Path):
    out = tmp_path / "results" / "sweep.csv"
    result = run("coherence-sweep", write_config(), RunOptions(out=out, with_oracle=False))
    assert result.path == out
    text = out.read_text(encoding="utf-8")
    assert text == result.content
    header = text.splitlines()[0]
    assert header == (
        "alpha,beta,max_offdiag_coherence,max_pointer_overlap,oracle_residual,decohered,orthogonal,config_hash"
    )
    table = pd.read_csv(StringIO(text), dtype={"decohered": str, "orthogonal": str})
    assert table["alpha"].tolist() == [1.0, 2.0, 3.0]
    assert table["decohered"].tolist() == ["false", "false", "true"]
    assert table["orthogonal"].tolist() == ["false", "false", "false"]
    assert table["max_offdiag_coherence"].iloc[2] == 0.0
    assert table["oracle_residual"].isna().all()
    assert table["config_hash"].nunique() == 1


def test_coherence_sweep_json_with_oracle(write_config):
    path = write_config(couplings={"lambda": 2.0, "alpha_sweep": {"min": 1.0, "max": 3.0, "steps": 2}})
    result = run("coherence-sweep", path, RunOptions(format=OutputFormat.JSON))
    payload = orjson.loads(result.content)
    assert payload["thresholds"]["alpha_D"] == 2.0
    assert all(point["oracle_residual"] <= 1e-6 for point in payload["points"])
    assert payload["config_hash"] == ExperimentConfig.load(path).config_hash


def test_coherence_sweep_csv_is_reproducible(write_config, tmp_path: Path):
    path = write_config(couplings={"lambda": 2.0, "alpha_sweep": {"min": 1.0, "max": 3.0, "steps": 2}})
    first, second = tmp_path / "first.csv", tmp_path / "second.csv"
    run("coherence-sweep", path, RunOptions(out=first))
    run("coherence-sweep", path, RunOptions(out=second))
    assert first.read_bytes() == second.read_bytes()


def test_orthogonality_below_lambda_0_has_no_measure(write_config):
    path = write_config(couplings={"lambda": 0.5, "alpha_sweep": {"min": 5.0, "max": 10.0, "steps": 2}})
    result = run("orthogonality", path)
    table = pd.read_csv(StringIO(result.content), dtype={"orthogonal": str})
    assert table["orthogonal"].tolist() == ["false", "false"]
    assert (table["max_pointer_overlap"] > 1e-3).all()
    assert table["pvm_passed"].isna().all()


def test_dense_check_reports_the_coupling(write_config):
    result = run("dense-check", write_config(couplings={"lambda": 2.0, "alpha": 3.0}))
    table = pd.read_csv(StringIO(result.content), dtype={"passed": str})
    assert table["passed"].tolist() == ["true"]
    assert table["residual"].iloc[0] <= 1e-6
    assert table["effective_coupling"].iloc[0] == pytest.approx(2.0, abs=1e-5)
    assert "configured 2" in result.summary[0]


def test_lemma_is_json_even_when_csv_is_asked(write_config):
    result = run("lemma", write_config(), RunOptions(format=OutputFormat.CSV, seed=17))
    payload = orjson.loads(result.content)
    assert payload["seed"] == 17
    assert payload["probe"]["passed"] and payload["pointer"]["passed"]
    assert payload["pointer"]["tau"] == 0.5


def test_baseline_table(write_config):
    result = run("baseline", write_config())
    table = pd.read_csv(StringIO(result.content))
    assert table["alpha"].tolist() == [1.0, 2.0, 3.0]
    assert table["premeasurement_purity"].iloc[0] == pytest.approx(1.0, abs=1e-8)
    assert table["reduced_trace"].iloc[0] == pytest.approx(1.0, abs=1e-8)
    assert table["log_factor"].tolist() == pytest.approx([-0.25, -1.0, -2.25])


def test_unknown_subcommand(write_config):
    with pytest.raises(UnknownSubcommandError):
        run("collapse", write_config())


def test_auto_range_for_slow_pointer_is_a_config_error(write_config):
    path = write_config(grids={"spectral_n": 64, "pointer_n": 48, "pointer_range": "auto"})
    with pytest.raises(ConfigError) as excinfo:
        run("thresholds", path)
    assert excinfo.value.messages[0].startswith("grids.pointer_range")


def test_auto_range_for_jackson_pointer(write_config):
    config = ExperimentConfig.load(
        write_config(
            pointer={"kind": "jackson", "kappa": 0.5},
            grids={"spectral_n": 64, "pointer_n": 48, "pointer_range": "auto"},
            tolerances={"pointer_mass": 1e-8},
        )
    )
    model = build_model(config)
    assert model.grid.half_width == build_grid(config, model.pointer0).half_width
    assert model.alpha == 1.0

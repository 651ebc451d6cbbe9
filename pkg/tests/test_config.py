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
from pathlib import Path

import numpy as np
import orjson
import pytest

from decolab.errors import ConfigError
from decolab.models import ExperimentConfig, FunctionKind, OutputFormat

QUBIT = {
    "hbar": 1.0,
    "system": {"eigenvalues": [0.0, 1.0], "amplitudes_re": [0.7071067811865476, 0.7071067811865476]},
    "probe": {"kind": "fejer", "kappa": 1.0},
    "pointer": {"kind": "fejer", "kappa": 0.5},
    "couplings": {"lambda": 2.0, "alpha_sweep": {"min": 1.0, "max": 3.0, "steps": 5}},
    "grids": {"spectral_n": 64, "pointer_n": 48, "pointer_range": 20.0},
}


def _with(**changes) -> dict:
    data = copy.deepcopy(QUBIT)
    for dotted, value in changes.items():
        *parents, leaf = dotted.split("__")
        target = data
        for part in parents:
            target = target.setdefault(part, {})
        if value is None:
            target.pop(leaf, None)
        else:
            target[leaf] = value
    return data


def test_qubit_config_parses_with_defaults():
    config = ExperimentConfig.from_dict(QUBIT)
    assert config.couplings.lam == 2.0
    assert config.couplings.alphas() == [1.0, 1.5, 2.0, 2.5, 3.0]
    assert config.probe.kind is FunctionKind.FEJER
    assert config.probe.type_width == 1.0
    assert config.tolerances.quadrature == 1e-6
    assert config.tolerances.zero == 1e-8
    assert config.output.format is OutputFormat.CSV
    assert config.grids.q_grid_size is None


def test_single_alpha_is_a_one_point_sweep():
    config = ExperimentConfig.from_dict(_with(couplings={"lambda": 0.5, "alpha": 4.0}))
    assert config.couplings.alphas() == [4.0]


def test_lambda_alias_round_trips_into_canonical_form():
    canonical = ExperimentConfig.from_dict(QUBIT).canonical()
    assert canonical["couplings"]["lambda"] == 2.0
    assert "lam" not in canonical["couplings"]


def test_config_hash_ignores_key_order():
    reordered = dict(reversed(list(QUBIT.items())))
    assert ExperimentConfig.from_dict(reordered).config_hash == ExperimentConfig.from_dict(QUBIT).config_hash
    changed = ExperimentConfig.from_dict(_with(couplings__lambda=2.5))
    assert changed.config_hash != ExperimentConfig.from_dict(QUBIT).config_hash


def test_amplitudes_slightly_off_are_renormalized(caplog):
    config = ExperimentConfig.from_dict(_with(system__amplitudes_re=[0.7071068, 0.7071068]))
    assert np.sum(np.abs(config.system.amplitudes) ** 2) == pytest.approx(1.0, abs=1e-14)
    assert any("Renormalizing" in record.getMessage() for record in caplog.records)


@pytest.mark.parametrize(
    ("changes", "location"),
    [
        ({"system__amplitudes_re": [1.0, 1.0]}, "system"),
        ({"system__eigenvalues": [1.0, 1.0]}, "system.eigenvalues"),
        ({"system__eigenvalues": [0.0, 1.0, 2.0]}, "system"),
        ({"system__eigenvalues": [0.0], "system__amplitudes_re": [1.0]}, "system.eigenvalues"),
        ({"probe__kappa": -1.0}, "probe.kappa"),
        ({"probe__kappa": None}, "probe"),
        ({"pointer__kind": "lorentzian"}, "pointer.kind"),
        ({"couplings": {"lambda": 1.0}}, "couplings"),
        ({"couplings__alpha_sweep": {"min": 3.0, "max": 1.0, "steps": 4}}, "couplings.alpha_sweep"),
        ({"grids__pointer_range": "wide"}, "grids.pointer_range"),
        ({"tolerances": {"zero": 0.0}}, "tolerances.zero"),
        ({"unexpected": True}, "unexpected"),
    ],
)
def test_invalid_configs_name_the_field(changes, location):
    with pytest.raises(ConfigError) as excinfo:
        ExperimentConfig.from_dict(_with(**changes))
    assert any(message.startswith(location) for message in excinfo.value.messages)


def test_bspline_needs_order_and_gamma_needs_its_parameters():
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(_with(probe={"kind": "bspline", "kappa": 1.0}))
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(_with(probe={"kind": "gamma_reciprocal", "g_a": 2.0}))
    config = ExperimentConfig.from_dict(_with(probe={"kind": "gamma_reciprocal", "g_a": 2.0, "g_b": 0.5}))
    assert config.probe.type_width == pytest.approx(0.5 * np.pi)


def test_load_reports_missing_and_malformed_files(tmp_path: Path):
    with pytest.raises(ConfigError):
        ExperimentConfig.load(tmp_path / "absent.json")
    broken = tmp_path / "broken.json"
    broken.write_text("{not json", encoding="utf-8")
    with pytest.raises(ConfigError):
        ExperimentConfig.load(broken)
    good = tmp_path / "qubit.json"
    good.write_bytes(orjson.dumps(QUBIT))
    assert ExperimentConfig.load(good).config_hash == ExperimentConfig.from_dict(QUBIT).config_hash


def test_shipped_configs_validate():
    root = Path(__file__).absolute().parent.parent / "configs"
    paths = sorted(root.glob("*.json"))
    assert paths
    for path in paths:
        ExperimentConfig.load(path)

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

import hashlib
from typing import Any

import numpy as np
import orjson

__all__ = (
    "config_hash",
    "split_complex",
    "join_complex",
)


def config_hash(data: dict[str, Any]) -> str:
    """
    Hash a configuration mapping independently of key order.

    Parameters
    ----------
    data : dict[str, Any]
        The (already validated) configuration as plain data

    Returns
    -------
    str
        Hex SHA-256 of the sorted-key orjson dump
    """
    dumped = orjson.dumps(data, option=orjson.OPT_SORT_KEYS | orjson.OPT_SERIALIZE_NUMPY)
    return hashlib.sha256(dumped).hexdigest()


def split_complex(values: np.ndarray) -> dict[str, list]:
    arr = np.asarray(values, dtype=np.complex128)
    return {"re": arr.real.tolist(), "im": arr.imag.tolist()}


def join_complex(re: Any, im: Any) -> np.ndarray:
    return np.asarray(re, dtype=np.float64) + 1j * np.asarray(im, dtype=np.float64)

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

from functools import lru_cache

import numpy as np

__all__ = (
    "MAX_PANEL_NODES",
    "gauss_legendre",
    "barycentric_weights",
    "composite_rule",
    "barycentric_eval",
    "nodes_for_phase",
)

MAX_PANEL_NODES = 4096
_CHUNK = 8192


@lru_cache(maxsize=64)
def _leggauss(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(n: int, lo: float = -1.0, hi: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """
    Gauss-Legendre nodes and weights mapped to ``[lo, hi]``, nodes ascending.

    Parameters
    ----------
    n : int
        Node count
    lo : float
        Left end of the interval
    hi : float
        Right end of the interval

    Returns
    -------
    tuple[np.ndarray, np.ndarray]
        The nodes and the weights
    """
    x, w = _leggauss(int(n))
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    return mid + half * x, half * w


@lru_cache(maxsize=64)
def barycentric_weights(n: int) -> np.ndarray:
    # closed form for Legendre points: (-1)^j sqrt((1 - x_j^2) w_j)
    x, w = _leggauss(int(n))
    bw = np.sqrt((1.0 - x * x) * w)
    bw[1::2] *= -1.0
    bw.setflags(write=False)
    return bw


def composite_rule(breaks: np.ndarray, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre with ``m`` nodes on every panel between consecutive breakpoints."""
    nodes = []
    weights = []
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        if hi <= lo:
            continue
        x, w = gauss_legendre(m, lo, hi)
        nodes.append(x)
        weights.append(w)
    if not nodes:
        return np.empty(0), np.empty(0)
    return np.concatenate(nodes), np.concatenate(weights)


def barycentric_eval(lo: float, hi: float, values: np.ndarray, x: np.ndarray) -> np.ndarray:
    """
    Evaluate the polynomial interpolant through ``values`` sampled at the Gauss-Legendre
    nodes of ``[lo, hi]`` (second barycentric form).
    """
    n = values.shape[0]
    t = (2.0 * np.asarray(x, dtype=np.float64) - (hi + lo)) / (hi - lo)
    ref, _ = _leggauss(n)
    bw = barycentric_weights(n)
    result = np.empty(t.shape, dtype=np.result_type(values.dtype, np.float64))
    for start in range(0, t.size, _CHUNK):
        tc = t[start : start + _CHUNK]
        diff = tc[:, None] - ref[None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            frac = bw[None, :] / diff
            chunk = (frac @ values) / frac.sum(axis=1)
        hit_rows, hit_cols = np.nonzero(diff == 0.0)
        if hit_rows.size:
            chunk[hit_rows] = values[hit_cols]
        result[start : start + _CHUNK] = chunk
    return result


def nodes_for_phase(base: int, phase_extent: float, cap: int = MAX_PANEL_NODES) -> int:
    """
    Node count per panel that resolves ``exp(i t k)`` where ``phase_extent`` bounds ``|t| * panel_width``.

    Returns ``-1`` when the requirement exceeds ``cap``.
    """
    need = max(int(base), int(np.ceil(0.75 * abs(phase_extent))) + 32)
    if need > cap:
        return -1
    return need

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

__all__ = (
    "log_gamma",
    "reciprocal_gamma_pair",
)

_LANCZOS_G = 7.0
_LANCZOS_X0 = 0.99999999999980993
_LANCZOS_P = np.array(
    [
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ]
)
_HALF_LOG_2PI = 0.5 * np.log(2.0 * np.pi)


def _log_gamma_right(z: np.ndarray) -> np.ndarray:
    # Lanczos, valid for Re z >= 1/2
    zm = z - 1.0
    series = _LANCZOS_X0 + np.sum(_LANCZOS_P[:, None] / (zm[None, :] + np.arange(1, 9)[:, None]), axis=0)
    t = zm + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (zm + 0.5) * np.log(t) - t + np.log(series)


def log_gamma(z) -> np.ndarray:
    """
    Complex log-gamma on the whole plane minus the poles.

    Uses the Lanczos approximation (g = 7, 9 terms) on ``Re z >= 1/2`` and the reflection
    formula ``log G(z) = log(pi) - log(sin(pi z)) - log G(1 - z)`` elsewhere. Values in the
    reflected half-plane agree with the principal-branch log-gamma up to multiples of ``2 pi i``.

    Parameters
    ----------
    z : array_like
        Complex or real points

    Returns
    -------
    np.ndarray
        ``log(Gamma(z))`` with the same shape as ``z``
    """
    arr = np.asarray(z, dtype=np.complex128)
    flat = arr.ravel()
    out = np.empty_like(flat)
    right = flat.real >= 0.5
    if np.any(right):
        out[right] = _log_gamma_right(flat[right])
    left = ~right
    if np.any(left):
        zl = flat[left]
        with np.errstate(divide="ignore"):
            out[left] = np.log(np.pi) - np.log(np.sin(np.pi * zl)) - _log_gamma_right(1.0 - zl)
    return out.reshape(arr.shape)


def reciprocal_gamma_pair(z, g_a: float, g_b: float) -> np.ndarray:
    """``1 / (Gamma(g_a + g_b z) Gamma(g_a - g_b z))``, finite everywhere (zeros at the poles)."""
    arr = np.asarray(z, dtype=np.complex128)
    w = g_b * arr.ravel()
    # the pair is even in w
    u = np.where(w.real < 0.0, -w, w)
    head = _log_gamma_right(g_a + u)
    out = np.empty_like(u)
    direct = (g_a - u).real >= 0.5
    if np.any(direct):
        out[direct] = np.exp(-head[direct] - _log_gamma_right(g_a - u[direct]))
    reflected = ~direct
    if np.any(reflected):
        ur = u[reflected]
        # 1/Gamma(a - u) = sin(pi (a - u)) Gamma(1 - a + u) / pi
        out[reflected] = np.sin(np.pi * (g_a - ur)) / np.pi * np.exp(_log_gamma_right(1.0 - g_a + ur) - head[reflected])
    return out.reshape(arr.shape)

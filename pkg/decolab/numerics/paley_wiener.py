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

from typing import Iterable, Optional, Sequence

import numpy as np

from decolab.errors import InvalidParameterError, RangeError
from decolab.models.reports import BoundCheck, LemmaReport, ProductTypeReport
from decolab.models.spectrum import BandlimitedFunction
from decolab.numerics.bandlimited import OVERFLOW_EXPONENT, fourier_at, l1_norm, position, product
from decolab.tooling import get_logger

__all__ = (
    "standard_frequency_grid",
    "fourier_quadrature",
    "verify_lemma",
    "verify_contour_bound",
    "verify_product_type",
)
logger = get_logger("Decolab.Numerics.PaleyWiener")

BOUND_SLACK = 1.05
DEFAULT_GAMMAS = (1.0, 5.0, 10.0)
LEMMA_WINDOW = 4000.0


def standard_frequency_grid(tau: float, count: int = 50, interior: int = 9) -> np.ndarray:
    """``count`` frequencies evenly spread over ``(tau, 3 tau]`` after ``interior`` points spanning ``[-tau, tau]``."""
    inside = np.linspace(-tau, tau, interior) if interior > 0 else np.empty(0)
    return np.concatenate([inside, np.linspace(tau, 3.0 * tau, count + 1)[1:]])


def _window(f: BandlimitedFunction, half_width: float, a: float) -> tuple[np.ndarray, float]:
    # snap to whole periods of the band edge, step below the Nyquist limit of exp(i a x) f(x)
    period = 2.0 * np.pi / f.kappa
    L = period * np.ceil(half_width / period)
    count = int(np.ceil(L * (abs(a) + f.kappa) / np.pi))
    xs = np.linspace(-L, L, 2 * count + 1)
    return xs, float(xs[1] - xs[0])


def _trapezoid(values: np.ndarray, step: float) -> complex:
    return complex(step * (np.sum(values) - 0.5 * (values[0] + values[-1])))


def fourier_quadrature(f: BandlimitedFunction, a: float, half_width: float = 500.0) -> tuple[complex, float]:
    """
    Truncated-domain ``int_{-L}^{L} exp(i a x) f(x) dx`` and an estimate of the neglected tail.

    Parameters
    ----------
    f : BandlimitedFunction
        The function, evaluated through its closed form when it has one
    a : float
        Frequency
    half_width : float
        Requested window, rounded up to whole periods ``2 pi / kappa``

    Returns
    -------
    tuple[complex, float]
        The quadrature value and the tail estimate
    """
    xs, step = _window(f, half_width, a)
    values = np.exp(1j * a * xs) * position(f, xs)
    L = float(xs[-1])
    probe = np.linspace(L, L + 2.0 * np.pi / f.kappa, 64)
    envelope = float(max(np.max(np.abs(position(f, probe))), np.max(np.abs(position(f, -probe)))))
    gap = abs(a) - f.kappa
    if gap > 0:
        tail = 4.0 * envelope / gap
    else:
        tail = 2.0 * envelope * L
    return _trapezoid(values, step), tail


def verify_contour_bound(
    f: BandlimitedFunction,
    a: float,
    gammas: Sequence[float] = DEFAULT_GAMMAS,
    *,
    half_width: float = 500.0,
    l1: Optional[float] = None,
) -> list[BoundCheck]:
    """
    Check ``|exp(-a g) int exp(i a x) f(x + i g) dx| <= M exp(-g (a - tau))`` along shifted contours.

    Each check also records whether its measurement fell below the one at the previous shift.

    Raises
    ------
    InvalidParameterError
        When ``a`` does not exceed the type of ``f``.
    RangeError
        When a contour is so far from the real line that ``f`` would overflow.
    """
    tau = f.kappa
    if not a > tau:
        raise InvalidParameterError("a", a, f"contour bound needs a frequency beyond the type {tau}")
    if any(not gamma > 0 for gamma in gammas) or np.any(np.diff(gammas) <= 0):
        raise InvalidParameterError("gammas", list(gammas), "contour shifts must be positive and strictly increasing")
    M = l1_norm(f) if l1 is None else l1
    xs, step = _window(f, half_width, a)
    phase = np.exp(1j * a * xs)
    checks: list[BoundCheck] = []
    previous = np.inf
    for gamma in gammas:
        growth = gamma * tau
        if growth > OVERFLOW_EXPONENT:
            raise RangeError("kappa * gamma", growth, OVERFLOW_EXPONENT)
        shifted = position(f, xs + 1j * gamma)
        measured = abs(np.exp(-a * gamma) * _trapezoid(phase * shifted, step))
        bound = M * np.exp(-gamma * (a - tau))
        checks.append(
            BoundCheck(
                gamma=float(gamma),
                a=float(a),
                measured=float(measured),
                bound=float(bound),
                passed=bool(measured <= BOUND_SLACK * bound),
                decreasing=bool(measured < previous),
            )
        )
        previous = measured
        logger.debug(f"contour gamma={gamma}: measured {measured:.3e}, bound {bound:.3e}")
    return checks


def verify_lemma(
    f: BandlimitedFunction,
    freq_grid: Iterable[float],
    *,
    half_width: Optional[float] = None,
    gammas: Sequence[float] = DEFAULT_GAMMAS,
    tolerance: float = 1e-6,
) -> LemmaReport:
    """
    Verify that ``int exp(i a x) f(x) dx`` vanishes beyond the type, structurally and by quadrature.

    The quadrature window defaults to ``[-4000 / tau, 4000 / tau]``.

    Raises
    ------
    HypothesisViolationError
        When the L1 norm of ``f`` does not converge under domain doubling.
    """
    freqs = np.unique(np.asarray(list(freq_grid), dtype=np.float64))
    tau = f.kappa
    M = l1_norm(f)
    if half_width is None:
        half_width = LEMMA_WINDOW / tau
    structural = np.abs(np.atleast_1d(fourier_at(f, freqs)))
    quadrature = []
    truncation = []
    for a in freqs:
        value, tail = fourier_quadrature(f, float(a), half_width)
        quadrature.append(abs(value))
        truncation.append(tail)
    quadrature_arr = np.asarray(quadrature)
    peak = max(1.0, float(np.max(np.abs(np.atleast_1d(fourier_at(f, np.linspace(-tau, tau, 41)))))))

    checks = verify_contour_bound(f, 2.0 * tau, gammas, half_width=half_width, l1=M)
    beyond = freqs > tau
    passed = bool(
        np.all(structural[beyond] == 0.0)
        and np.all(quadrature_arr[beyond] <= tolerance * peak)
        and all(check.passed for check in checks)
    )
    logger.info("Lemma check for %s (tau=%.6g): %s", f.label, tau, "passed" if passed else "FAILED")
    return LemmaReport(
        tau=tau,
        frequencies=freqs.tolist(),
        magnitudes=structural.tolist(),
        quadrature_magnitudes=quadrature_arr.tolist(),
        truncation_estimates=truncation,
        l1_norm=M,
        half_width=half_width,
        bound_checks=checks,
        bound_decreasing=all(check.decreasing for check in checks),
        quadrature_zero_tol=tolerance,
        label=f.label,
        passed=passed,
    )


def verify_product_type(f: BandlimitedFunction, g: BandlimitedFunction, samples: int = 50) -> ProductTypeReport:
    """The product of types ``tau_f`` and ``tau_g`` has type ``tau_f + tau_g``, checked on its spectrum."""
    fg = product(f, g)
    total = f.kappa + g.kappa
    outside = np.linspace(total, 2.0 * total, samples + 1)[1:]
    outside_vals = np.abs(np.atleast_1d(fourier_at(fg, np.concatenate([outside, -outside]))))
    inside = np.linspace(-total, total, 2 * samples + 1)[1:-1]
    inside_vals = np.abs(np.atleast_1d(fourier_at(fg, inside)))
    outside_max = float(np.max(outside_vals))
    inside_max = float(np.max(inside_vals))
    return ProductTypeReport(
        kappa_f=f.kappa,
        kappa_g=g.kappa,
        kappa_product=fg.kappa,
        outside_frequencies=outside.tolist(),
        outside_max=outside_max,
        inside_max=inside_max,
        passed=bool(fg.kappa == total and outside_max == 0.0 and inside_max > 1e-10),
    )

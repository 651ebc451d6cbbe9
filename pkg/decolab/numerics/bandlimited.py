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

from typing import Callable, Optional

import numpy as np
from scipy.interpolate import BSpline

from decolab.errors import (
    HypothesisViolationError,
    InvalidParameterError,
    NotIntegrableError,
    RangeError,
    ResolutionError,
)
from decolab.models.spectrum import BandlimitedFunction, Parity, PositionForm, Reality, Spectrum
from decolab.numerics.quadrature import MAX_PANEL_NODES, composite_rule, gauss_legendre, nodes_for_phase
from decolab.numerics.special import reciprocal_gamma_pair
from decolab.tooling import get_logger

__all__ = (
    "from_profile",
    "make_bspline",
    "make_fejer",
    "make_jackson",
    "make_gamma_reciprocal",
    "evaluate",
    "evaluate_complex",
    "position",
    "shift",
    "reflect",
    "conjugate",
    "scale",
    "product",
    "fourier_at",
    "autocorrelation",
    "mass_within",
    "l1_norm",
)
logger = get_logger("Decolab.Numerics.Bandlimited")

OVERFLOW_EXPONENT = 700.0
_EVAL_CHUNK = 4096
_MAX_CONVOLUTION_POINTS = 4_000_000


def _scalar_or_array(value: np.ndarray, like) -> complex | np.ndarray:
    if np.ndim(like) == 0:
        return complex(np.asarray(value).reshape(-1)[0])
    return value


def from_profile(
    profile: Callable[[np.ndarray], np.ndarray],
    kappa: float,
    n: int,
    *,
    breaks: Optional[np.ndarray] = None,
    normalize: bool = True,
    closed_form: Optional[PositionForm] = None,
    parity: Parity = Parity.NONE,
    reality: Reality = Reality.COMPLEX,
    label: str = "profile",
) -> BandlimitedFunction:
    """
    Sample a spectral profile on composite Gauss-Legendre panels.

    Parameters
    ----------
    profile : Callable[[np.ndarray], np.ndarray]
        The momentum amplitude as a function of wavenumber
    kappa : float
        Certified half-width
    n : int
        Total node count, spread evenly over the panels
    breaks : Optional[np.ndarray]
        Panel edges, defaults to the single panel ``[-kappa, kappa]``
    normalize : bool
        Rescale to unit L2 norm (and flag the spectrum as normalized)
    closed_form : Optional[PositionForm]
        Exact position evaluator for the unscaled profile
    """
    if not np.isfinite(kappa) or kappa <= 0:
        raise InvalidParameterError("kappa", kappa, "spectral half-width must be positive")
    edges = np.array([-kappa, kappa], dtype=np.float64) if breaks is None else np.asarray(breaks, dtype=np.float64)
    panels = edges.size - 1
    per_panel = max(int(np.ceil(n / panels)), 4)
    nodes, weights = composite_rule(edges, per_panel)
    amps = np.asarray(profile(nodes), dtype=np.complex128)
    factor = 1.0
    if normalize:
        norm = 2.0 * np.pi * np.sum(weights * np.abs(amps) ** 2)
        if norm <= 0.0:
            raise InvalidParameterError("profile", norm, "profile has zero norm and cannot be normalized")
        factor = 1.0 / np.sqrt(norm)
        amps = amps * factor
    spectrum = Spectrum(kappa=kappa, nodes=nodes, weights=weights, amps=amps, breaks=edges, normalized=normalize)
    scaled_form = None
    if closed_form is not None:

        def scaled_form(x, _f=closed_form, _c=factor):
            return _c * _f(x)

    return BandlimitedFunction(spectrum, parity=parity, reality=reality, closed_form=scaled_form, label=label)


def make_bspline(kappa: float, n: int, order: int, *, normalize: bool = True) -> BandlimitedFunction:
    """
    Momentum-limited state whose spectrum is the centered cardinal B-spline of ``order`` on ``[-kappa, kappa]``.

    Order 2 is the Fejer triangle ``1 - |k|/kappa`` and order 4 the Jackson kernel. The position form is
    ``(2 kappa / order) * sinc(kappa x / order) ** order`` up to normalization, so it decays like ``|x|**-order``.
    """
    if not np.isfinite(kappa) or kappa <= 0:
        raise InvalidParameterError("kappa", kappa, "spectral half-width must be positive")
    if n < 8:
        raise InvalidParameterError("n", n, "at least 8 spectral nodes are required")
    if order < 2:
        raise NotIntegrableError("order", order, "B-spline spectra of order < 2 give non-integrable states")
    knots = np.linspace(-kappa, kappa, order + 1)
    knots[0], knots[-1] = -kappa, kappa
    basis = BSpline.basis_element(knots, extrapolate=False)

    def profile(k: np.ndarray) -> np.ndarray:
        return np.nan_to_num(basis(k))

    width = 2.0 * kappa / order

    def closed_form(x: np.ndarray) -> np.ndarray:
        arg = np.asarray(x) * (kappa / order)
        return width * np.sinc(arg / np.pi) ** order

    label = {2: "fejer", 4: "jackson"}.get(order, f"bspline{order}")
    logger.debug(f"Building {label} state with kappa={kappa}, n={n}")
    return from_profile(
        profile,
        kappa,
        n,
        breaks=knots,
        normalize=normalize,
        closed_form=closed_form,
        parity=Parity.EVEN,
        reality=Reality.REAL,
        label=label,
    )


def make_fejer(kappa: float, n: int = 128, *, normalize: bool = True) -> BandlimitedFunction:
    return make_bspline(kappa, n, 2, normalize=normalize)


def make_jackson(kappa: float, n: int = 128, *, normalize: bool = True) -> BandlimitedFunction:
    return make_bspline(kappa, n, 4, normalize=normalize)


def make_gamma_reciprocal(
    g_a: float,
    g_b: float,
    n: int = 128,
    *,
    normalize: bool = False,
    half_width: float = 4000.0,
) -> BandlimitedFunction:
    """
    The entire function ``1 / (Gamma(g_a + g_b x) Gamma(g_a - g_b x))`` of exponential type ``pi g_b``.

    The spectrum is computed by a fine-grid Fourier transform of position samples over ``[-half_width, half_width]``
    and placed on Gauss-Legendre nodes of the certified support ``[-pi g_b, pi g_b]``. The sampling step is below
    the Nyquist limit of the support, so only the truncated tail contributes error.
    """
    if not g_a > 1.0:
        raise NotIntegrableError("g_a", g_a, "the reciprocal gamma pair is in L1 only for g_a > 1")
    if not g_b > 0.0:
        raise InvalidParameterError("g_b", g_b, "the scale must be positive")
    if n < 8:
        raise InvalidParameterError("n", n, "at least 8 spectral nodes are required")
    kappa = np.pi * g_b

    def closed_form(x: np.ndarray) -> np.ndarray:
        return reciprocal_gamma_pair(x, g_a, g_b)

    step = 0.5 / g_b
    count = int(np.ceil(half_width / step))
    xs = step * np.arange(-count, count + 1)
    samples = closed_form(xs).real
    logger.debug(f"Gamma reciprocal spectrum from {xs.size} position samples, step {step:.3g}")

    def profile(k: np.ndarray) -> np.ndarray:
        karr = np.asarray(k, dtype=np.float64)
        amps = np.empty(karr.shape, dtype=np.float64)
        for start in range(0, karr.size, 32):
            block = karr[start : start + 32]
            # real even samples: only the cosine part survives
            amps[start : start + 32] = step / (2.0 * np.pi) * (np.cos(np.multiply.outer(block, xs)) @ samples)
        return amps

    return from_profile(
        profile,
        kappa,
        n,
        normalize=normalize,
        closed_form=closed_form,
        parity=Parity.EVEN,
        reality=Reality.REAL,
        label="gamma_reciprocal",
    )


def evaluate(f: BandlimitedFunction, x) -> complex | np.ndarray:
    """
    Quadrature realization of ``psi(x) = int_{-kappa}^{kappa} exp(i x k) psi~(k) dk``.

    Parameters
    ----------
    f : BandlimitedFunction
        The function
    x : float | array_like
        Real position(s)

    Returns
    -------
    complex | np.ndarray
        The amplitude(s), scalar for scalar input
    """
    xarr = np.atleast_1d(np.asarray(x, dtype=np.float64))
    flat = xarr.ravel()
    out = np.empty(flat.shape, dtype=np.complex128)
    for start in range(0, flat.size, _EVAL_CHUNK):
        out[start : start + _EVAL_CHUNK] = f.sample(flat[start : start + _EVAL_CHUNK])
    return _scalar_or_array(out.reshape(xarr.shape), x)


def evaluate_complex(f: BandlimitedFunction, z) -> complex | np.ndarray:
    """Evaluate at complex points; refuses points where ``exp(kappa |Im z|)`` would overflow."""
    zarr = np.atleast_1d(np.asarray(z, dtype=np.complex128))
    growth = float(np.max(np.abs(zarr.imag))) * f.kappa
    if growth > OVERFLOW_EXPONENT:
        raise RangeError("kappa * |Im z|", growth, OVERFLOW_EXPONENT)
    flat = zarr.ravel()
    out = np.empty(flat.shape, dtype=np.complex128)
    for start in range(0, flat.size, _EVAL_CHUNK):
        out[start : start + _EVAL_CHUNK] = f.sample(flat[start : start + _EVAL_CHUNK])
    return _scalar_or_array(out.reshape(zarr.shape), z)


def position(f: BandlimitedFunction, x) -> complex | np.ndarray:
    """Continuum values: the closed form when the function carries one, the quadrature sum otherwise."""
    if f.closed_form is None:
        if np.iscomplexobj(x):
            return evaluate_complex(f, x)
        return evaluate(f, x)
    xarr = np.atleast_1d(np.asarray(x))
    out = np.asarray(f.closed_form(xarr), dtype=np.complex128)
    return _scalar_or_array(out, x)


def _resampled(spectrum: Spectrum, per_panel: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    if per_panel == spectrum.per_panel:
        return spectrum.nodes, spectrum.weights, spectrum.amps
    nodes, weights = composite_rule(spectrum.breaks, per_panel)
    return nodes, weights, spectrum.interpolate(nodes)


def _panel_width(spectrum: Spectrum) -> float:
    return float(np.max(np.diff(spectrum.breaks)))


def shift(f: BandlimitedFunction, s: float) -> BandlimitedFunction:
    """``x -> f(x - s)``: the spectrum picks up ``exp(-i s k)``, resampled finely enough to resolve it."""
    spec = f.spectrum
    per_panel = nodes_for_phase(spec.per_panel, s * _panel_width(spec))
    if per_panel < 0:
        raise ResolutionError(int(0.75 * abs(s) * _panel_width(spec)) + 32, MAX_PANEL_NODES, f"shift by {s:.6g}")
    nodes, weights, amps = _resampled(spec, per_panel)
    shifted = Spectrum(
        kappa=spec.kappa,
        nodes=nodes,
        weights=weights,
        amps=amps * np.exp(-1j * s * nodes),
        breaks=spec.breaks,
        normalized=False,
    )
    form = None
    if f.closed_form is not None:

        def form(x, _f=f.closed_form, _s=s):
            return _f(np.asarray(x) - _s)

    return BandlimitedFunction(shifted, reality=f.reality, closed_form=form, label=f"shift({f.label})")


def reflect(f: BandlimitedFunction) -> BandlimitedFunction:
    """``x -> f(-x)``."""
    spec = f.spectrum
    mirrored = Spectrum(
        kappa=spec.kappa,
        nodes=-spec.nodes[::-1],
        weights=spec.weights[::-1],
        amps=spec.amps[::-1],
        breaks=-spec.breaks[::-1],
        normalized=spec.normalized,
    )
    form = None
    if f.closed_form is not None:

        def form(x, _f=f.closed_form):
            return _f(-np.asarray(x))

    return BandlimitedFunction(
        mirrored, parity=f.parity, reality=f.reality, closed_form=form, label=f"reflect({f.label})"
    )


def conjugate(f: BandlimitedFunction) -> BandlimitedFunction:
    """``x -> conj(f(x))``: spectrum ``conj(psi~(-k))``."""
    spec = f.spectrum
    mirrored = Spectrum(
        kappa=spec.kappa,
        nodes=-spec.nodes[::-1],
        weights=spec.weights[::-1],
        amps=np.conj(spec.amps[::-1]),
        breaks=-spec.breaks[::-1],
        normalized=spec.normalized,
    )
    form = None
    if f.closed_form is not None:

        def form(x, _f=f.closed_form):
            return np.conj(_f(np.conj(np.asarray(x))))

    return BandlimitedFunction(mirrored, parity=f.parity, reality=f.reality, closed_form=form, label=f"conj({f.label})")


def scale(f: BandlimitedFunction, c: float) -> BandlimitedFunction:
    """``x -> f(c x)`` for ``c > 0``; the type becomes ``c * kappa``."""
    if not c > 0:
        raise InvalidParameterError("c", c, "scale factor must be positive")
    spec = f.spectrum
    stretched = Spectrum(
        kappa=c * spec.kappa,
        nodes=c * spec.nodes,
        weights=c * spec.weights,
        amps=spec.amps / c,
        breaks=c * spec.breaks,
        normalized=False,
    )
    form = None
    if f.closed_form is not None:

        def form(x, _f=f.closed_form, _c=c):
            return _f(_c * np.asarray(x))

    return BandlimitedFunction(
        stretched, parity=f.parity, reality=f.reality, closed_form=form, label=f"scale({f.label})"
    )


def _merged_breaks(left: np.ndarray, right: np.ndarray, kappa: float) -> np.ndarray:
    sums = np.unique(np.add.outer(left, right).ravel())
    keep = np.concatenate([[True], np.diff(sums) > 1e-12 * kappa])
    merged = sums[keep]
    merged[0], merged[-1] = -kappa, kappa
    return merged


def product(f: BandlimitedFunction, g: BandlimitedFunction) -> BandlimitedFunction:
    """
    Pointwise product of two momentum-limited functions.

    The spectrum is the convolution of the two spectra, computed panel by panel with Gauss-Legendre
    quadrature on the Minkowski sum of the breakpoints; its certified half-width is exactly
    ``f.kappa + g.kappa``.

    Raises
    ------
    ResolutionError
        When the convolution would need more quadrature points than the resampling cap.
    """
    sf, sg = f.spectrum, g.spectrum
    kappa = sf.kappa + sg.kappa
    breaks = _merged_breaks(sf.breaks, sg.breaks, kappa)
    per_panel = max(sf.per_panel, sg.per_panel)
    out_nodes, out_weights = composite_rule(breaks, per_panel)
    total = out_nodes.size * per_panel * (sf.panels + sg.panels)
    if total > _MAX_CONVOLUTION_POINTS:
        raise ResolutionError(total, _MAX_CONVOLUTION_POINTS, "product convolution")

    points: list[np.ndarray] = []
    wts: list[np.ndarray] = []
    owner: list[np.ndarray] = []
    for idx, omega in enumerate(out_nodes):
        lo = max(-sf.kappa, omega - sg.kappa)
        hi = min(sf.kappa, omega + sg.kappa)
        if hi <= lo:
            continue
        cuts = np.concatenate([[lo, hi], sf.breaks, omega - sg.breaks])
        cuts = np.unique(cuts[(cuts >= lo) & (cuts <= hi)])
        k, w = composite_rule(cuts, per_panel)
        points.append(k)
        wts.append(w)
        owner.append(np.full(k.size, idx))
    k_all = np.concatenate(points)
    w_all = np.concatenate(wts)
    own = np.concatenate(owner)
    integrand = w_all * sf.interpolate(k_all) * sg.interpolate(out_nodes[own] - k_all)
    amps = np.bincount(own, weights=integrand.real, minlength=out_nodes.size) + 1j * np.bincount(
        own, weights=integrand.imag, minlength=out_nodes.size
    )
    spectrum = Spectrum(
        kappa=kappa, nodes=out_nodes, weights=out_weights, amps=amps, breaks=breaks, normalized=False
    )
    form = None
    if f.closed_form is not None and g.closed_form is not None:

        def form(x, _f=f.closed_form, _g=g.closed_form):
            return _f(x) * _g(x)

    parity = Parity.NONE
    if Parity.NONE not in (f.parity, g.parity):
        parity = Parity.EVEN if f.parity == g.parity else Parity.ODD
    reality = Reality.REAL if f.reality is g.reality is Reality.REAL else Reality.COMPLEX
    return BandlimitedFunction(spectrum, parity=parity, reality=reality, closed_form=form, label="product")


def fourier_at(f: BandlimitedFunction, a) -> complex | np.ndarray:
    """
    ``int exp(i a x) f(x) dx = 2 pi psi~(-a)``, literally zero for ``|a| > kappa``.
    """
    arr = np.atleast_1d(np.asarray(a, dtype=np.float64))
    out = 2.0 * np.pi * f.spectrum.interpolate(-arr.ravel())
    return _scalar_or_array(out.reshape(arr.shape), a)


def autocorrelation(f: BandlimitedFunction, eta) -> complex | np.ndarray:
    """
    Overlap ``int f(q + eta) conj(f(q)) dq = 2 pi int |psi~(k)|^2 exp(i eta k) dk``.

    The spectral quadrature is refined until the phase ``exp(i eta k)`` is resolved for the largest ``|eta|``.
    """
    arr = np.atleast_1d(np.asarray(eta, dtype=np.float64))
    flat = arr.ravel()
    spec = f.spectrum
    extent = float(np.max(np.abs(flat))) * _panel_width(spec) if flat.size else 0.0
    per_panel = nodes_for_phase(spec.per_panel, extent)
    if per_panel < 0:
        raise ResolutionError(int(0.75 * extent) + 32, MAX_PANEL_NODES, "autocorrelation")
    nodes, weights, amps = _resampled(spec, per_panel)
    density = 2.0 * np.pi * weights * np.abs(amps) ** 2
    out = np.empty(flat.shape, dtype=np.complex128)
    for start in range(0, flat.size, _EVAL_CHUNK):
        block = flat[start : start + _EVAL_CHUNK]
        out[start : start + _EVAL_CHUNK] = np.exp(1j * np.multiply.outer(block, nodes)) @ density
    return _scalar_or_array(out.reshape(arr.shape), eta)


def mass_within(f: BandlimitedFunction, half_width: float) -> float:
    """
    ``int_{-L}^{L} |f(x)|^2 dx`` by trapezoid sampling of the continuum values.

    ``|f|^2`` has type ``2 kappa``, so a step of ``pi / (2 kappa)`` aliases nothing and only truncation remains.
    """
    step = 0.5 * np.pi / f.kappa
    count = int(np.floor(half_width / step))
    xs = step * np.arange(-count, count + 1)
    values = np.abs(position(f, xs)) ** 2
    return float(step * np.sum(values))


def l1_norm(f: BandlimitedFunction, *, tol: float = 1e-8, max_doublings: int = 8) -> float:
    """
    Position-space L1 norm with domain doubling and tail extrapolation.

    Windows grow as ``L_j = 64 pi / kappa * 2**j`` (whole half-periods of the band edge). Successive window
    integrals are extrapolated with Aitken's delta-squared step, which removes the power-law tail.

    Raises
    ------
    HypothesisViolationError
        When the window integrals do not settle (the function is not absolutely integrable).
    """
    panel = 0.5 * np.pi / f.kappa
    base_nodes, base_weights = gauss_legendre(24, 0.0, panel)

    def annulus(lo: float, hi: float) -> float:
        count = int(round((hi - lo) / panel))
        starts = lo + panel * np.arange(count)
        xs = (starts[:, None] + base_nodes[None, :]).ravel()
        ws = np.tile(base_weights, count)
        return float(np.sum(ws * (np.abs(position(f, xs)) + np.abs(position(f, -xs)))))

    width = 64.0 * np.pi / f.kappa
    totals = [annulus(0.0, width)]
    estimates: list[float] = []
    for _ in range(max_doublings):
        totals.append(totals[-1] + annulus(width, 2.0 * width))
        width *= 2.0
        if len(totals) < 3:
            continue
        d_prev = totals[-2] - totals[-3]
        d_last = totals[-1] - totals[-2]
        denom = d_last - d_prev
        estimate = totals[-1] if denom == 0.0 else totals[-1] - d_last * d_last / denom
        estimates.append(estimate)
        logger.debug(f"L1 window {width:.6g}: raw {totals[-1]:.12g}, extrapolated {estimate:.12g}")
        if len(estimates) >= 2 and abs(estimates[-1] - estimates[-2]) <= tol * max(1.0, abs(estimate)):
            return estimate
        if d_prev > 0 and d_last / d_prev > 0.9:
            raise HypothesisViolationError(
                "absolute integrability", f"window increments stall ({d_prev:.3e} -> {d_last:.3e})"
            )
    change = abs(estimates[-1] - estimates[-2]) if len(estimates) >= 2 else float("inf")
    raise HypothesisViolationError("absolute integrability", f"L1 norm changed by {change:.3e} at the last doubling")

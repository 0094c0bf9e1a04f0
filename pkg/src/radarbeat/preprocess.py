"""Smoothing and second-derivative enhancement of heartbeat harmonics."""
from __future__ import annotations

import numpy as np
from scipy.ndimage import gaussian_filter1d

from .signal_model import ComplexSeries, RealSeries

# Least-squares smoothed differentiator, taps for offsets -3..3 (times 1/16 t0^2).
STENCIL_TAPS = np.array([1.0, 2.0, -1.0, -4.0, -1.0, 2.0, 1.0])
STENCIL_HALF = 3
FWHM_PER_SIGMA = 2.0 * np.sqrt(2.0 * np.log(2.0))


def gaussian_smooth(x: RealSeries, width_s: float = 0.1) -> RealSeries:
    """Convolve with a unit-area Gaussian whose full width at half maximum
    is ``width_s`` seconds.

    The kernel is cut at 4 sigma and the edges are reflect-padded, so the
    output has the same length as the input.
    """
    if not width_s > 0:
        raise ValueError(f"width_s must be positive, got {width_s}")
    if len(x) < 1:
        raise ValueError("empty input")
    sigma = width_s / FWHM_PER_SIGMA / x.t0
    y = gaussian_filter1d(x.samples, sigma, mode="reflect", truncate=4.0)
    return x.with_samples(y)


def stencil_response(f, t0: float):
    """Exact frequency response of the 7-tap second-derivative stencil."""
    w = 2 * np.pi * np.asarray(f, dtype=float) * t0
    return (2 * np.cos(3 * w) + 4 * np.cos(2 * w) - 2 * np.cos(w) - 4) / (16 * t0**2)


def _apply_stencil(samples: np.ndarray, t0: float) -> np.ndarray:
    if len(samples) < 2 * STENCIL_HALF + 1:
        raise ValueError("series too short for 7-tap stencil")
    padded = np.pad(samples, STENCIL_HALF, mode="reflect")
    # symmetric taps, so convolution and correlation coincide
    return np.convolve(padded, STENCIL_TAPS, mode="valid") / (16 * t0**2)


def second_derivative(x: RealSeries) -> RealSeries:
    """Second derivative by the 7-tap smoothed differentiator.

    Three samples at each edge come from reflect padding; units go from
    ``u`` to ``u / s**2``.
    """
    return x.with_samples(_apply_stencil(x.samples, x.t0))


def complex_deriv_magnitude(s: ComplexSeries) -> RealSeries:
    """``|d^2 s / dt^2|`` with its mean removed.

    The stencil is linear, so it is applied to the real and imaginary parts
    separately before taking the modulus.
    """
    re = _apply_stencil(s.samples.real, s.t0)
    im = _apply_stencil(s.samples.imag, s.t0)
    mag = np.hypot(re, im)
    return RealSeries(mag - mag.mean(), s.t0, s.start_time)

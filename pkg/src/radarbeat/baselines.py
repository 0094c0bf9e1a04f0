"""STFT peak-picking baselines (Conv1A / Conv2A).

They reuse the estimator's windowing, zero padding and search band so that
any difference against the NLHS estimator comes from the spectral step.
"""
from __future__ import annotations

import numpy as np

from .estimator import (
    EstimatorParams,
    IntervalTrack,
    hampel_filter,
    iter_window_spectra,
    window_layout,
)
from .signal_model import RealSeries
from .spectral import power_peak


def stft_track(x: RealSeries, p: EstimatorParams, band=(0.8, 1.7)) -> IntervalTrack:
    """Raw per-window STFT peak intervals, no outlier removal."""
    _, _, centres = window_layout(x, p)
    f_lo, f_hi = band
    peaks = [power_peak(spec, f_lo, f_hi) for spec in iter_window_spectra(x, p)]
    return IntervalTrack(centres, 1.0 / np.asarray(peaks))


def stft_estimate(x: RealSeries, p: EstimatorParams, band=(0.8, 1.7)) -> IntervalTrack:
    track = stft_track(x, p, band)
    return hampel_filter(track, p.hampel_half_window, p.hampel_nsigma)

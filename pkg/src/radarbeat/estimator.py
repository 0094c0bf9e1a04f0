"""Sliding-window NLHS interval tracking, order selection, gating and
Hampel outlier removal."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from . import preprocess
from .metrics import BOUNDARY_EPS
from .signal_model import ComplexSeries, RealSeries
from .spectral import NlhsParams, harmonic_terms, windowed_spectrum

MAD_SCALE = 1.4826


@dataclass(frozen=True)
class IntervalTrack:
    """Timestamped interval estimates in seconds; NaN marks MISSING."""

    times: np.ndarray
    intervals: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        intervals = np.asarray(self.intervals, dtype=float)
        if times.shape != intervals.shape or times.ndim != 1:
            raise ValueError("times and intervals must be 1-D and equally long")
        if np.any(np.diff(times) <= 0):
            raise ValueError("times must be strictly increasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "intervals", intervals)

    def __len__(self):
        return len(self.times)

    @property
    def present(self) -> np.ndarray:
        return ~np.isnan(self.intervals)


@dataclass(frozen=True)
class EstimatorParams:
    window_s: float = 15.0
    hop_s: float = 1.0
    N_min: int = 6
    N_max: int = 15
    t_theta: float = 0.010
    hampel_half_window: int = 5
    hampel_nsigma: float = 3.0
    smooth_width_s: float = 0.1
    pad_factor: int = 64

    def __post_init__(self):
        if not self.window_s > self.hop_s > 0:
            raise ValueError("need window_s > hop_s > 0")
        if not 1 <= self.N_min <= self.N_max:
            raise ValueError("need 1 <= N_min <= N_max")
        if not self.t_theta > 0:
            raise ValueError("t_theta must be positive")
        if self.hampel_half_window < 0 or self.hampel_nsigma < 0:
            raise ValueError("Hampel parameters must be non-negative")

    def to_dict(self) -> dict:
        return asdict(self)


def window_layout(x: RealSeries, p: EstimatorParams):
    """Start indices, window length in samples and centre timestamps."""
    width = int(round(p.window_s * x.fs))
    hop = int(round(p.hop_s * x.fs))
    if len(x) < width:
        raise ValueError(
            f"record of {x.duration:.2f} s is shorter than one {p.window_s} s window"
        )
    starts = np.arange(0, len(x) - width + 1, hop)
    centres = x.start_time + (starts + width / 2) * x.t0
    return starts, width, centres


def iter_window_spectra(x: RealSeries, p: EstimatorParams):
    starts, width, _ = window_layout(x, p)
    for s in starts:
        seg = RealSeries(x.samples[s : s + width], x.t0)
        yield windowed_spectrum(seg, p.pad_factor)


def order_tracks(x: RealSeries, p: EstimatorParams, q: NlhsParams, orders) -> tuple:
    """Interval tracks for several harmonic orders from a single NLHS pass.

    Returns ``(centres, intervals)`` with ``intervals[i]`` the track for
    ``orders[i]``.
    """
    orders = np.asarray(orders, dtype=int)
    _, _, centres = window_layout(x, p)
    freqs = q.candidate_freqs()
    n_max = int(orders.max())
    q.check_nyquist(x.fs / 2, n_max)
    out = np.empty((len(orders), len(centres)))
    for w, spec in enumerate(iter_window_spectra(x, p)):
        cum = np.cumsum(harmonic_terms(spec, q, n_max), axis=0)
        peaks = np.argmax(cum[orders - 1], axis=1)
        out[:, w] = 1.0 / freqs[peaks]
    return centres, out


def track_for_order(x: RealSeries, N: int, p: EstimatorParams, q: NlhsParams) -> IntervalTrack:
    centres, out = order_tracks(x, p, q, [N])
    return IntervalTrack(centres, out[0])


def choose_orders(variances, orders):
    """Smallest and second-smallest variance orders; ties go to smaller N."""
    variances = np.asarray(variances, dtype=float)
    orders = list(orders)
    if len(orders) < 2:
        raise ValueError("need at least two candidate orders")
    rank = sorted(range(len(orders)), key=lambda i: (variances[i], orders[i]))
    return orders[rank[0]], orders[rank[1]]


def order_variances(tracks) -> np.ndarray:
    """Population variance of each order's interval track."""
    tracks = np.asarray(tracks, dtype=float)
    if tracks.shape[1] < 2:
        raise ValueError("variance undefined: fewer than 2 windows")
    return tracks.var(axis=1)


def select_orders(x: RealSeries, p: EstimatorParams, q: NlhsParams):
    orders = list(range(p.N_min, p.N_max + 1))
    _, tracks = order_tracks(x, p, q, orders)
    return choose_orders(order_variances(tracks), orders)


def gate(track1: IntervalTrack, track2: IntervalTrack, t_theta: float) -> IntervalTrack:
    """Keep ``track1`` where both orders agree within ``t_theta`` (inclusive)."""
    if len(track1) != len(track2) or not np.array_equal(track1.times, track2.times):
        raise ValueError("tracks must share identical timestamps")
    diff = np.abs(track1.intervals - track2.intervals)
    keep = diff <= t_theta + BOUNDARY_EPS
    return IntervalTrack(track1.times, np.where(keep, track1.intervals, np.nan))


def _hampel_pass(values: np.ndarray, half_window: int, nsigma: float) -> np.ndarray:
    out = values.copy()
    n = len(values)
    for i in np.flatnonzero(~np.isnan(values)):
        window = values[max(0, i - half_window) : min(n, i + half_window + 1)]
        window = window[~np.isnan(window)]
        med = np.median(window)
        mad = np.median(np.abs(window - med))
        if abs(values[i] - med) > nsigma * MAD_SCALE * mad:
            out[i] = np.nan
    return out


def hampel_filter(track: IntervalTrack, half_window: int = 5, nsigma: float = 3.0) -> IntervalTrack:
    """Delete entries further than ``nsigma`` scaled MADs from their local median.

    Windows span ``+-half_window`` indices and use present entries only.
    Passes repeat until nothing changes, so the filter is idempotent; it
    only ever deletes.
    """
    values = track.intervals.copy()
    while True:
        filtered = _hampel_pass(values, half_window, nsigma)
        if np.array_equal(np.isnan(filtered), np.isnan(values)):
            break
        values = filtered
    return IntervalTrack(track.times, values)


def enhance_displacement(d: RealSeries, p: EstimatorParams) -> RealSeries:
    """Smoothed second derivative of the displacement (Prop1/Conv1A input)."""
    return preprocess.second_derivative(preprocess.gaussian_smooth(d, p.smooth_width_s))


def enhance_complex(s: ComplexSeries, p: EstimatorParams) -> RealSeries:
    """Smoothed ``|d^2 s / dt^2|`` (Prop2/Conv2A input)."""
    return preprocess.gaussian_smooth(preprocess.complex_deriv_magnitude(s), p.smooth_width_s)


def estimate_enhanced(y: RealSeries, p: EstimatorParams, q: NlhsParams) -> IntervalTrack:
    """Order selection, two-order gating and Hampel filtering on an
    already-enhanced signal."""
    orders = list(range(p.N_min, p.N_max + 1))
    centres, tracks = order_tracks(y, p, q, orders)
    n1, n2 = choose_orders(order_variances(tracks), orders)
    t1 = IntervalTrack(centres, tracks[orders.index(n1)])
    t2 = IntervalTrack(centres, tracks[orders.index(n2)])
    gated = gate(t1, t2, p.t_theta)
    return hampel_filter(gated, p.hampel_half_window, p.hampel_nsigma)


def estimate(x: RealSeries, p: EstimatorParams, q: NlhsParams) -> IntervalTrack:
    """Full NLHS interval estimation from a displacement record."""
    return estimate_enhanced(enhance_displacement(x, p), p, q)


def estimate_complex(s: ComplexSeries, p: EstimatorParams, q: NlhsParams) -> IntervalTrack:
    """NLHS interval estimation from the complex radar signal."""
    return estimate_enhanced(enhance_complex(s, p), p, q)

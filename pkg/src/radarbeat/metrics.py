"""Scoring of interval tracks against ground truth: RMSE, CC and TCR."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

# floating-point slack used to decide "exactly at the threshold"
BOUNDARY_EPS = 1e-12


INTERVAL_RANGE = (0.3, 2.0)


def _check_interval_range(intervals):
    lo, hi = INTERVAL_RANGE
    if np.any((intervals < lo) | (intervals > hi)):
        raise ValueError(f"ground-truth intervals must lie in [{lo}, {hi}] s")


@dataclass(frozen=True)
class GroundTruth:
    """Reference heartbeat timing.

    Either ``beat_times`` (R-peak instants) or a sampled interval curve
    ``(interval_times, intervals)`` must be given. ``interval_fn`` is an
    optional exact instantaneous interval (synthetic data only).
    """

    beat_times: Optional[np.ndarray] = None
    interval_times: Optional[np.ndarray] = None
    intervals: Optional[np.ndarray] = None
    interval_fn: Optional[Callable] = None

    def __post_init__(self):
        if self.beat_times is not None:
            beats = np.asarray(self.beat_times, dtype=float)
            if len(beats) < 2:
                raise ValueError("ground truth needs at least 2 beats")
            if np.any(np.diff(beats) <= 0):
                raise ValueError("beat times must be strictly increasing")
            _check_interval_range(np.diff(beats))
            object.__setattr__(self, "beat_times", beats)
        elif self.intervals is not None and self.interval_times is not None:
            times = np.asarray(self.interval_times, dtype=float)
            values = np.asarray(self.intervals, dtype=float)
            if times.shape != values.shape or len(times) < 1:
                raise ValueError("interval_times and intervals must match")
            _check_interval_range(values)
            object.__setattr__(self, "interval_times", times)
            object.__setattr__(self, "intervals", values)
        else:
            raise ValueError("ground truth needs beat_times or intervals")

    @property
    def span(self):
        if self.beat_times is not None:
            return self.beat_times[0], self.beat_times[-1]
        return self.interval_times[0], self.interval_times[-1]


def beat_interval_curve(beat_times):
    """Interbeat intervals placed at the midpoints of their beat pairs."""
    beats = np.asarray(beat_times, dtype=float)
    return 0.5 * (beats[1:] + beats[:-1]), np.diff(beats)


def segment_centres(duration: float, segment_s: float = 1.0, start: float = 0.0):
    count = int(math.floor(duration / segment_s + 1e-9))
    return start + segment_s * (np.arange(count) + 0.5)


def resample_truth(gt: GroundTruth, segment_times) -> np.ndarray:
    """True interval at each segment centre, NaN where not comparable.

    For beat-time truth, each interbeat interval is anchored at the midpoint
    of its beat pair and the curve is linearly interpolated; centres between
    the first beat and the first midpoint (or the last midpoint and the last
    beat) take the nearest interval.
    """
    t = np.asarray(segment_times, dtype=float)
    lo, hi = gt.span
    if gt.beat_times is not None:
        mid, ibi = beat_interval_curve(gt.beat_times)
    else:
        mid, ibi = gt.interval_times, gt.intervals
    out = np.interp(t, mid, ibi)
    out[(t < lo) | (t > hi)] = np.nan
    return out


def align_to_segments(times, intervals, segment_starts, segment_s: float = 1.0):
    """Per-segment estimate: the entry whose timestamp falls in the segment.

    Segments without an entry are MISSING (NaN). When several entries share a
    segment the earliest one is used.
    """
    times = np.asarray(times, dtype=float)
    intervals = np.asarray(intervals, dtype=float)
    starts = np.asarray(segment_starts, dtype=float)
    out = np.full(len(starts), np.nan)
    idx = np.floor((times - starts[0]) / segment_s + 1e-9).astype(int) if len(starts) else []
    for k, i in enumerate(idx):
        if 0 <= i < len(out) and np.isnan(out[i]):
            out[i] = intervals[k]
    return out


@dataclass(frozen=True)
class MetricsReport:
    rmse_ms: float
    cc: float
    tcr_pct: float
    n_segments: int
    n_valid: int

    def to_dict(self) -> dict:
        def clean(v):
            return None if isinstance(v, float) and math.isnan(v) else v

        return {
            "rmse_ms": clean(self.rmse_ms),
            "cc": clean(self.cc),
            "tcr_pct": clean(self.tcr_pct),
            "n_segments": self.n_segments,
            "n_valid": self.n_valid,
        }


def pearson(x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) < 2:
        return math.nan
    dx = x - x.mean()
    dy = y - y.mean()
    denom = math.sqrt(float(np.sum(dx * dx)) * float(np.sum(dy * dy)))
    if denom == 0:
        return math.nan
    return float(np.clip(np.sum(dx * dy) / denom, -1.0, 1.0))


def score(estimates, truth, t_theta_tcr: float = 0.030) -> MetricsReport:
    """RMSE/CC over segments with an estimate, TCR over all segments.

    ``estimates`` and ``truth`` are per-segment interval arrays in seconds
    with NaN for MISSING (or uncomparable truth). A segment counts toward
    TCR only if ``|error| < t_theta_tcr`` strictly.
    """
    est = np.asarray(estimates, dtype=float)
    ref = np.asarray(truth, dtype=float)
    if est.shape != ref.shape:
        raise ValueError("track and truth must be aligned to the same segments")
    m_total = len(est)
    valid = ~np.isnan(est) & ~np.isnan(ref)
    n_valid = int(valid.sum())
    err = est[valid] - ref[valid]
    if n_valid:
        rmse = 1e3 * math.sqrt(float(np.mean(err**2)))
    else:
        rmse = math.nan
    cc = pearson(est[valid], ref[valid])
    hits = int(np.sum(np.abs(err) < t_theta_tcr - BOUNDARY_EPS))
    tcr = 100.0 * hits / m_total if m_total else 0.0
    return MetricsReport(rmse, cc, tcr, m_total, n_valid)


def aggregate(reports) -> dict:
    """Arithmetic mean of each metric over the records where it is defined."""
    reports = list(reports)
    out = {}
    for key in ("rmse_ms", "cc", "tcr_pct"):
        vals = [getattr(r, key) for r in reports if not math.isnan(getattr(r, key))]
        out[key] = float(np.mean(vals)) if vals else None
    out["n_records"] = len(reports)
    return out

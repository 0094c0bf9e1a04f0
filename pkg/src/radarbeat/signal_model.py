"""Time-series containers and radar-echo to displacement conversion.

The radar front end (chirp demodulation, beamforming) is not modelled here.
Inputs are per-range-bin complex slow-time columns, which is what both real
exports and :mod:`radarbeat.synth` provide.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0
# 60-64 GHz band centre
DEFAULT_CARRIER_HZ = 62e9
DEFAULT_WAVELENGTH = SPEED_OF_LIGHT / DEFAULT_CARRIER_HZ


@dataclass(frozen=True)
class ComplexSeries:
    """Uniformly sampled complex slow-time signal."""

    samples: np.ndarray
    t0: float
    start_time: float = 0.0

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=complex)
        if samples.ndim != 1:
            raise ValueError("samples must be one-dimensional")
        if not self.t0 > 0:
            raise ValueError(f"t0 must be positive, got {self.t0}")
        object.__setattr__(self, "samples", samples)

    def __len__(self):
        return len(self.samples)

    @property
    def fs(self) -> float:
        return 1.0 / self.t0

    @property
    def times(self) -> np.ndarray:
        return self.start_time + self.t0 * np.arange(len(self.samples))


@dataclass(frozen=True)
class RealSeries:
    """Uniformly sampled real signal (displacement, derivatives, envelopes)."""

    samples: np.ndarray
    t0: float
    start_time: float = 0.0

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        if samples.ndim != 1:
            raise ValueError("samples must be one-dimensional")
        if not self.t0 > 0:
            raise ValueError(f"t0 must be positive, got {self.t0}")
        if not np.all(np.isfinite(samples)):
            raise ValueError("samples must be finite")
        object.__setattr__(self, "samples", samples)

    def __len__(self):
        return len(self.samples)

    @property
    def fs(self) -> float:
        return 1.0 / self.t0

    @property
    def duration(self) -> float:
        return len(self.samples) * self.t0

    @property
    def times(self) -> np.ndarray:
        return self.start_time + self.t0 * np.arange(len(self.samples))

    def with_samples(self, samples) -> "RealSeries":
        return RealSeries(samples, self.t0, self.start_time)


@dataclass(frozen=True)
class RangeBinMatrix:
    """Complex slow-time data for a set of range bins.

    ``bins`` has shape ``(n_slow_time, n_bins)``.
    """

    bins: np.ndarray
    t0: float
    bin_spacing: float = 1.0
    start_time: float = 0.0

    def __post_init__(self):
        bins = np.asarray(self.bins, dtype=complex)
        if bins.ndim != 2:
            raise ValueError("bins must be a 2-D array [slow time x range bin]")
        if not self.t0 > 0:
            raise ValueError(f"t0 must be positive, got {self.t0}")
        object.__setattr__(self, "bins", bins)

    @property
    def n_bins(self) -> int:
        return self.bins.shape[1]

    def column(self, index: int) -> ComplexSeries:
        return ComplexSeries(self.bins[:, index], self.t0, self.start_time)


@dataclass(frozen=True)
class RadarConfig:
    wavelength: float = DEFAULT_WAVELENGTH
    fs: float = 100.0

    def __post_init__(self):
        if not self.wavelength > 0:
            raise ValueError(f"wavelength must be positive, got {self.wavelength}")
        if not self.fs > 0:
            raise ValueError(f"fs must be positive, got {self.fs}")


def clutter_suppress(m: RangeBinMatrix) -> RangeBinMatrix:
    """Subtract the slow-time mean from every range bin."""
    if m.bins.size == 0:
        raise ValueError("empty input")
    bins = m.bins - m.bins.mean(axis=0, keepdims=True)
    return RangeBinMatrix(bins, m.t0, m.bin_spacing, m.start_time)


def locate_target(m: RangeBinMatrix) -> int:
    """Index of the range bin with the largest time-averaged power.

    Ties go to the smallest index.
    """
    if m.bins.size == 0:
        raise ValueError("empty input")
    power = np.mean(np.abs(m.bins) ** 2, axis=0)
    if not np.any(power > 0):
        raise ValueError("no target power")
    return int(np.argmax(power))


def wrapped_steps(phase_increments: np.ndarray) -> np.ndarray:
    """Map phase increments into the half-open interval (-pi, pi]."""
    return np.pi - np.mod(np.pi - phase_increments, 2 * np.pi)


def unwrap_phase(s: np.ndarray) -> np.ndarray:
    """Unwrapped phase of a complex sequence.

    Consecutive differences are forced into (-pi, pi], with an exact step of
    -pi mapped to +pi. The first sample keeps its principal value.
    """
    s = np.asarray(s, dtype=complex)
    phase = np.angle(s)
    if len(s) < 2:
        return phase
    steps = wrapped_steps(np.diff(phase))
    out = np.empty_like(phase)
    out[0] = phase[0]
    out[1:] = phase[0] + np.cumsum(steps)
    return out


def phase_displacement(s: ComplexSeries, cfg: RadarConfig) -> RealSeries:
    """Chest displacement ``(wavelength / 4 pi) * unwrap(angle(s))``."""
    samples = s.samples
    if len(samples) == 0:
        raise ValueError("empty input")
    zero = np.flatnonzero(samples == 0)
    if zero.size:
        raise ValueError(f"undefined phase at index {zero[0]}")
    d = cfg.wavelength / (4 * np.pi) * unwrap_phase(samples)
    return RealSeries(d, s.t0, s.start_time)


def displacement_from_matrix(m: RangeBinMatrix, cfg: RadarConfig):
    """Clutter-suppress, pick the strongest bin and convert it to displacement.

    Returns ``(displacement, s_iq, bin_index)``.
    """
    suppressed = clutter_suppress(m)
    index = locate_target(suppressed)
    s_iq = suppressed.column(index)
    return phase_displacement(s_iq, cfg), s_iq, index

"""Synthetic radar vital-sign records with exact heartbeat ground truth.

Displacement model::

    d(t) = resp_amp   * sum_k resp_decay**(k-1)  * cos(2 pi k f_r t + phi_k)
         + heart_amp  * sum_k heart_decay**(k-1) * cos(k * theta(t))
         + white noise

where ``theta(t) = 2 pi * integral of heart_freq(t)`` and ``heart_freq`` is
piecewise linear through ``(heart_times, heart_freqs)``. Beats are the
instants where ``theta`` crosses a multiple of ``2 pi``.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .metrics import GroundTruth
from .signal_model import DEFAULT_WAVELENGTH, RangeBinMatrix, RealSeries

HEART_BAND = (0.8, 1.7)


@dataclass(frozen=True)
class SynthConfig:
    duration_s: float = 60.0
    fs: float = 100.0
    resp_freq: float = 0.25
    resp_amp: float = 2e-3
    resp_harmonics: int = 4
    resp_decay: float = 0.3
    heart_times: tuple = (0.0,)
    heart_freqs: tuple = (1.0,)
    heart_amp: float = 1e-4
    heart_harmonics: int = 15
    heart_decay: float = 0.85
    noise_sigma: float = 0.0
    wavelength: float = DEFAULT_WAVELENGTH
    clutter_level: float = 1e-2
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "heart_times", tuple(float(v) for v in self.heart_times))
        object.__setattr__(self, "heart_freqs", tuple(float(v) for v in self.heart_freqs))
        checks = [
            ("duration_s", self.duration_s > 0),
            ("fs", self.fs > 0),
            ("resp_freq", self.resp_freq > 0),
            ("resp_amp", self.resp_amp >= 0),
            ("resp_harmonics", self.resp_harmonics >= 0),
            ("resp_decay", self.resp_decay >= 0),
            ("heart_amp", self.heart_amp >= 0),
            ("heart_harmonics", self.heart_harmonics >= 1),
            ("heart_decay", self.heart_decay >= 0),
            ("noise_sigma", self.noise_sigma >= 0),
            ("wavelength", self.wavelength > 0),
            ("clutter_level", self.clutter_level >= 0),
            ("heart_times", len(self.heart_times) == len(self.heart_freqs) >= 1),
            ("heart_times", bool(np.all(np.diff(self.heart_times) > 0))),
            (
                "heart_freqs",
                all(HEART_BAND[0] <= f <= HEART_BAND[1] for f in self.heart_freqs),
            ),
        ]
        for name, ok in checks:
            if not ok:
                raise ValueError(f"invalid SynthConfig field: {name}")

    @classmethod
    def from_dict(cls, data: dict) -> "SynthConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown SynthConfig fields: {sorted(unknown)}")
        return cls(**data)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["heart_times"] = list(self.heart_times)
        d["heart_freqs"] = list(self.heart_freqs)
        return d


@dataclass(frozen=True)
class SynthRecord:
    config: SynthConfig
    matrix: RangeBinMatrix
    displacement: RealSeries
    truth: GroundTruth
    target_bin: int = 1
    clean_displacement: np.ndarray = field(default=None, repr=False)


class HeartOscillator:
    """Cycle count of a piecewise-linear instantaneous frequency."""

    def __init__(self, times, freqs, duration: float):
        times = np.asarray(times, dtype=float)
        freqs = np.asarray(freqs, dtype=float)
        inner = times[(times > 0) & (times < duration)]
        knots = np.concatenate(([0.0], inner, [duration]))
        self.knots = knots
        self.f = np.interp(knots, times, freqs)
        steps = 0.5 * (self.f[1:] + self.f[:-1]) * np.diff(knots)
        self.cum = np.concatenate(([0.0], np.cumsum(steps)))
        self.slope = np.diff(self.f) / np.diff(knots)

    def frequency(self, t):
        return np.interp(t, self.knots, self.f)

    def cycles(self, t):
        t = np.asarray(t, dtype=float)
        seg = np.clip(np.searchsorted(self.knots, t, side="right") - 1, 0, len(self.slope) - 1)
        tau = t - self.knots[seg]
        return self.cum[seg] + self.f[seg] * tau + 0.5 * self.slope[seg] * tau**2

    def beat_times(self) -> np.ndarray:
        total = self.cum[-1]
        m = np.arange(0, int(np.floor(total + 1e-12)) + 1, dtype=float)
        seg = np.clip(np.searchsorted(self.cum, m, side="right") - 1, 0, len(self.slope) - 1)
        r = m - self.cum[seg]
        fa = self.f[seg]
        # root of 0.5 s tau^2 + fa tau - r = 0, cancellation-free form
        tau = 2 * r / (fa + np.sqrt(fa**2 + 2 * self.slope[seg] * r))
        return self.knots[seg] + tau


def clean_components(cfg: SynthConfig):
    """Noise-free respiration and heartbeat displacement on the sample grid."""
    rng = np.random.default_rng(cfg.seed)
    n = int(round(cfg.duration_s * cfg.fs))
    t = np.arange(n) / cfg.fs
    resp = np.zeros(n)
    resp_phases = rng.uniform(0, 2 * np.pi, cfg.resp_harmonics)
    for k in range(1, cfg.resp_harmonics + 1):
        amp = cfg.resp_amp * cfg.resp_decay ** (k - 1)
        resp += amp * np.cos(2 * np.pi * k * cfg.resp_freq * t + resp_phases[k - 1])
    osc = HeartOscillator(cfg.heart_times, cfg.heart_freqs, cfg.duration_s)
    theta = 2 * np.pi * osc.cycles(t)
    heart = np.zeros(n)
    for k in range(1, cfg.heart_harmonics + 1):
        heart += cfg.heart_amp * cfg.heart_decay ** (k - 1) * np.cos(k * theta)
    return t, resp, heart, osc, rng


def noise_sigma_for_snr(cfg: SynthConfig, snr_db: float, reference: str = "heart") -> float:
    """White-noise level giving ``snr_db`` against the heartbeat displacement.

    ``reference="total"`` measures against respiration plus heartbeat
    instead, which at 10 dB leaves the heartbeat several times below the
    noise.
    """
    _, resp, heart, _, _ = clean_components(cfg)
    if reference == "heart":
        sig = heart
    elif reference == "total":
        sig = resp + heart
    else:
        raise ValueError(f"unknown SNR reference {reference!r}")
    power = np.mean((sig - sig.mean()) ** 2)
    return float(np.sqrt(power / 10 ** (snr_db / 10)))


def generate(cfg: SynthConfig) -> SynthRecord:
    """Build a three-bin range matrix, the true displacement and beat times.

    Bin 1 holds ``exp(j 4 pi d / wavelength)``; bins 0 and 2 hold weak static
    clutter plus weak complex noise.
    """
    t, resp, heart, osc, rng = clean_components(cfg)
    clean = resp + heart
    noise = rng.normal(0.0, cfg.noise_sigma, len(t)) if cfg.noise_sigma > 0 else 0.0
    d = clean + noise
    target = np.exp(1j * 4 * np.pi * d / cfg.wavelength)
    level = cfg.clutter_level
    side = []
    for offset in (0.5 + 0.2j, -0.3 + 0.4j):
        wn = rng.normal(size=len(t)) + 1j * rng.normal(size=len(t))
        side.append(offset * level + 0.1 * level * wn)
    bins = np.column_stack([side[0], target, side[1]])
    t0 = 1.0 / cfg.fs
    beats = osc.beat_times()
    truth = GroundTruth(beat_times=beats, interval_fn=lambda tt: 1.0 / osc.frequency(tt))
    return SynthRecord(
        config=cfg,
        matrix=RangeBinMatrix(bins, t0, bin_spacing=0.05),
        displacement=RealSeries(d, t0),
        truth=truth,
        target_bin=1,
        clean_displacement=clean,
    )


def default_corpus_configs(n_records: int = 20, seed: int = 2024, snr_db: float = 10.0):
    """Randomised 60 s records: slowly varying heart rate, 10 dB heartbeat SNR by default."""
    rng = np.random.default_rng(seed)
    configs = []
    for i in range(n_records):
        centre = rng.uniform(0.9, 1.4)
        swing = rng.uniform(0.02, 0.05)
        period = rng.uniform(40.0, 80.0)
        phase = rng.uniform(0, 2 * np.pi)
        times = np.arange(0.0, 61.0, 2.0)
        freqs = centre + swing * np.sin(2 * np.pi * times / period + phase)
        cfg = SynthConfig(
            resp_freq=float(rng.uniform(0.2, 0.33)),
            resp_amp=float(rng.uniform(1.5e-3, 3e-3)),
            heart_amp=float(rng.uniform(0.8e-4, 1.2e-4)),
            heart_times=tuple(times),
            heart_freqs=tuple(np.round(freqs, 6)),
            seed=int(seed * 1000 + i),
        )
        sigma = noise_sigma_for_snr(cfg, snr_db)
        configs.append(replace(cfg, noise_sigma=sigma))
    return configs

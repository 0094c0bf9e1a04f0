"""Zero-padded spectra, local spectral autocorrelation and the nonlinear
harmonic spectrum (NLHS).

The local autocorrelation of a spectrum ``D`` is

    c(f0, df) = | sum_{|f'| <= F/2} D(f0 + df + f') conj(D(f0 + f')) | * bin_width

and the NLHS at a candidate fundamental ``f`` is ``sum_{n=1..N} c(n f, f)``.
Off-grid frequencies are rounded to the nearest FFT bin.
"""
from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .signal_model import RealSeries


@dataclass(frozen=True)
class Spectrum:
    """One-sided complex spectrum on the grid ``k * df``, ``k = 0..len-1``."""

    coeffs: np.ndarray
    df: float
    f_max: float

    def __post_init__(self):
        if not self.df > 0:
            raise ValueError(f"df must be positive, got {self.df}")

    @property
    def freqs(self) -> np.ndarray:
        return self.df * np.arange(len(self.coeffs))


@dataclass(frozen=True)
class PseudoSpectrum:
    values: np.ndarray
    freqs: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        freqs = np.asarray(self.freqs, dtype=float)
        if values.shape != freqs.shape:
            raise ValueError("values and freqs must have the same shape")
        if np.any(values < 0):
            raise ValueError("pseudo-spectrum values must be non-negative")
        if np.any(np.diff(freqs) <= 0):
            raise ValueError("freqs must be strictly increasing")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "freqs", freqs)


@dataclass(frozen=True)
class NlhsParams:
    """Correlation band, heart-rate search band and harmonic order."""

    F: float = 0.5
    f_min: float = 0.8
    f_max_search: float = 1.7
    N: int = 15
    df_target: float = 0.001

    def __post_init__(self):
        if not 0 < self.f_min < self.f_max_search:
            raise ValueError("need 0 < f_min < f_max_search")
        if not self.F > 0:
            raise ValueError("F must be positive")
        if self.N < 1:
            raise ValueError("N must be >= 1")
        if not self.df_target > 0:
            raise ValueError("df_target must be positive")

    def candidate_freqs(self) -> np.ndarray:
        count = int(round((self.f_max_search - self.f_min) / self.df_target)) + 1
        return self.f_min + self.df_target * np.arange(count)

    def check_nyquist(self, nyquist: float, n_max: int | None = None):
        """Raise if the highest shifted band would leave ``[0, nyquist]``."""
        n_max = self.N if n_max is None else n_max
        top = (n_max + 1) * self.f_max_search + self.F / 2
        if top > nyquist:
            raise ValueError(
                f"band out of range: harmonic band reaches {top:.3f} Hz, "
                f"Nyquist is {nyquist:.3f} Hz"
            )


def next_pow2(n: int) -> int:
    return 1 << max(0, int(n - 1).bit_length())


def windowed_spectrum(x: RealSeries, pad_factor: int = 64) -> Spectrum:
    """Hann-windowed, zero-padded one-sided FFT.

    The padded length is the next power of two at or above
    ``pad_factor * len(x)``.
    """
    n = len(x)
    if n < 2:
        raise ValueError("need at least 2 samples")
    if pad_factor < 1:
        raise ValueError("pad_factor must be >= 1")
    nfft = next_pow2(pad_factor * n)
    coeffs = np.fft.rfft(x.samples * np.hanning(n), nfft)
    return Spectrum(coeffs, x.fs / nfft, x.fs / 2)


def bin_index(f, df: float):
    """Nearest-bin index, halves rounded up."""
    return np.floor(np.asarray(f) / df + 0.5).astype(np.int64)


def band_halfwidth(F: float, df: float) -> int:
    """Number of bins on each side of the centre inside ``[-F/2, F/2]``."""
    return int(np.floor(F / 2 / df + 1e-9))


def local_autocorrelation(D: Spectrum, f0: float, delta_f: float, F: float) -> float:
    """Magnitude of the band-limited spectral autocorrelation at lag ``delta_f``."""
    if f0 - F / 2 < 0 or f0 + delta_f + F / 2 > D.f_max:
        raise ValueError("band out of range")
    half = band_halfwidth(F, D.df)
    i = int(bin_index(f0, D.df))
    j = int(bin_index(f0 + delta_f, D.df))
    if i - half < 0 or j + half >= len(D.coeffs) or j - half < 0:
        raise ValueError("band out of range")
    a = D.coeffs[j - half : j + half + 1]
    b = D.coeffs[i - half : i + half + 1]
    return float(abs(np.dot(a, np.conj(b))) * D.df)


@numba.njit(cache=True)
def _harmonic_terms(re, im, centres, lags_end, half, df):
    # out[n, k] = |sum_m D[lags_end[n,k] + m] conj(D[centres[n,k] + m])| * df
    n_orders, n_cand = centres.shape
    out = np.empty((n_orders, n_cand))
    for n in range(n_orders):
        for k in range(n_cand):
            i0 = centres[n, k] - half
            j0 = lags_end[n, k] - half
            sr = 0.0
            si = 0.0
            for m in range(2 * half + 1):
                ar = re[j0 + m]
                ai = im[j0 + m]
                br = re[i0 + m]
                bi = im[i0 + m]
                sr += ar * br + ai * bi
                si += ai * br - ar * bi
            out[n, k] = np.sqrt(sr * sr + si * si) * df
    return out


def harmonic_terms(D: Spectrum, p: NlhsParams, n_max: int | None = None) -> np.ndarray:
    """Matrix of ``c(n f, f)`` for ``n = 1..n_max`` (rows) over the candidate grid.

    Cumulative sums along the first axis give the NLHS for every order up to
    ``n_max`` at once.
    """
    n_max = p.N if n_max is None else n_max
    freqs = p.candidate_freqs()
    half = band_halfwidth(p.F, D.df)
    orders = np.arange(1, n_max + 1)[:, None]
    centres = bin_index(orders * freqs, D.df)
    ends = bin_index((orders + 1) * freqs, D.df)
    if p.f_min - p.F / 2 < 0 or (n_max + 1) * freqs[-1] + p.F / 2 > D.f_max:
        raise ValueError("band out of range")
    if centres.min() - half < 0 or ends.max() + half >= len(D.coeffs):
        raise ValueError("band out of range")
    coeffs = np.ascontiguousarray(D.coeffs)
    return _harmonic_terms(coeffs.real.copy(), coeffs.imag.copy(), centres, ends, half, D.df)


def nlhs(D: Spectrum, p: NlhsParams) -> PseudoSpectrum:
    """Incoherent sum of ``c(n f, f)`` over ``n = 1..p.N``."""
    terms = harmonic_terms(D, p)
    return PseudoSpectrum(terms.sum(axis=0), p.candidate_freqs())


def peak_frequency(ps: PseudoSpectrum) -> float:
    """Grid frequency of the maximum; ties resolve to the lowest frequency."""
    if len(ps.values) == 0:
        raise ValueError("empty pseudo-spectrum")
    return float(ps.freqs[int(np.argmax(ps.values))])


def power_peak(D: Spectrum, f_lo: float, f_hi: float) -> float:
    """Frequency of the largest ``|D|**2`` bin inside ``[f_lo, f_hi]``."""
    freqs = D.freqs
    mask = (freqs >= f_lo) & (freqs <= f_hi)
    if not np.any(mask):
        raise ValueError("no spectral bins inside the search band")
    idx = np.flatnonzero(mask)
    return float(freqs[idx[int(np.argmax(np.abs(D.coeffs[idx]) ** 2))]])

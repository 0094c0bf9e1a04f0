"""Radar heartbeat-interval estimation with the nonlinear harmonic spectrum."""
from .estimator import EstimatorParams, IntervalTrack, estimate, estimate_complex
from .signal_model import ComplexSeries, RadarConfig, RangeBinMatrix, RealSeries
from .spectral import NlhsParams, PseudoSpectrum, Spectrum

__all__ = [
    "ComplexSeries",
    "EstimatorParams",
    "IntervalTrack",
    "NlhsParams",
    "PseudoSpectrum",
    "RadarConfig",
    "RangeBinMatrix",
    "RealSeries",
    "Spectrum",
    "estimate",
    "estimate_complex",
]

__version__ = "0.1.0"

"""CSV/JSON readers and writers for the on-disk formats.

* range-bin matrix: ``t,bin0_re,bin0_im,bin1_re,bin1_im,...``
* real series: ``t,value``
* interval track: ``t_sec,interval_sec`` (empty field = MISSING)
* ground truth: ``beat_time_sec`` or ``t_sec,interval_sec``
* pseudo-spectrum: ``f_hz,value``
"""
from __future__ import annotations

import csv
import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from .estimator import IntervalTrack
from .metrics import GroundTruth
from .signal_model import RangeBinMatrix, RealSeries
from .spectral import PseudoSpectrum

UNIFORM_TOL = 1e-9


def _fmt(v: float) -> str:
    return "" if math.isnan(v) else repr(float(v))


def atomic_write_text(path, text: str):
    """Write via a temporary file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_rows(path, header, rows):
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    atomic_write_text(path, "\n".join(lines) + "\n")


def _read_rows(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        rows = [row for row in reader if row and any(c.strip() for c in row)]
    return header, rows


def _float(cell: str) -> float:
    cell = cell.strip()
    return math.nan if cell == "" else float(cell)


def read_header(path) -> list:
    header, _ = _read_rows(path)
    return header


def sampling_interval(t) -> float:
    """Sampling interval of a time column, which must be uniform to 1 ns."""
    t = np.asarray(t, dtype=float)
    if len(t) < 2:
        raise ValueError("need at least two time stamps to infer the sampling interval")
    steps = np.diff(t)
    t0 = (t[-1] - t[0]) / (len(t) - 1)
    if t0 <= 0 or np.max(np.abs(steps - t0)) > UNIFORM_TOL:
        raise ValueError("time column is not uniformly sampled (tolerance 1e-9 s)")
    return float(t0)


def write_range_bins(path, m: RangeBinMatrix):
    header = ["t"]
    for b in range(m.n_bins):
        header += [f"bin{b}_re", f"bin{b}_im"]
    t = m.start_time + m.t0 * np.arange(m.bins.shape[0])
    cols = [t]
    for b in range(m.n_bins):
        cols += [m.bins[:, b].real, m.bins[:, b].imag]
    _write_rows(path, header, np.column_stack(cols))


def read_range_bins(path, bin_spacing: float = 1.0) -> RangeBinMatrix:
    header, rows = _read_rows(path)
    if not header or header[0] != "t" or len(header) < 3 or len(header) % 2 != 1:
        raise ValueError(f"{path}: expected header t,bin0_re,bin0_im,...")
    for b in range((len(header) - 1) // 2):
        if header[1 + 2 * b] != f"bin{b}_re" or header[2 + 2 * b] != f"bin{b}_im":
            raise ValueError(f"{path}: malformed column names near bin{b}")
    data = np.array([[float(c) for c in row] for row in rows])
    if data.ndim != 2 or data.shape[1] != len(header):
        raise ValueError(f"{path}: ragged rows")
    t0 = sampling_interval(data[:, 0])
    bins = data[:, 1::2] + 1j * data[:, 2::2]
    return RangeBinMatrix(bins, t0, bin_spacing, float(data[0, 0]))


def write_real_series(path, x: RealSeries):
    _write_rows(path, ["t", "value"], np.column_stack([x.times, x.samples]))


def read_real_series(path) -> RealSeries:
    header, rows = _read_rows(path)
    if header[:2] != ["t", "value"]:
        raise ValueError(f"{path}: expected header t,value")
    data = np.array([[float(c) for c in row[:2]] for row in rows])
    t0 = sampling_interval(data[:, 0])
    return RealSeries(data[:, 1], t0, float(data[0, 0]))


def write_track(path, track: IntervalTrack):
    _write_rows(path, ["t_sec", "interval_sec"], zip(track.times, track.intervals))


def read_track(path) -> IntervalTrack:
    header, rows = _read_rows(path)
    if header[:2] != ["t_sec", "interval_sec"]:
        raise ValueError(f"{path}: expected header t_sec,interval_sec")
    times = [_float(r[0]) for r in rows]
    vals = [_float(r[1]) if len(r) > 1 else math.nan for r in rows]
    return IntervalTrack(np.array(times), np.array(vals))


def write_beat_times(path, beats):
    _write_rows(path, ["beat_time_sec"], ((b,) for b in beats))


def read_truth(path) -> GroundTruth:
    header, rows = _read_rows(path)
    if header[:1] == ["beat_time_sec"]:
        return GroundTruth(beat_times=np.array([float(r[0]) for r in rows]))
    if header[:2] == ["t_sec", "interval_sec"]:
        data = np.array([[float(c) for c in r[:2]] for r in rows])
        return GroundTruth(interval_times=data[:, 0], intervals=data[:, 1])
    raise ValueError(f"{path}: expected header beat_time_sec or t_sec,interval_sec")


def write_pseudo_spectrum(path, ps: PseudoSpectrum):
    _write_rows(path, ["f_hz", "value"], zip(ps.freqs, ps.values))


def dumps_json(obj) -> str:
    """Deterministic JSON: sorted keys, NaN written as null."""

    def clean(o):
        if isinstance(o, dict):
            return {str(k): clean(v) for k, v in o.items()}
        if isinstance(o, (list, tuple)):
            return [clean(v) for v in o]
        if isinstance(o, (np.floating, float)):
            return None if math.isnan(o) else float(o)
        if isinstance(o, np.integer):
            return int(o)
        return o

    return json.dumps(clean(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json(path, obj):
    atomic_write_text(path, dumps_json(obj))

"""Method dispatch, parameter files and the corpus runner."""
from __future__ import annotations

import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Optional

from . import baselines, estimator, fileio, metrics, synth
from .estimator import EstimatorParams, IntervalTrack
from .signal_model import (
    DEFAULT_WAVELENGTH,
    ComplexSeries,
    RadarConfig,
    RealSeries,
    displacement_from_matrix,
)
from .spectral import NlhsParams

log = logging.getLogger(__name__)

MODES = ("prop1", "prop2", "conv1a", "conv2a")
SEGMENT_S = 1.0


@dataclass(frozen=True)
class Params:
    estimator: EstimatorParams = EstimatorParams()
    nlhs: NlhsParams = NlhsParams()
    wavelength: float = DEFAULT_WAVELENGTH
    segment_s: float = SEGMENT_S
    tcr_threshold_s: float = 0.030

    def to_dict(self) -> dict:
        return {
            "estimator": asdict(self.estimator),
            "nlhs": asdict(self.nlhs),
            "wavelength": self.wavelength,
            "segment_s": self.segment_s,
            "tcr_threshold_s": self.tcr_threshold_s,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Params":
        data = dict(data)
        unknown = set(data) - {f.name for f in fields(cls)} - {"synth"}
        if unknown:
            raise ValueError(f"unknown parameter sections: {sorted(unknown)}")
        est = _build(EstimatorParams, data.get("estimator", {}))
        nl = _build(NlhsParams, data.get("nlhs", {}))
        extra = {k: data[k] for k in ("wavelength", "segment_s", "tcr_threshold_s") if k in data}
        return cls(estimator=est, nlhs=nl, **extra)


def _build(cls, section: dict):
    known = {f.name for f in fields(cls)}
    unknown = set(section) - known
    if unknown:
        raise ValueError(f"unknown {cls.__name__} fields: {sorted(unknown)}")
    return cls(**section)


def load_params(path: Optional[str]) -> Params:
    if path is None:
        return Params()
    with open(path) as fh:
        return Params.from_dict(json.load(fh))


@dataclass(frozen=True)
class RecordInput:
    """What a method needs: displacement, and the complex signal for the
    ``|d^2 s/dt^2|`` variants."""

    displacement: RealSeries
    s_iq: Optional[ComplexSeries] = None

    @property
    def duration(self) -> float:
        return self.displacement.duration


def load_record_input(path, params: Params) -> RecordInput:
    """Read a range-bin matrix CSV or a displacement CSV."""
    header = fileio.read_header(path)
    if header[:2] == ["t", "bin0_re"]:
        m = fileio.read_range_bins(path)
        d, s_iq, _ = displacement_from_matrix(m, RadarConfig(params.wavelength, 1.0 / m.t0))
        return RecordInput(d, s_iq)
    if header[:2] == ["t", "value"]:
        return RecordInput(fileio.read_real_series(path))
    raise ValueError(f"{path}: not a range-bin matrix or displacement CSV")


def run_mode(mode: str, rec: RecordInput, params: Params) -> IntervalTrack:
    p, q = params.estimator, params.nlhs
    band = (q.f_min, q.f_max_search)
    if mode in ("prop2", "conv2a") and rec.s_iq is None:
        raise ValueError(f"mode {mode} needs the complex radar signal (range-bin CSV input)")
    if mode == "prop1":
        return estimator.estimate(rec.displacement, p, q)
    if mode == "prop2":
        return estimator.estimate_complex(rec.s_iq, p, q)
    if mode == "conv1a":
        return baselines.stft_estimate(estimator.enhance_displacement(rec.displacement, p), p, band)
    if mode == "conv2a":
        return baselines.stft_estimate(estimator.enhance_complex(rec.s_iq, p), p, band)
    raise ValueError(f"unknown mode {mode!r}; choose from {', '.join(MODES)}")


def evaluate_track(track: IntervalTrack, truth: metrics.GroundTruth, duration: float,
                   params: Params, start: float = 0.0) -> metrics.MetricsReport:
    """Score a track on consecutive segments covering the record."""
    centres = metrics.segment_centres(duration, params.segment_s, start)
    starts = centres - params.segment_s / 2
    est = metrics.align_to_segments(track.times, track.intervals, starts, params.segment_s)
    ref = metrics.resample_truth(truth, centres)
    return metrics.score(est, ref, params.tcr_threshold_s)


def format_table(rows: dict) -> str:
    """Plain-text table, one method per row: RMSE (ms), CC, TCR (%)."""

    def cell(v, fmt):
        return "n/a" if v is None or (isinstance(v, float) and math.isnan(v)) else format(v, fmt)

    lines = [f"{'Method':<8} {'RMSE (ms)':>10} {'CC':>6} {'TCR (%)':>8}"]
    for name, r in rows.items():
        lines.append(
            f"{name:<8} {cell(r.get('rmse_ms'), '10.2f')} {cell(r.get('cc'), '6.2f')} "
            f"{cell(r.get('tcr_pct'), '8.2f')}"
        )
    return "\n".join(lines) + "\n"


# ---- corpus handling ------------------------------------------------------

MATRIX_FILE = "matrix.csv"
DISPLACEMENT_FILE = "displacement.csv"
TRUTH_FILE = "truth.csv"
CONFIG_FILE = "config.json"


def write_record(out_dir, rec: synth.SynthRecord):
    out = Path(out_dir)
    fileio.write_range_bins(out / MATRIX_FILE, rec.matrix)
    fileio.write_real_series(out / DISPLACEMENT_FILE, rec.displacement)
    fileio.write_beat_times(out / TRUTH_FILE, rec.truth.beat_times)
    fileio.write_json(out / CONFIG_FILE, rec.config.to_dict())


def write_corpus(out_dir, configs):
    out = Path(out_dir)
    names = []
    for i, cfg in enumerate(configs):
        name = f"record_{i:02d}"
        write_record(out / name, synth.generate(cfg))
        names.append(name)
    return names


def corpus_records(corpus_dir) -> list:
    """Record directories (sorted) holding a matrix or displacement CSV."""
    root = Path(corpus_dir)
    if not root.is_dir():
        raise ValueError(f"corpus directory not found: {root}")
    found = []
    for d in sorted(p for p in root.iterdir() if p.is_dir()):
        if (d / MATRIX_FILE).exists() or (d / DISPLACEMENT_FILE).exists():
            found.append(d)
    return found


def _process_record(args):
    record_dir, modes, params = args
    record_dir = Path(record_dir)
    src = record_dir / MATRIX_FILE
    if not src.exists():
        src = record_dir / DISPLACEMENT_FILE
    rec = load_record_input(src, params)
    truth = fileio.read_truth(record_dir / TRUTH_FILE)
    out = {}
    for mode in modes:
        try:
            track = run_mode(mode, rec, params)
        except ValueError as exc:
            log.warning("%s: %s failed: %s", record_dir.name, mode, exc)
            out[mode] = None
            continue
        out[mode] = evaluate_track(
            track, truth, rec.duration, params, rec.displacement.start_time
        ).to_dict()
    return record_dir.name, out


class CorpusFailure(RuntimeError):
    """Estimation failed on every record."""


def run_corpus(corpus_dir, modes, params: Params, jobs: int = 1) -> dict:
    """Run every mode on every record and average the metrics per mode."""
    modes = list(modes)
    for mode in modes:
        if mode not in MODES:
            raise ValueError(f"unknown mode {mode!r}")
    records = []
    for d in corpus_records(corpus_dir):
        if not (d / TRUTH_FILE).exists():
            log.warning("%s: no ground truth, skipped", d.name)
            continue
        records.append(d)
    if not records:
        raise ValueError(f"no records with ground truth in {corpus_dir}")
    tasks = [(str(d), modes, params) for d in records]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_process_record, tasks))
    else:
        results = [_process_record(t) for t in tasks]

    per_mode = {}
    any_success = False
    for mode in modes:
        recs = {name: res[mode] for name, res in results if res[mode] is not None}
        any_success = any_success or bool(recs)
        reports = [metrics.MetricsReport(**{k: (math.nan if v is None else v) for k, v in r.items()})
                   for r in recs.values()]
        per_mode[mode] = {"mean": metrics.aggregate(reports), "records": recs}
    if not any_success:
        raise CorpusFailure("estimation failed on all records")
    return {"modes": per_mode, "params": params.to_dict(), "n_records": len(records)}

"""Command-line entry point.

Exit codes: 0 success, 1 bad input, 2 estimation failed on every record.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import fileio, pipeline, spectral, synth
from .estimator import enhance_complex, enhance_displacement, window_layout
from .signal_model import RealSeries

log = logging.getLogger("radarbeat")

EXIT_OK, EXIT_BAD_INPUT, EXIT_ALL_FAILED = 0, 1, 2


def _load_json(path):
    if path is None:
        return {}
    with open(path) as fh:
        return json.load(fh)


def cmd_simulate(args) -> int:
    out = Path(args.out)
    if args.corpus:
        seed = 2024 if args.seed is None else args.seed
        snr = 10.0 if args.snr_db is None else args.snr_db
        configs = synth.default_corpus_configs(args.corpus, seed=seed, snr_db=snr)
        names = pipeline.write_corpus(out, configs)
        print(f"wrote {len(names)} records to {out}")
        return EXIT_OK
    data = _load_json(args.config)
    data = data.get("synth", data)
    cfg = synth.SynthConfig.from_dict(data)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    if args.snr_db is not None and "noise_sigma" not in data:
        cfg = replace(cfg, noise_sigma=synth.noise_sigma_for_snr(cfg, args.snr_db))
    pipeline.write_record(out, synth.generate(cfg))
    print(f"wrote record to {out}")
    return EXIT_OK


def cmd_estimate(args) -> int:
    params = pipeline.load_params(args.params)
    rec = pipeline.load_record_input(args.input, params)
    track = pipeline.run_mode(args.mode, rec, params)
    if args.out:
        fileio.write_track(args.out, track)
    else:
        sys.stdout.write("t_sec,interval_sec\n")
        for t, v in zip(track.times, track.intervals):
            sys.stdout.write(f"{t!r},{'' if v != v else repr(float(v))}\n")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    params = pipeline.load_params(args.params)
    track = fileio.read_track(args.input)
    truth = fileio.read_truth(args.truth)
    if args.duration is not None:
        duration = args.duration
    else:
        lo, hi = truth.span
        duration = hi - lo
    report = pipeline.evaluate_track(track, truth, duration, params)
    if args.out:
        fileio.write_json(args.out, report.to_dict())
    sys.stdout.write(pipeline.format_table({args.label: report.to_dict()}))
    return EXIT_OK


def cmd_spectrum_dump(args) -> int:
    params = pipeline.load_params(args.params)
    rec = pipeline.load_record_input(args.input, params)
    p, q = params.estimator, params.nlhs
    if args.N is not None:
        q = replace(q, N=args.N)
    if args.variant == "d2":
        y = enhance_displacement(rec.displacement, p)
    else:
        if rec.s_iq is None:
            raise ValueError("variant 'iq' needs a range-bin matrix input")
        y = enhance_complex(rec.s_iq, p)
    _, width, _ = window_layout(y, p)
    start = int(round(args.window_start / y.t0))
    if start + width > len(y):
        raise ValueError("window extends past the end of the record")
    seg = RealSeries(y.samples[start : start + width], y.t0)
    ps = spectral.nlhs(spectral.windowed_spectrum(seg, p.pad_factor), q)
    fileio.write_pseudo_spectrum(args.out, ps)
    print(f"peak {spectral.peak_frequency(ps):.3f} Hz")
    return EXIT_OK


def cmd_corpus(args) -> int:
    params = pipeline.load_params(args.params)
    modes = args.mode or list(pipeline.MODES)
    try:
        report = pipeline.run_corpus(args.input, modes, params, jobs=args.jobs)
    except pipeline.CorpusFailure as exc:
        log.error("%s", exc)
        return EXIT_ALL_FAILED
    out = Path(args.out)
    fileio.write_json(out / "report.json", report)
    table = pipeline.format_table({m: report["modes"][m]["mean"] for m in modes})
    fileio.atomic_write_text(out / "table.txt", table)
    sys.stdout.write(table)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="radarbeat", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate synthetic radar records")
    p.add_argument("--config", help="JSON SynthConfig (or a file with a 'synth' section)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int)
    p.add_argument("--snr-db", type=float, default=None,
                   help="set noise from heartbeat-referenced SNR")
    p.add_argument("--corpus", type=int, default=0,
                   help="write the default randomised corpus with this many records")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate", help="estimate a heartbeat interval track")
    p.add_argument("--input", required=True, help="range-bin matrix or displacement CSV")
    p.add_argument("--mode", choices=pipeline.MODES, default="prop1")
    p.add_argument("--params", help="JSON parameter file")
    p.add_argument("--out", help="track CSV (stdout if omitted)")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("evaluate", help="score a track against ground truth")
    p.add_argument("--input", required=True, help="track CSV")
    p.add_argument("--truth", required=True, help="ground-truth CSV")
    p.add_argument("--params", help="JSON parameter file")
    p.add_argument("--duration", type=float, help="record length in seconds")
    p.add_argument("--label", default="track")
    p.add_argument("--out", help="metrics JSON")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("spectrum-dump", help="write the NLHS of one analysis window")
    p.add_argument("--input", required=True)
    p.add_argument("--params")
    p.add_argument("--window-start", type=float, default=0.0, help="seconds")
    p.add_argument("--N", type=int, help="harmonic order (default from params)")
    p.add_argument("--variant", choices=("d2", "iq"), default="d2")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_spectrum_dump)

    p = sub.add_parser("corpus", help="run methods over a corpus and tabulate metrics")
    p.add_argument("--input", required=True, help="corpus directory")
    p.add_argument("--mode", action="append", choices=pipeline.MODES,
                   help="repeatable; default all modes")
    p.add_argument("--params")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_corpus)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValueError, OSError, json.JSONDecodeError, TypeError) as exc:
        log.error("%s", exc)
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())

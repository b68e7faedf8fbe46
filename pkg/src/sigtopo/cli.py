"""Command line entry point: ``sigtopo {analyze,signature,complex-at,synth,sweep}``."""

from __future__ import annotations

import argparse
import itertools
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from .ingest import IngestError, Recording, load_annotations, read_csv, read_edf, resample_mean, write_csv
from .pipeline import (
    AnalysisConfig,
    AnalysisError,
    analyze_window,
    complex_report,
    emit,
    rolling_bands,
    seizure_flags,
    sliding_analysis,
    synth_generate,
    write_trajectory,
)
from .signature import signature_features

log = logging.getLogger("sigtopo")

LOG_ENV = "SIGTOPO_LOG"


def _float_list(text: str) -> list:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _int_list(text: str) -> list:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _name_list(text: str) -> list:
    return [x.strip() for x in text.split(",") if x.strip()]


def _input_parent() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("input", help="EDF file, or CSV with a header row of channel names")
    p.add_argument("--rate", type=float, default=1.0, help="sampling rate of CSV input in Hz")
    p.add_argument("--channels", type=_name_list, default=None, help="comma-separated channel names")
    p.add_argument("--config", help="file of 'key = value' lines; explicit flags win")
    return p


def _analysis_parent(sweep: bool = False) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    if sweep:
        p.add_argument("--lambda1", type=_float_list, default=[1.0])
        p.add_argument("--lambda2", type=_float_list, default=[1.0])
        p.add_argument("--window", type=_int_list, default=[50], help="window lengths L in seconds")
    else:
        p.add_argument("--lambda1", type=float, default=1.0, help="edge-stage penalty")
        p.add_argument("--lambda2", type=float, default=1.0, help="triangle-stage penalty")
        p.add_argument("--window", type=int, default=50, help="window length L in seconds")
    p.add_argument("--deg", type=int, default=3, help="signature truncation order")
    p.add_argument("--max-dim", type=int, choices=(1, 2), default=2)
    p.add_argument("--r2-threshold", type=float, default=0.67)
    p.add_argument("--stride", type=int, default=1)
    p.add_argument("--jobs", type=int, default=0, help="worker processes, 0 for all available cores")
    return p


def _output_parent() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--band-window", type=int, default=120, help="trailing window h, 0 disables bands")
    p.add_argument("--band-field", default="b1", help="trajectory column the bands summarize")
    p.add_argument("--format", choices=("csv", "jsonlines"), default="csv")
    p.add_argument("--annotations", help="seizure intervals, one 'start,end' line per interval")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sigtopo",
        description="Topology of signature-selected channel complexes over sliding windows.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    a = sub.add_parser(
        "analyze",
        parents=[_input_parent(), _analysis_parent(), _output_parent()],
        help="trajectory of Betti numbers and persistence entropy",
    )
    a.add_argument("--out", default="-", help="output path, '-' for stdout")

    s = sub.add_parser("signature", parents=[_input_parent()], help="print a flattened signature")
    s.add_argument("--start", type=float, default=None, help="interval start in seconds")
    s.add_argument("--end", type=float, default=None, help="interval end in seconds")
    s.add_argument("--deg", type=int, default=3)
    s.add_argument("--out", default="-")

    c = sub.add_parser(
        "complex-at",
        parents=[_input_parent(), _analysis_parent()],
        help="dump the complex, filtration and diagram of one window as JSON",
    )
    c.add_argument("--t", type=int, required=True, help="window end in seconds")
    c.add_argument("--out", default="-")

    g = sub.add_parser("synth", help="write a synthetic block-structured recording as CSV")
    g.add_argument("--blocks", type=_int_list, default=[3, 3], help="channels per block")
    g.add_argument("--noise", type=float, default=0.1)
    g.add_argument("--duration", type=int, default=600, help="seconds at 1 Hz")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.add_argument("--config", help="file of 'key = value' lines; explicit flags win")

    w = sub.add_parser(
        "sweep",
        parents=[_input_parent(), _analysis_parent(sweep=True), _output_parent()],
        help="one analysis per (lambda1, lambda2, window) grid cell",
    )
    w.add_argument("--out-dir", required=True)
    parser.set_defaults(_subparsers={"analyze": a, "signature": s, "complex-at": c, "synth": g, "sweep": w})
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: list) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if not getattr(args, "config", None):
        return args
    sub = args._subparsers[args.command]
    known = {action.dest: action for action in sub._actions}
    defaults = {}
    try:
        lines = Path(args.config).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        parser.error(f"cannot read config {args.config}: {exc.strerror}")
    for lineno, line in enumerate(lines, start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            parser.error(f"{args.config}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        dest = key.lstrip("-").replace("-", "_")
        action = known.get(dest)
        if action is None or dest in ("help", "config", "input"):
            parser.error(f"{args.config}:{lineno}: unknown key {key!r}")
        try:
            defaults[dest] = action.type(value) if action.type else value
        except (argparse.ArgumentTypeError, ValueError) as exc:
            parser.error(f"{args.config}:{lineno}: bad value for {key}: {exc}")
        if action.choices is not None and defaults[dest] not in action.choices:
            parser.error(f"{args.config}:{lineno}: {key} must be one of {list(action.choices)}")
    sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def load_recording(path: str, rate: float = 1.0, channels=None) -> Recording:
    """Read EDF or CSV, keep the requested channels and average to 1 Hz."""
    if path.lower().endswith((".edf", ".rec")):
        rec = read_edf(path)
    else:
        rec = read_csv(path, rate)
    if channels:
        rec = rec.select(channels)
    if rec.rate != 1.0:
        rec = resample_mean(rec, 1.0)
    return rec


def _config(args, **overrides) -> AnalysisConfig:
    values = dict(
        lambda1=args.lambda1,
        lambda2=args.lambda2,
        window=args.window,
        deg=args.deg,
        max_dim=args.max_dim,
        r2_threshold=args.r2_threshold,
        stride=args.stride,
        channels=tuple(args.channels or ()),
        band_window=getattr(args, "band_window", 120),
    )
    values.update(overrides)
    return AnalysisConfig(**values)


def _write_text(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _write_trajectory(trajectory, args, path) -> None:
    bands = None
    h = args.band_window
    if h:
        if h > len(trajectory):
            log.warning("band window %d exceeds %d trajectory points; bands omitted", h, len(trajectory))
        else:
            bands = rolling_bands(trajectory, args.band_field, h)
    flags = None
    if args.annotations:
        intervals = load_annotations(Path(args.annotations).read_text(encoding="utf-8"))
        flags = seizure_flags(trajectory, intervals)
    if path == "-":
        write_trajectory(sys.stdout, trajectory, args.format, bands, flags)
    else:
        emit(trajectory, path, args.format, bands, flags)


def _jobs(args) -> int | None:
    return None if args.jobs == 0 else args.jobs


def cmd_analyze(args) -> int:
    rec = load_recording(args.input, args.rate, args.channels)
    trajectory = sliding_analysis(rec, _config(args), jobs=_jobs(args))
    _write_trajectory(trajectory, args, args.out)
    return 0


def cmd_signature(args) -> int:
    rec = load_recording(args.input, args.rate, args.channels)
    times = rec.times()
    start = times[0] if args.start is None else args.start
    end = times[-1] if args.end is None else args.end
    mask = (times >= start) & (times <= end)
    if mask.sum() < 2:
        raise AnalysisError(f"interval [{start:g}, {end:g}] holds fewer than 2 samples")
    features = signature_features(times[mask], rec.samples[:, mask].T, args.deg)
    report = {
        "channels": list(rec.channel_names),
        "start": float(start),
        "end": float(end),
        "dimension": len(rec.channel_names) + 1,
        "deg": args.deg,
        "signature": [float(x) for x in features],
    }
    _write_text(args.out, json.dumps(report) + "\n")
    return 0


def cmd_complex_at(args) -> int:
    rec = load_recording(args.input, args.rate, args.channels)
    config = _config(args)
    if not config.window <= args.t < rec.n_samples:
        raise AnalysisError(
            f"t={args.t} needs a full window: valid range is {config.window}..{rec.n_samples - 1}"
        )
    times = np.arange(args.t - config.window, args.t + 1, dtype=np.float64)
    result = analyze_window(times, rec.samples[:, args.t - config.window : args.t + 1], config)
    _write_text(args.out, json.dumps(complex_report(result, rec.channel_names), indent=2) + "\n")
    return 0


def cmd_synth(args) -> int:
    rec = synth_generate(args.blocks, noise=args.noise, duration=args.duration, seed=args.seed)
    write_csv(rec, args.out)
    return 0


def sweep_filename(lambda1: float, lambda2: float, window: int, fmt: str) -> str:
    ext = "csv" if fmt == "csv" else "jsonl"
    return f"L{window}_lambda1-{lambda1:g}_lambda2-{lambda2:g}.{ext}"


def cmd_sweep(args) -> int:
    rec = load_recording(args.input, args.rate, args.channels)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for window, l1, l2 in itertools.product(args.window, args.lambda1, args.lambda2):
        config = _config(args, lambda1=l1, lambda2=l2, window=window)
        log.info("sweep cell L=%d lambda1=%g lambda2=%g", window, l1, l2)
        trajectory = sliding_analysis(rec, config, jobs=_jobs(args))
        _write_trajectory(trajectory, args, out_dir / sweep_filename(l1, l2, window, args.format))
    return 0


COMMANDS = {
    "analyze": cmd_analyze,
    "signature": cmd_signature,
    "complex-at": cmd_complex_at,
    "synth": cmd_synth,
    "sweep": cmd_sweep,
}


def main(argv=None) -> int:
    logging.basicConfig(
        level=os.environ.get(LOG_ENV, "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = _apply_config(parser, argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if hasattr(args, "input") and not Path(args.input).is_file():
        parser.print_usage(sys.stderr)
        print(f"sigtopo: error: input file not found: {args.input}", file=sys.stderr)
        return 2
    try:
        return COMMANDS[args.command](args)
    except (IngestError, AnalysisError, ValueError, OSError) as exc:
        print(f"sigtopo: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Loading recordings: EDF files, CSV tables and seizure interval lists."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Sequence

import numpy as np

ANNOTATION_LABEL = "EDF Annotations"


class IngestError(ValueError):
    """Malformed input. ``code`` names the failure class for callers and tests."""

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


@dataclass(frozen=True)
class Recording:
    channel_names: tuple
    rate: float
    samples: np.ndarray  # (channels, time)

    def __post_init__(self):
        samples = np.array(self.samples, dtype=np.float64)
        if samples.ndim != 2:
            raise ValueError("samples must be shaped (channels, time)")
        names = tuple(self.channel_names)
        if len(names) != samples.shape[0]:
            raise ValueError(f"{len(names)} names for {samples.shape[0]} channels")
        if len(set(names)) != len(names):
            raise ValueError("channel names must be unique")
        if not self.rate > 0:
            raise ValueError(f"sampling rate must be positive, got {self.rate}")
        samples.flags.writeable = False
        object.__setattr__(self, "channel_names", names)
        object.__setattr__(self, "rate", float(self.rate))
        object.__setattr__(self, "samples", samples)

    @property
    def n_samples(self) -> int:
        return self.samples.shape[1]

    @property
    def duration(self) -> float:
        return (self.n_samples - 1) / self.rate

    def times(self) -> np.ndarray:
        return np.arange(self.n_samples) / self.rate

    def select(self, names: Sequence[str]) -> "Recording":
        missing = [n for n in names if n not in self.channel_names]
        if missing:
            raise IngestError("unknown_channel", f"channels not in recording: {', '.join(missing)}")
        rows = [self.channel_names.index(n) for n in names]
        return Recording(tuple(names), self.rate, self.samples[rows])


@dataclass(frozen=True)
class SignalHeader:
    label: str
    transducer: str
    physical_dimension: str
    physical_min: float
    physical_max: float
    digital_min: int
    digital_max: int
    prefilter: str
    samples_per_record: int


@dataclass(frozen=True)
class EdfHeader:
    version: str
    patient: str
    recording: str
    start_date: str
    start_time: str
    header_bytes: int
    reserved: str
    n_records: int
    record_duration: float
    n_signals: int
    signals: tuple


def dedupe_names(names: Sequence[str]) -> list:
    """Suffix repeated labels: ``T8-P8``, ``T8-P8-1``, ..."""
    seen: dict = {}
    out = []
    for name in names:
        if name in seen:
            seen[name] += 1
            candidate = f"{name}-{seen[name]}"
            while candidate in seen:
                seen[name] += 1
                candidate = f"{name}-{seen[name]}"
            seen[candidate] = 0
            out.append(candidate)
        else:
            seen[name] = 0
            out.append(name)
    return out


# (name, width) in file order for the fixed part and per-signal blocks
_FIXED = [
    ("version", 8), ("patient", 80), ("recording", 80), ("start_date", 8),
    ("start_time", 8), ("header_bytes", 8), ("reserved", 44), ("n_records", 8),
    ("record_duration", 8), ("n_signals", 4),
]
_PER_SIGNAL = [
    ("label", 16), ("transducer", 80), ("physical_dimension", 8),
    ("physical_min", 8), ("physical_max", 8), ("digital_min", 8),
    ("digital_max", 8), ("prefilter", 80), ("samples_per_record", 8),
    ("reserved", 32),
]


def _number(raw: str, field: str, kind=float):
    text = raw.strip()
    try:
        return kind(text) if kind is float else int(text)
    except ValueError:
        raise IngestError("bad_field", f"header field {field!r} is not numeric: {raw!r}") from None


def parse_edf_header(data: bytes) -> EdfHeader:
    if len(data) < 256:
        raise IngestError("truncated", f"file is {len(data)} bytes, shorter than the 256-byte header")
    pos = 0
    fixed = {}
    for name, width in _FIXED:
        fixed[name] = data[pos : pos + width].decode("ascii", errors="replace")
        pos += width
    ns = _number(fixed["n_signals"], "n_signals", int)
    header_bytes = _number(fixed["header_bytes"], "header_bytes", int)
    n_records = _number(fixed["n_records"], "n_records", int)
    duration = _number(fixed["record_duration"], "record_duration")
    if ns < 1:
        raise IngestError("bad_field", f"number of signals must be >= 1, got {ns}")
    if header_bytes != 256 * (ns + 1):
        raise IngestError(
            "bad_field", f"header byte count {header_bytes} != 256 * ({ns} + 1)"
        )
    if len(data) < header_bytes:
        raise IngestError(
            "truncated", f"file is {len(data)} bytes, header declares {header_bytes}"
        )
    if not duration > 0:
        raise IngestError("bad_field", f"record duration must be positive, got {duration}")

    columns: dict = {}
    for name, width in _PER_SIGNAL:
        columns[name] = [
            data[pos + i * width : pos + (i + 1) * width].decode("ascii", errors="replace")
            for i in range(ns)
        ]
        pos += width * ns

    signals = []
    for i in range(ns):
        sig = SignalHeader(
            label=columns["label"][i].strip(),
            transducer=columns["transducer"][i].strip(),
            physical_dimension=columns["physical_dimension"][i].strip(),
            physical_min=_number(columns["physical_min"][i], f"physical_min[{i}]"),
            physical_max=_number(columns["physical_max"][i], f"physical_max[{i}]"),
            digital_min=_number(columns["digital_min"][i], f"digital_min[{i}]", int),
            digital_max=_number(columns["digital_max"][i], f"digital_max[{i}]", int),
            prefilter=columns["prefilter"][i].strip(),
            samples_per_record=_number(columns["samples_per_record"][i], f"samples_per_record[{i}]", int),
        )
        if sig.samples_per_record < 1:
            raise IngestError("bad_field", f"signal {i} has {sig.samples_per_record} samples per record")
        if sig.label != ANNOTATION_LABEL and sig.digital_min >= sig.digital_max:
            raise IngestError(
                "zero_range",
                f"signal {sig.label!r}: digital min {sig.digital_min} >= digital max {sig.digital_max}",
            )
        signals.append(sig)

    return EdfHeader(
        version=fixed["version"].strip(),
        patient=fixed["patient"].strip(),
        recording=fixed["recording"].strip(),
        start_date=fixed["start_date"].strip(),
        start_time=fixed["start_time"].strip(),
        header_bytes=header_bytes,
        reserved=fixed["reserved"].strip(),
        n_records=n_records,
        record_duration=duration,
        n_signals=ns,
        signals=tuple(signals),
    )


def parse_edf(data: bytes) -> Recording:
    """Decode an EDF byte string into physical-unit samples.

    Annotation signals are skipped. All remaining signals must share one
    sampling rate.
    """
    header = parse_edf_header(data)
    per_record = [s.samples_per_record for s in header.signals]
    record_size = 2 * sum(per_record)
    body = len(data) - header.header_bytes
    n_records = header.n_records
    if n_records == -1 and body % record_size == 0:
        n_records = body // record_size
    if n_records < 0 or body != n_records * record_size:
        raise IngestError(
            "record_mismatch",
            f"data section is {body} bytes, expected {header.n_records} records of {record_size} bytes",
        )

    raw = np.frombuffer(data, dtype="<i2", offset=header.header_bytes).reshape(n_records, -1)
    offsets = np.concatenate([[0], np.cumsum(per_record)])
    keep = [i for i, s in enumerate(header.signals) if s.label != ANNOTATION_LABEL]
    if not keep:
        raise IngestError("no_signals", "EDF file holds no data signals")
    rates = {header.signals[i].samples_per_record / header.record_duration for i in keep}
    if len(rates) != 1:
        raise IngestError("mixed_rates", f"signals have different sampling rates: {sorted(rates)}")

    rows = []
    for i in keep:
        sig = header.signals[i]
        digital = raw[:, offsets[i] : offsets[i + 1]].reshape(-1).astype(np.float64)
        gain = (sig.physical_max - sig.physical_min) / (sig.digital_max - sig.digital_min)
        rows.append(sig.physical_min + (digital - sig.digital_min) * gain)
    names = dedupe_names([header.signals[i].label for i in keep])
    samples = np.vstack(rows) if rows else np.zeros((0, 0))
    return Recording(tuple(names), rates.pop(), samples)


def read_edf(path) -> Recording:
    with open(path, "rb") as fh:
        return parse_edf(fh.read())


def parse_csv(text: str, rate: float = 1.0) -> Recording:
    """Table with a header row of channel names and one row per sample."""
    rows = list(csv.reader(io.StringIO(text)))
    while rows and not any(cell.strip() for cell in rows[-1]):
        rows.pop()
    if not rows:
        raise IngestError("empty", "CSV input is empty")
    names = [c.strip() for c in rows[0]]
    if len(rows) < 2:
        raise IngestError("empty", "CSV input has a header but no data rows")
    values = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(names):
            raise IngestError(
                "ragged", f"line {lineno}: expected {len(names)} cells, found {len(row)}"
            )
        try:
            values.append([float(cell) for cell in row])
        except ValueError:
            raise IngestError("bad_cell", f"line {lineno}: non-numeric cell in {row!r}") from None
    return Recording(tuple(dedupe_names(names)), rate, np.array(values).T)


def read_csv(path, rate: float = 1.0) -> Recording:
    with open(path, encoding="utf-8") as fh:
        return parse_csv(fh.read(), rate)


def write_csv(recording: Recording, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(recording.channel_names)
        for row in recording.samples.T:
            writer.writerow([repr(float(x)) for x in row])


def resample_mean(recording: Recording, target_rate: float = 1.0) -> Recording:
    """Non-overlapping block means; a trailing partial block is dropped."""
    ratio = recording.rate / target_rate
    block = int(round(ratio))
    if block < 1 or abs(ratio - block) > 1e-9 * max(1.0, ratio):
        raise IngestError(
            "block_size", f"rate {recording.rate} is not a whole multiple of {target_rate}"
        )
    n = recording.n_samples // block
    if n == 0:
        raise IngestError("too_short", "recording shorter than one resampling block")
    blocks = recording.samples[:, : n * block].reshape(recording.samples.shape[0], n, block)
    return Recording(recording.channel_names, target_rate, blocks.mean(axis=2))


def load_annotations(text: str) -> list:
    """Seizure intervals, one ``start,end`` pair of seconds per line."""
    intervals = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise IngestError("bad_annotation", f"line {lineno}: expected 'start,end', got {line!r}")
        try:
            start, end = float(parts[0]), float(parts[1])
        except ValueError:
            raise IngestError("bad_annotation", f"line {lineno}: non-numeric interval {line!r}") from None
        if not start < end:
            raise IngestError("bad_annotation", f"line {lineno}: start {start} is not before end {end}")
        intervals.append((start, end))
    intervals.sort()
    for (s0, e0), (s1, e1) in zip(intervals, intervals[1:]):
        if s1 < e0:
            raise IngestError("overlap", f"intervals ({s0}, {e0}) and ({s1}, {e1}) overlap")
    return intervals

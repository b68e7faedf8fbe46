"""Sliding-window topology trajectories over a 1 Hz recording."""

from __future__ import annotations

import csv
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .complex import DEFAULT_DEG, DEFAULT_R2_THRESHOLD, WeightedComplex, build_complex
from .ingest import Recording
from .persistence import (
    Filtration,
    PersistenceDiagram,
    betti,
    births_from_weights,
    persistence_entropy,
    reduce_boundary,
)

log = logging.getLogger(__name__)

TRAJECTORY_FIELDS = ("t", "b0", "b1", "pe_total", "pe_dim0", "pe_dim1", "edges", "triangles")


class AnalysisError(RuntimeError):
    pass


@dataclass(frozen=True)
class AnalysisConfig:
    lambda1: float = 1.0
    lambda2: float = 1.0
    window: int = 50
    deg: int = DEFAULT_DEG
    max_dim: int = 2
    r2_threshold: float = DEFAULT_R2_THRESHOLD
    stride: int = 1
    channels: tuple = ()
    band_window: int = 120
    rng_seed: int = 0

    def __post_init__(self):
        if self.window < 2:
            raise ValueError(f"window must be >= 2 samples, got {self.window}")
        if self.stride < 1:
            raise ValueError(f"stride must be >= 1, got {self.stride}")
        if not 0 < self.r2_threshold < 1:
            raise ValueError(f"r2 threshold must lie in (0, 1), got {self.r2_threshold}")
        if self.max_dim not in (1, 2):
            raise ValueError(f"max_dim must be 1 or 2, got {self.max_dim}")
        if self.lambda1 < 0 or self.lambda2 < 0:
            raise ValueError("penalties must be >= 0")


@dataclass(frozen=True)
class TrajectoryPoint:
    t: float
    b0: int
    b1: int
    pe_total: float
    pe_dim0: float
    pe_dim1: float
    edges: int
    triangles: int


@dataclass(frozen=True)
class WindowResult:
    complex: WeightedComplex
    filtration: Filtration
    diagram: PersistenceDiagram
    point: TrajectoryPoint


def analyze_window(times, values, config: AnalysisConfig, t: float | None = None) -> WindowResult:
    cx = build_complex(
        times,
        values,
        deg=config.deg,
        lambda1=config.lambda1,
        lambda2=config.lambda2,
        r2_threshold=config.r2_threshold,
        max_dim=config.max_dim,
    )
    filtration = births_from_weights(cx)
    diagram = reduce_boundary(filtration)
    b = betti(cx)
    # nothing selected: the trajectory reports zero entropy rather than ln(d)
    # from d clamped vertex bars
    selected = len(filtration) > cx.n_vertices

    def pe(dims):
        return persistence_entropy(diagram, dims=dims) if selected else 0.0

    point = TrajectoryPoint(
        t=float(times[-1] if t is None else t),
        b0=b.b0,
        b1=b.b1,
        pe_total=pe((0, 1)),
        pe_dim0=pe((0,)),
        pe_dim1=pe((1,)),
        edges=len(cx.edges),
        triangles=len(cx.triangles),
    )
    return WindowResult(cx, filtration, diagram, point)


def window_ends(n_samples: int, window: int, stride: int) -> list:
    """Sample indices ``t`` whose window ``[t - window, t]`` fits the recording."""
    return list(range(window, n_samples, stride))


def _window_point(args) -> TrajectoryPoint:
    samples, end, config = args
    times = np.arange(end - config.window, end + 1, dtype=np.float64)
    try:
        return analyze_window(times, samples[:, end - config.window : end + 1], config).point
    except Exception as exc:
        raise AnalysisError(f"window ending at t={end} failed: {exc}") from exc


def available_cores() -> int:
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:
        return os.cpu_count() or 1


def sliding_analysis(recording: Recording, config: AnalysisConfig, jobs: int | None = None) -> list:
    """One trajectory point per window end ``t = L, L + stride, ...``.

    ``recording`` must be sampled at 1 Hz so that ``t`` is in seconds.
    ``jobs=None`` uses every available core; output order never depends on it.
    """
    if recording.rate != 1.0:
        raise AnalysisError(f"sliding analysis expects a 1 Hz recording, got {recording.rate} Hz")
    if recording.duration <= config.window:
        raise AnalysisError(
            f"recording lasts {recording.duration:g} s, not longer than the {config.window} s window"
        )
    if jobs is not None and jobs < 1:
        raise ValueError(f"jobs must be >= 1 or None, got {jobs}")
    ends = window_ends(recording.n_samples, config.window, config.stride)
    tasks = [(recording.samples, end, config) for end in ends]
    workers = jobs or available_cores()
    log.info("analyzing %d windows with %d worker(s)", len(tasks), workers)
    if workers == 1 or len(tasks) < 2:
        return [_window_point(task) for task in tasks]
    chunk = max(1, len(tasks) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_window_point, tasks, chunksize=chunk))


@dataclass(frozen=True)
class Bands:
    field: str
    h: int
    mean: tuple  # None where fewer than h points are available
    std: tuple


def rolling_bands(trajectory: Sequence[TrajectoryPoint], field: str, h: int) -> Bands:
    """Trailing mean and sample standard deviation over the last ``h`` points."""
    if h < 2:
        raise ValueError(f"band window must be >= 2, got {h}")
    if h > len(trajectory):
        raise ValueError(f"band window {h} exceeds trajectory length {len(trajectory)}")
    if field not in TRAJECTORY_FIELDS or field == "t":
        raise ValueError(f"unknown trajectory field {field!r}")
    series = np.array([getattr(p, field) for p in trajectory], dtype=np.float64)
    mean: list = [None] * len(series)
    std: list = [None] * len(series)
    for i in range(h - 1, len(series)):
        chunk = series[i - h + 1 : i + 1]
        mean[i] = float(chunk.mean())
        std[i] = float(chunk.std(ddof=1))
    return Bands(field, h, tuple(mean), tuple(std))


def synth_generate(
    blocks: Sequence[int] = (3, 3),
    noise: float = 0.1,
    duration: int = 600,
    seed: int = 0,
    rate: float = 1.0,
) -> Recording:
    """Channels grouped in independent blocks driven by a shared random walk.

    Each member is ``a * driver + b + noise * eps`` with a positive gain ``a``.
    """
    rng = np.random.default_rng(seed)
    n = int(round(duration * rate)) + 1
    rows, names = [], []
    for block_id, size in enumerate(blocks):
        if size < 1:
            raise ValueError("block sizes must be >= 1")
        driver = np.cumsum(rng.standard_normal(n))
        for member in range(size):
            gain = rng.uniform(0.5, 2.0)
            offset = rng.uniform(-1.0, 1.0)
            rows.append(gain * driver + offset + noise * rng.standard_normal(n))
            names.append(f"B{block_id}C{member}")
    return Recording(tuple(names), rate, np.vstack(rows))


def _format(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.12g}"


def _json_value(value):
    if value is None or isinstance(value, (bool, np.bool_)):
        return None if value is None else bool(value)
    # round-trip through the CSV rendering so both formats agree digit for digit
    return json.loads(_format(value))


def _rows(trajectory, bands: Bands | None, seizure_flags: Sequence[bool] | None):
    header = list(TRAJECTORY_FIELDS)
    if bands is not None:
        header += [f"mean_{bands.field}", f"std_{bands.field}"]
    if seizure_flags is not None:
        header.append("in_seizure")
    rows = []
    for i, point in enumerate(trajectory):
        row = [getattr(point, f) for f in TRAJECTORY_FIELDS]
        if bands is not None:
            row += [bands.mean[i], bands.std[i]]
        if seizure_flags is not None:
            row.append(bool(seizure_flags[i]))
        rows.append(row)
    return header, rows


def seizure_flags(trajectory, intervals) -> list:
    return [any(s <= p.t <= e for s, e in intervals) for p in trajectory]


def write_trajectory(fh, trajectory, fmt: str = "csv", bands: Bands | None = None, seizure_flags=None) -> None:
    """Write a trajectory to a text stream as CSV or JSON lines."""
    if fmt not in ("csv", "jsonlines"):
        raise ValueError(f"unknown output format {fmt!r}")
    header, rows = _rows(trajectory, bands, seizure_flags)
    if fmt == "csv":
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_format(v) for v in row])
    else:
        for row in rows:
            obj = {key: _json_value(value) for key, value in zip(header, row)}
            fh.write(json.dumps(obj) + "\n")


def emit(trajectory, path, fmt: str = "csv", bands: Bands | None = None, seizure_flags=None) -> None:
    """Write a trajectory file; numbers carry 12 significant digits."""
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            write_trajectory(fh, trajectory, fmt, bands, seizure_flags)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def read_trajectory(path) -> list:
    """Parse a CSV written by :func:`emit` back into trajectory points."""
    with open(path, encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        points = []
        for row in reader:
            points.append(
                TrajectoryPoint(
                    t=float(row["t"]),
                    b0=int(row["b0"]),
                    b1=int(row["b1"]),
                    pe_total=float(row["pe_total"]),
                    pe_dim0=float(row["pe_dim0"]),
                    pe_dim1=float(row["pe_dim1"]),
                    edges=int(row["edges"]),
                    triangles=int(row["triangles"]),
                )
            )
    return points


def point_dict(point: TrajectoryPoint) -> dict:
    return asdict(point)


def complex_report(result: WindowResult, names: Sequence[str]) -> dict:
    """JSON-ready view of one window's complex, filtration and diagram."""

    def label(s):
        return [names[v] for v in s]

    return {
        "t": result.point.t,
        "channels": list(names),
        "simplices": [
            {"vertices": label(s), "weight": w} for s, w in result.complex.weights.items()
        ],
        "filtration": [{"vertices": label(s), "birth": b} for s, b in result.filtration],
        "diagram": [
            {"dim": bar.dim, "birth": bar.birth, "death": None if math.isinf(bar.death) else bar.death}
            for bar in result.diagram
        ],
        "summary": point_dict(result.point),
    }


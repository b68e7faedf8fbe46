"""Truncated signatures of piecewise-linear paths.

A signature truncated at order ``deg`` is stored as one flat array per level.
Level ``k`` holds ``d**k`` coefficients in lexicographic word order, which is
exactly the C-order flattening of the ``k``-fold outer product, so tensor
products reduce to a flattened broadcast outer product.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

MAX_DEGREE = 6


@dataclass(frozen=True)
class Path:
    """Sampled path: ``times`` of shape (n,), ``values`` of shape (n, d)."""

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        times = np.array(self.times, dtype=np.float64)
        values = np.array(self.values, dtype=np.float64)
        if values.ndim == 1:
            values = values[:, None]
        if times.ndim != 1 or values.ndim != 2:
            raise ValueError("times must be 1-D and values 2-D")
        if len(times) < 2:
            raise ValueError("a path needs at least 2 samples")
        if len(times) != len(values):
            raise ValueError(
                f"times ({len(times)}) and values ({len(values)}) differ in length"
            )
        if values.shape[1] < 1:
            raise ValueError("path dimension must be >= 1")
        if not np.all(np.diff(times) > 0):
            raise ValueError("times must be strictly increasing")
        if not (np.all(np.isfinite(times)) and np.all(np.isfinite(values))):
            raise ValueError("path contains non-finite samples")
        times.flags.writeable = False
        values.flags.writeable = False
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    @property
    def d(self) -> int:
        return self.values.shape[1]

    def __len__(self):
        return len(self.times)


@dataclass(frozen=True)
class TruncatedSignature:
    d: int
    deg: int
    levels: tuple

    def __post_init__(self):
        if len(self.levels) != self.deg:
            raise ValueError(f"expected {self.deg} levels, got {len(self.levels)}")
        frozen = []
        for k, level in enumerate(self.levels, start=1):
            arr = np.array(level, dtype=np.float64).ravel()
            if arr.size != self.d**k:
                raise ValueError(f"level {k} must hold {self.d ** k} coefficients")
            arr.flags.writeable = False
            frozen.append(arr)
        object.__setattr__(self, "levels", tuple(frozen))

    def level(self, k: int) -> np.ndarray:
        return self.levels[k - 1]

    def coefficient(self, word: Sequence[int]) -> float:
        """Coefficient of a word given with 1-based letters, e.g. ``(1, 2)``."""
        k = len(word)
        if not 1 <= k <= self.deg:
            raise ValueError(f"word length must be in 1..{self.deg}")
        return float(self.levels[k - 1][word_index(word, self.d)])


def word_index(word: Sequence[int], d: int) -> int:
    """Flat position of a 1-based word inside its level."""
    idx = 0
    for letter in word:
        if not 1 <= letter <= d:
            raise ValueError(f"letter {letter} outside alphabet 1..{d}")
        idx = idx * d + (letter - 1)
    return idx


def signature_length(d: int, deg: int) -> int:
    return sum(d**k for k in range(1, deg + 1))


def _check_degree(deg: int) -> None:
    if deg < 1:
        raise ValueError("signature degree must be >= 1")
    if deg > MAX_DEGREE:
        raise ValueError(f"signature degree above {MAX_DEGREE} is not supported")


def time_augment(path: Path) -> Path:
    """Prepend the timestamp as the first coordinate."""
    return Path(path.times, np.column_stack([path.times, path.values]))


def normalize_path(path: Path) -> Path:
    """Center each coordinate and scale it to unit sample standard deviation.

    Zero-variance coordinates are only centered.
    """
    values = path.values - path.values.mean(axis=0)
    std = values.std(axis=0, ddof=1)
    scale = np.where(std > 0, std, 1.0)
    return Path(path.times, values / scale)


def lift_path(path: Path, target_dim: int) -> Path:
    """Repeat the data coordinate of a ``(t, x)`` path up to ``target_dim`` columns."""
    if target_dim < 2:
        raise ValueError("target_dim must be >= 2")
    if path.d != 2:
        raise ValueError("lift_path expects a time-augmented 1-D path (t, x)")
    x = path.values[:, 1:2]
    return Path(path.times, np.hstack([path.values[:, :1]] + [x] * (target_dim - 1)))


def segment_signature(delta, deg: int) -> TruncatedSignature:
    """Signature of a straight segment with increment ``delta``: exp(delta)."""
    _check_degree(deg)
    delta = np.asarray(delta, dtype=np.float64).ravel()
    return TruncatedSignature(len(delta), deg, tuple(_segment_levels(delta, deg)))


def _segment_levels(delta: np.ndarray, deg: int) -> list:
    """Levels of exp(delta) for a batch of increments shaped (..., d)."""
    batch = delta.shape[:-1]
    levels = [delta.copy()]
    for k in range(2, deg + 1):
        outer = levels[-1][..., :, None] * delta[..., None, :]
        levels.append(outer.reshape(batch + (-1,)) / k)
    return levels


def _product(left: Sequence[np.ndarray], right: Sequence[np.ndarray]) -> list:
    """Truncated tensor product of (batched) level lists; level 0 is 1."""
    deg = len(left)
    batch = left[0].shape[:-1]
    out = []
    for k in range(1, deg + 1):
        acc = left[k - 1] + right[k - 1]
        for j in range(1, k):
            outer = left[j - 1][..., :, None] * right[k - j - 1][..., None, :]
            acc = acc + outer.reshape(batch + (-1,))
        out.append(acc)
    return out


def chen_concat(left: TruncatedSignature, right: TruncatedSignature) -> TruncatedSignature:
    """Truncated tensor-algebra product: signature of the concatenated path."""
    if left.d != right.d:
        raise ValueError(f"dimension mismatch: {left.d} vs {right.d}")
    if left.deg != right.deg:
        raise ValueError(f"degree mismatch: {left.deg} vs {right.deg}")
    return TruncatedSignature(left.d, left.deg, tuple(_product(left.levels, right.levels)))


def _fold(values: np.ndarray, deg: int) -> list:
    """Left fold of segment exponentials over samples shaped (..., n, d).

    Level 1 is taken from the endpoints so it is exact, not a rounded sum.
    """
    increments = np.diff(values, axis=-2)
    levels = _segment_levels(increments[..., 0, :], deg)
    for i in range(1, increments.shape[-2]):
        levels = _product(levels, _segment_levels(increments[..., i, :], deg))
    levels[0] = values[..., -1, :] - values[..., 0, :]
    return levels


def path_signature(path: Path, deg: int) -> TruncatedSignature:
    """Signature of the linear interpolation of ``path``, folded left to right."""
    _check_degree(deg)
    return TruncatedSignature(path.d, deg, tuple(_fold(path.values, deg)))


def rescale_signature(sig: TruncatedSignature, lam: float) -> TruncatedSignature:
    return TruncatedSignature(
        sig.d, sig.deg, tuple(level * lam**k for k, level in enumerate(sig.levels, 1))
    )


def flatten(sig: TruncatedSignature) -> np.ndarray:
    return np.concatenate(sig.levels)


def unflatten(vector, d: int, deg: int) -> TruncatedSignature:
    vector = np.asarray(vector, dtype=np.float64)
    if vector.size != signature_length(d, deg):
        raise ValueError(
            f"vector of length {vector.size} does not match d={d}, deg={deg}"
        )
    levels, start = [], 0
    for k in range(1, deg + 1):
        levels.append(vector[start : start + d**k])
        start += d**k
    return TruncatedSignature(d, deg, tuple(levels))


def _normalize_columns(values: np.ndarray) -> np.ndarray:
    centered = values - values.mean(axis=-2, keepdims=True)
    std = centered.std(axis=-2, ddof=1, keepdims=True)
    return centered / np.where(std > 0, std, 1.0)


def signature_features(times, channels, deg: int, lift_to: int | None = None) -> np.ndarray:
    """Flattened signatures of normalized time-augmented paths ``(t, channels...)``.

    ``channels`` is shaped (n,), (n, c) or, for a batch of paths sharing the
    same timestamps, (batch, n, c). With ``lift_to`` set, the single data
    channel is repeated so each path has ``lift_to`` coordinates. Equivalent
    to ``flatten(path_signature(lift_path(normalize_path(time_augment(p)))))``
    but folded for the whole batch at once.
    """
    _check_degree(deg)
    times = np.asarray(times, dtype=np.float64)
    channels = np.asarray(channels, dtype=np.float64)
    single = channels.ndim < 3
    if channels.ndim == 1:
        channels = channels[:, None]
    if single:
        channels = channels[None]
    if channels.shape[1] != len(times) or len(times) < 2:
        raise ValueError("channels must be sampled on the given timestamps (>= 2 samples)")
    if not np.all(np.diff(times) > 0):
        raise ValueError("times must be strictly increasing")
    batch = channels.shape[0]
    clock = np.broadcast_to(times[None, :, None], (batch, len(times), 1))
    values = _normalize_columns(np.concatenate([clock, channels], axis=2))
    if lift_to is not None:
        if values.shape[2] != 2:
            raise ValueError("lifting expects one data channel per path")
        if lift_to < 2:
            raise ValueError("target_dim must be >= 2")
        values = np.concatenate([values[..., :1]] + [values[..., 1:]] * (lift_to - 1), axis=2)
    levels = _fold(values, deg)
    flat = np.concatenate(levels, axis=-1)
    return flat[0] if single else flat

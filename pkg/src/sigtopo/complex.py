"""Weighted simplicial complexes grown by LASSO neighborhood selection.

Channels are vertices ``0..d-1``. For every channel the signature of its
time-augmented window is regressed on the signatures of the other channels
(edges) and of unordered channel pairs (triangles); non-zero coefficients of a
regression that clears the R^2 gate become simplices weighted by ``|beta|``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Mapping

import numpy as np

from .lasso import DEFAULT_MAX_ITER, DEFAULT_TOL, DesignMatrix, LassoError, fit_lasso, select, standardize_columns
from .signature import signature_features

DEFAULT_DEG = 3
DEFAULT_R2_THRESHOLD = 0.67

Simplex = tuple  # sorted tuple of distinct vertex indices


def simplex(vertices: Iterable[int]) -> Simplex:
    verts = tuple(sorted(int(v) for v in vertices))
    if not verts:
        raise ValueError("a simplex needs at least one vertex")
    if len(set(verts)) != len(verts):
        raise ValueError(f"repeated vertex in {verts}")
    return verts


def faces(s: Simplex) -> list:
    """All non-empty proper subsets of ``s``."""
    return [c for k in range(1, len(s)) for c in combinations(s, k)]


def _sort_key(s: Simplex):
    return (len(s), s)


@dataclass(frozen=True)
class WeightedComplex:
    """Closed family of simplices over ``n_vertices`` channels.

    Vertices are always present and carry weight 0; they are born at time 0
    regardless of weight.
    """

    n_vertices: int
    weights: Mapping = field(default_factory=dict)

    def __post_init__(self):
        if self.n_vertices < 0:
            raise ValueError("n_vertices must be >= 0")
        table = {(v,): 0.0 for v in range(self.n_vertices)}
        for s, w in self.weights.items():
            s = simplex(s)
            if s[-1] >= self.n_vertices or s[0] < 0:
                raise ValueError(f"simplex {s} outside 0..{self.n_vertices - 1}")
            w = float(w)
            if not np.isfinite(w) or w < 0:
                raise ValueError(f"weight of {s} must be finite and >= 0, got {w}")
            table[s] = max(w, table.get(s, 0.0))
        for s in list(table):
            for f in faces(s):
                table.setdefault(f, 0.0)
        ordered = {s: table[s] for s in sorted(table, key=_sort_key)}
        object.__setattr__(self, "weights", ordered)

    def __contains__(self, s) -> bool:
        return tuple(sorted(s)) in self.weights

    def __iter__(self):
        return iter(self.weights)

    def __len__(self):
        return len(self.weights)

    def simplices(self, dim: int | None = None) -> list:
        if dim is None:
            return list(self.weights)
        return [s for s in self.weights if len(s) == dim + 1]

    @property
    def edges(self) -> list:
        return self.simplices(1)

    @property
    def triangles(self) -> list:
        return self.simplices(2)

    @property
    def dimension(self) -> int:
        return max((len(s) - 1 for s in self.weights), default=-1)

    def relabel(self, perm) -> "WeightedComplex":
        """Complex with vertex ``v`` renamed to ``perm[v]``."""
        return WeightedComplex(
            self.n_vertices,
            {tuple(perm[v] for v in s): w for s, w in self.weights.items() if len(s) > 1},
        )


def link(cx: WeightedComplex, sigma) -> set:
    """Faces disjoint from ``sigma`` whose union with it is in the complex."""
    sigma = simplex(sigma)
    if sigma not in cx:
        raise KeyError(f"{sigma} is not a simplex of the complex")
    base = set(sigma)
    return {
        tau
        for tau in cx
        if base.isdisjoint(tau) and simplex(base.union(tau)) in cx
    }


def _swap_permutation(deg: int) -> np.ndarray:
    """Index map exchanging letters 2 and 3 in flattened 3-letter signatures."""
    swap = {0: 0, 1: 2, 2: 1}
    index = []
    offset = 0
    for k in range(1, deg + 1):
        for flat in range(3**k):
            digits = np.unravel_index(flat, (3,) * k)
            index.append(offset + int(np.ravel_multi_index([swap[int(x)] for x in digits], (3,) * k)))
        offset += 3**k
    return np.array(index)


class SignatureBank:
    """Signature features of one window, computed once and shared across regressions.

    Rows: ``single[i]`` for ``(t, x_i)``, ``lifted[i]`` for ``(t, x_i, x_i)`` and
    ``pair(j1, j2)`` for the orientation-free pair path, the mean of the
    signatures of ``(t, x_j1, x_j2)`` and ``(t, x_j2, x_j1)``.
    """

    def __init__(self, times, values: np.ndarray, deg: int = DEFAULT_DEG):
        self.times = np.asarray(times, dtype=np.float64)
        self.values = np.asarray(values, dtype=np.float64)
        if self.values.ndim != 2:
            raise ValueError("values must be shaped (channels, samples)")
        if self.values.shape[1] != len(self.times):
            raise ValueError("window times and samples disagree in length")
        self.deg = deg
        self._single = None
        self._lifted = None
        self._pairs = None
        self._pair_index = {p: k for k, p in enumerate(combinations(range(self.d), 2))}

    @property
    def d(self) -> int:
        return self.values.shape[0]

    @property
    def active(self) -> list:
        """Channels that vary within the window.

        A constant channel normalizes to the bare time path, whose signature
        every other constant channel shares, so it takes no part in selection.
        """
        return [i for i in range(self.d) if np.any(self.values[i] != self.values[i, 0])]

    def single(self, i: int) -> np.ndarray:
        if self._single is None:
            self._single = signature_features(self.times, self.values[:, :, None], self.deg)
        return self._single[i]

    def lifted(self, i: int) -> np.ndarray:
        if self._lifted is None:
            self._lifted = signature_features(
                self.times, self.values[:, :, None], self.deg, lift_to=3
            )
        return self._lifted[i]

    def pair(self, j1: int, j2: int) -> np.ndarray:
        if self._pairs is None:
            pairs = list(self._pair_index)
            if pairs:
                stack = np.stack([self.values[list(p)].T for p in pairs])
                raw = signature_features(self.times, stack, self.deg)
                # average with the (t, x_j2, x_j1) orientation: the lifted target is
                # symmetric in letters 2 and 3, so only this part can explain it
                self._pairs = 0.5 * (raw + raw[:, _swap_permutation(self.deg)])
            else:
                self._pairs = np.zeros((0, 0))
        key = (j1, j2) if j1 < j2 else (j2, j1)
        return self._pairs[self._pair_index[key]]


def _regress(target: np.ndarray, columns: list, labels: list, lam: float, r2_threshold: float, tol: float, max_iter: int) -> dict:
    if not columns:
        return {}
    X, _ = standardize_columns(DesignMatrix.from_columns(columns, labels))
    y = target - target.mean()
    spread = y.std(ddof=1)
    if spread > 0:
        y = y / spread
    try:
        fit = fit_lasso(X, y, lam, tol=tol, max_iter=max_iter)
    except LassoError:
        return {}
    return select(fit, r2_threshold)


def _merge(found: dict, new: Iterable) -> None:
    for s, w in new:
        found[s] = max(w, found.get(s, 0.0))


def stage_one(
    bank: SignatureBank,
    lambda1: float,
    r2_threshold: float = DEFAULT_R2_THRESHOLD,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> dict:
    """Edges ``{i, j}`` from regressing channel ``i`` on every other channel."""
    found: dict = {}
    active = bank.active
    for i in active:
        others = [j for j in active if j != i]
        picked = _regress(
            bank.single(i), [bank.single(j) for j in others], others, lambda1, r2_threshold, tol, max_iter
        )
        _merge(found, ((simplex((i, j)), w) for j, w in picked.items()))
    return found


def candidate_pairs(d: int, target: int) -> list:
    """Unordered channel pairs ``(j1, j2)``, ``j1 < j2``, excluding ``target``."""
    return list(combinations([j for j in range(d) if j != target], 2))


def stage_two(
    bank: SignatureBank,
    lambda2: float,
    r2_threshold: float = DEFAULT_R2_THRESHOLD,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> dict:
    """Triangles ``{i, j1, j2}`` from regressing channel ``i`` on channel pairs."""
    found: dict = {}
    if bank.d < 3:
        return found
    active = set(bank.active)
    for i in sorted(active):
        pairs = [p for p in candidate_pairs(bank.d, i) if active.issuperset(p)]
        picked = _regress(
            bank.lifted(i), [bank.pair(*p) for p in pairs], pairs, lambda2, r2_threshold, tol, max_iter
        )
        _merge(found, ((simplex((i,) + p), w) for p, w in picked.items()))
    return found


def build_complex(
    times,
    values: np.ndarray,
    deg: int = DEFAULT_DEG,
    lambda1: float = 1.0,
    lambda2: float = 1.0,
    r2_threshold: float = DEFAULT_R2_THRESHOLD,
    max_dim: int = 2,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> WeightedComplex:
    """Weighted complex of one window; ``values`` is shaped (channels, samples).

    A simplex produced by several regressions keeps the largest ``|beta|``.
    Faces added only to close the complex carry weight 0.
    """
    if max_dim not in (1, 2):
        raise ValueError(f"max_dim must be 1 or 2, got {max_dim}")
    bank = SignatureBank(times, values, deg)
    found = stage_one(bank, lambda1, r2_threshold, tol, max_iter)
    if max_dim == 2:
        _merge(found, stage_two(bank, lambda2, r2_threshold, tol, max_iter).items())
    return WeightedComplex(bank.d, found)

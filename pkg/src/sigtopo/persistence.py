"""Weight-induced filtrations, Z/2 persistence and persistence entropy."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple

from .complex import WeightedComplex, faces

ESSENTIAL = math.inf


class FiltrationError(ValueError):
    pass


class Bar(NamedTuple):
    dim: int
    birth: float
    death: float  # ESSENTIAL for classes alive at the end

    @property
    def essential(self) -> bool:
        return self.death == ESSENTIAL


class BettiVector(NamedTuple):
    b0: int
    b1: int


@dataclass(frozen=True)
class Filtration:
    """Simplices with birth times, ordered by (birth, dimension, vertices)."""

    entries: tuple

    def __post_init__(self):
        entries = tuple(sorted(((tuple(s), float(b)) for s, b in self.entries), key=_entry_key))
        object.__setattr__(self, "entries", entries)

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def births(self) -> dict:
        return dict(self.entries)

    def check(self) -> None:
        """Raise if some face is missing or born after one of its cofaces."""
        births = self.births()
        for s, b in self.entries:
            for f in faces(s):
                if f not in births:
                    raise FiltrationError(f"face {f} of {s} missing from filtration")
                if births[f] > b:
                    raise FiltrationError(
                        f"face {f} born at {births[f]} after coface {s} at {b}"
                    )


def _entry_key(entry):
    s, b = entry
    return (b, len(s), s)


@dataclass(frozen=True)
class PersistenceDiagram:
    bars: tuple

    def __len__(self):
        return len(self.bars)

    def __iter__(self):
        return iter(self.bars)

    def in_dim(self, dim: int) -> list:
        return [bar for bar in self.bars if bar.dim == dim]

    def essential_count(self, dim: int) -> int:
        return sum(1 for bar in self.bars if bar.dim == dim and bar.essential)


def births_from_weights(cx: WeightedComplex) -> Filtration:
    """Birth ``1 - w / sum(w)`` per weighted simplex, repaired to be face-monotone.

    Vertices are born at 0. Zero-weight faces start at 1 and are pulled down
    to the earliest birth among their cofaces.
    """
    weights = {s: w for s, w in cx.weights.items() if len(s) > 1}
    if any(w < 0 for w in weights.values()):
        raise FiltrationError("negative simplex weight")
    total = sum(w for w in weights.values() if w > 0)
    if total == 0:
        return Filtration(tuple((s, 0.0) for s in cx.simplices(0)))
    births = {s: 0.0 for s in cx.simplices(0)}
    for s, w in weights.items():
        births[s] = min(1.0, max(0.0, 1.0 - w / total)) if w > 0 else 1.0
    # cofaces before faces: one pass reaches the fixed point
    for s in sorted(births, key=len, reverse=True):
        for f in faces(s):
            if births[f] > births[s]:
                births[f] = births[s]
    return Filtration(tuple(births.items()))


def reduce_boundary(filtration: Filtration) -> PersistenceDiagram:
    """Standard column reduction of the Z/2 boundary matrix."""
    filtration.check()
    index = {s: i for i, (s, _) in enumerate(filtration.entries)}
    births = [b for _, b in filtration.entries]
    dims = [len(s) - 1 for s, _ in filtration.entries]
    pivot_of: dict = {}  # lowest row -> column owning it
    paired: set = set()
    bars = []
    for j, (s, b) in enumerate(filtration.entries):
        column = {index[f] for f in faces(s) if len(f) == len(s) - 1} if len(s) > 1 else set()
        while column:
            low = max(column)
            other = pivot_of.get(low)
            if other is None:
                break
            column ^= other[1]
        if column:
            low = max(column)
            pivot_of[low] = (j, column)
            paired.update((low, j))
            bars.append(Bar(dims[low], births[low], b))
    for i, (s, b) in enumerate(filtration.entries):
        if i not in paired:
            bars.append(Bar(dims[i], b, ESSENTIAL))
    bars.sort(key=lambda bar: (bar.dim, bar.birth, bar.death))
    return PersistenceDiagram(tuple(bars))


def _components(cx: WeightedComplex) -> int:
    parent = list(range(cx.n_vertices))

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    count = cx.n_vertices
    for a, b in cx.edges:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
            count -= 1
    return count


def betti(cx: WeightedComplex) -> BettiVector:
    """Components of the 1-skeleton and rank of H1 over Z/2."""
    flat = Filtration(tuple((s, 0.0) for s in cx))
    diagram = reduce_boundary(flat)
    return BettiVector(_components(cx), diagram.essential_count(1))


def persistence_entropy(diagram: PersistenceDiagram | Iterable[Bar], dims=(0, 1)) -> float:
    """Shannon entropy (natural log) of normalized bar lifetimes.

    Essential bars die at 1.0, the end of the weight filtration. Bars with
    zero lifetime are ignored.
    """
    lifetimes = []
    for bar in diagram:
        if dims is not None and bar.dim not in dims:
            continue
        death = 1.0 if bar.essential else bar.death
        life = death - bar.birth
        if life > 0:
            lifetimes.append(life)
    if len(lifetimes) <= 1:
        return 0.0
    total = math.fsum(lifetimes)
    return -math.fsum((x / total) * math.log(x / total) for x in lifetimes)

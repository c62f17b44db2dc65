"""Geometry of diagonal sets of index tuples over a finite grid of cells.

Index tuples are plain tuples of 1-based cell indices. The kernel partition
of a tuple groups equal entries; the expansion map of a partition repeats a
short tuple along its blocks. Together they decompose the full index cube
into the exact-coincidence diagonals, one per partition.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .partitions import Partition, Permutation

IndexTuple = tuple[int, ...]


def kernel_partition(t: Sequence[int]) -> Partition:
    """Partition of tuple positions by equality of entries."""
    if len(t) == 0:
        raise ValueError("empty tuple has no kernel")
    labels: dict[int, int] = {}
    rgs = []
    for v in t:
        v = int(v)
        if v not in labels:
            labels[v] = len(labels)
        rgs.append(labels[v])
    return Partition.from_rgs(rgs)


def expand_q_sigma(sigma: Partition, x: Sequence[int]) -> IndexTuple:
    """Repeat x along the blocks of sigma: position i gets x[j] for i in block j.

    The j-th entry of x (canonical block order) is copied to every position
    of block j, so a partition with blocks {1},{2,4},{3} maps (a, b, c) to
    (a, b, c, b).
    """
    if len(x) != sigma.block_count:
        raise ValueError("argument length must equal the number of blocks")
    return tuple(x[sigma.block_of(i)] for i in range(1, sigma.n + 1))


@dataclass(frozen=True)
class CellRectangle:
    """Product of per-axis cell sets; the empty rectangle is all-empty factors."""

    factors: tuple[frozenset[int], ...]

    def __post_init__(self):
        factors = tuple(frozenset(int(c) for c in f) for f in self.factors)
        if len(factors) == 0:
            raise ValueError("rectangle needs at least one axis")
        if any(not f for f in factors):
            factors = tuple(frozenset() for _ in factors)
        object.__setattr__(self, "factors", factors)

    @classmethod
    def empty(cls, n: int) -> "CellRectangle":
        return cls(tuple(frozenset() for _ in range(n)))

    @classmethod
    def cube(cls, n: int, n_cells: int) -> "CellRectangle":
        full = frozenset(range(1, n_cells + 1))
        return cls(tuple(full for _ in range(n)))

    @property
    def n(self) -> int:
        return len(self.factors)

    @property
    def is_empty(self) -> bool:
        return not self.factors[0]

    def contains(self, t: Sequence[int]) -> bool:
        if len(t) != self.n:
            raise ValueError("tuple length must match rectangle arity")
        return all(v in f for v, f in zip(t, self.factors))


def preimage_rectangle(sigma: Partition, rect: CellRectangle) -> CellRectangle:
    """Preimage of a rectangle under the expansion map of sigma.

    Factor j of the result is the intersection of the rectangle factors
    over the positions in block j; if any intersection is empty the whole
    preimage collapses to the canonical empty rectangle.
    """
    if rect.n != sigma.n:
        raise ValueError("rectangle arity must match the partition ground set")
    out = []
    for block in sigma.blocks:
        inter: frozenset[int] | None = None
        for i in block:
            f = rect.factors[i - 1]
            inter = f if inter is None else inter & f
        out.append(inter if inter is not None else frozenset())
    return CellRectangle(tuple(out))


def permute_tuple(p: Permutation, t: Sequence[int]) -> IndexTuple:
    """Coordinate pull: entry i of the result is t[p(i)]."""
    if p.n != len(t):
        raise ValueError("permutation and tuple sizes differ")
    return tuple(t[p(i) - 1] for i in range(1, p.n + 1))

"""Exact algebra of the lattice of set partitions of {1, ..., n}.

A partition is stored as a restricted-growth string: element i carries the
label of its block, blocks being labelled 0, 1, 2, ... in order of first
appearance. This representation is unique, gives O(n) equality and hashing,
and the induced block order (ascending minimum element) is the canonical
order used everywhere else in the package.

The partial order is reversed refinement: sigma <= pi iff every block of
sigma is contained in some block of pi, so the all-singletons partition is
the bottom element and the single-block partition the top. The Moebius
function of a segment [sigma, pi] has the closed form

    (-1)**(m - k) * prod_j ((j - 1)!)**r_j

where m and k are the block counts of sigma and pi and r_j counts the
blocks of pi that split into exactly j blocks of sigma. The defining
lattice recursion is kept alongside as an independent oracle for tests.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from math import comb, factorial
from typing import Iterable, Iterator

#: Hard cap on full enumeration; Bell(12) = 4_213_597 objects is the most a
#: desk-scale run is allowed to materialise.
ENUMERATION_CAP = 12


class Partition:
    """Set partition of {1..n} in canonical form (blocks sorted by minimum)."""

    __slots__ = ("_rgs",)

    def __init__(self, n: int, blocks: Iterable[Iterable[int]]):
        n = int(n)
        if n < 1:
            raise ValueError("ground set must be non-empty")
        seen = [False] * n
        cleaned = []
        for block in blocks:
            block = sorted({int(x) for x in block})
            if not block:
                raise ValueError("blocks must be non-empty")
            for x in block:
                if not 1 <= x <= n:
                    raise ValueError(f"element {x} outside 1..{n}")
                if seen[x - 1]:
                    raise ValueError(f"element {x} appears in more than one block")
                seen[x - 1] = True
            cleaned.append(block)
        if not all(seen):
            missing = [i + 1 for i, s in enumerate(seen) if not s]
            raise ValueError(f"elements {missing} are not covered")
        cleaned.sort(key=lambda b: b[0])
        rgs = [0] * n
        for label, block in enumerate(cleaned):
            for x in block:
                rgs[x - 1] = label
        self._rgs = tuple(rgs)

    @classmethod
    def from_rgs(cls, labels: Iterable[int]) -> "Partition":
        """Build from any block-label sequence; labels are re-issued canonically."""
        relabel: dict[int, int] = {}
        rgs = []
        for lab in labels:
            lab = int(lab)
            if lab not in relabel:
                relabel[lab] = len(relabel)
            rgs.append(relabel[lab])
        if not rgs:
            raise ValueError("ground set must be non-empty")
        obj = object.__new__(cls)
        obj._rgs = tuple(rgs)
        return obj

    @property
    def n(self) -> int:
        return len(self._rgs)

    @property
    def rgs(self) -> tuple[int, ...]:
        return self._rgs

    @property
    def block_count(self) -> int:
        return max(self._rgs) + 1

    @property
    def blocks(self) -> tuple[tuple[int, ...], ...]:
        out: list[list[int]] = [[] for _ in range(self.block_count)]
        for i, lab in enumerate(self._rgs):
            out[lab].append(i + 1)
        return tuple(tuple(b) for b in out)

    def block_of(self, x: int) -> int:
        """Canonical label (0-based) of the block containing element x."""
        return self._rgs[x - 1]

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Partition) and self._rgs == other._rgs

    def __hash__(self) -> int:
        return hash(self._rgs)

    def __repr__(self) -> str:
        inner = "|".join(",".join(str(x) for x in b) for b in self.blocks)
        return f"Partition[{inner}]"


@lru_cache(maxsize=None)
def zero_partition(n: int) -> Partition:
    """All singletons: the bottom of the lattice."""
    return Partition.from_rgs(range(n))


@lru_cache(maxsize=None)
def one_partition(n: int) -> Partition:
    """Single block: the top of the lattice."""
    return Partition.from_rgs([0] * n)


def _iter_rgs(n: int) -> Iterator[tuple[int, ...]]:
    # Lexicographic restricted-growth strings; b[i] = 1 + max(a[:i]).
    a = [0] * n
    b = [1] * n
    while True:
        yield tuple(a)
        i = n - 1
        while i > 0 and a[i] == b[i]:
            a[i] = 0
            i -= 1
        if i == 0:
            return
        a[i] += 1
        grown = b[i] + 1 if a[i] == b[i] else b[i]
        for j in range(i + 1, n):
            b[j] = grown


def enumerate_partitions(n: int) -> list[Partition]:
    """All partitions of {1..n}, lexicographic by restricted-growth string."""
    if not 1 <= n <= ENUMERATION_CAP:
        raise ValueError(f"enumeration supported for 1 <= n <= {ENUMERATION_CAP}")
    return [Partition.from_rgs(a) for a in _iter_rgs(n)]


@lru_cache(maxsize=None)
def bell_number(n: int) -> int:
    """Number of partitions of an n-set (binomial recurrence)."""
    if n < 0:
        raise ValueError("n must be non-negative")
    if n == 0:
        return 1
    return sum(comb(n - 1, k) * bell_number(k) for k in range(n))


def is_refinement(sigma: Partition, pi: Partition) -> bool:
    """True when every block of sigma is contained in a block of pi."""
    if sigma.n != pi.n:
        raise ValueError("partitions live on different ground sets")
    mapped = [-1] * sigma.block_count
    srgs, prgs = sigma.rgs, pi.rgs
    for i in range(sigma.n):
        s = srgs[i]
        p = prgs[i]
        if mapped[s] < 0:
            mapped[s] = p
        elif mapped[s] != p:
            return False
    return True


def block_size_vector(sigma: Partition) -> tuple[int, ...]:
    """Block sizes in canonical block order."""
    counts = [0] * sigma.block_count
    for lab in sigma.rgs:
        counts[lab] += 1
    return tuple(counts)


@dataclass(frozen=True)
class TypeVector:
    """Multiplicity vector: counts[j-1] blocks of size (or fold) j.

    Trailing zeros are trimmed on construction so equal types compare equal
    regardless of how they were padded.
    """

    counts: tuple[int, ...]

    def __post_init__(self):
        counts = tuple(int(c) for c in self.counts)
        if any(c < 0 for c in counts):
            raise ValueError("type counts must be non-negative")
        while counts and counts[-1] == 0:
            counts = counts[:-1]
        object.__setattr__(self, "counts", counts)

    @property
    def size(self) -> int:
        """Total number of blocks."""
        return sum(self.counts)

    @property
    def weighted_size(self) -> int:
        """Sum of j * counts[j-1]: the size of the underlying ground set."""
        return sum(j * c for j, c in enumerate(self.counts, start=1))


def partition_type(sigma: Partition) -> TypeVector:
    """Type of sigma itself: r_j = number of blocks of size j."""
    sizes = block_size_vector(sigma)
    r = [0] * max(sizes)
    for s in sizes:
        r[s - 1] += 1
    return TypeVector(tuple(r))


def segment_type(sigma: Partition, pi: Partition) -> TypeVector:
    """Type of the segment [sigma, pi]: r_j = pi-blocks made of j sigma-blocks."""
    if not is_refinement(sigma, pi):
        raise ValueError("segment type requires sigma <= pi")
    per_block = [0] * pi.block_count
    seen = [False] * sigma.block_count
    for i in range(sigma.n):
        s = sigma.rgs[i]
        if not seen[s]:
            seen[s] = True
            per_block[pi.rgs[i]] += 1
    r = [0] * max(per_block)
    for c in per_block:
        r[c - 1] += 1
    return TypeVector(tuple(r))


def mobius(sigma: Partition, pi: Partition) -> int:
    """Moebius function of the segment [sigma, pi] (closed form)."""
    t = segment_type(sigma, pi)
    m = sigma.block_count
    k = pi.block_count
    value = -1 if (m - k) % 2 else 1
    for j, rj in enumerate(t.counts, start=1):
        if j >= 3 and rj:
            value *= factorial(j - 1) ** rj
    return value


def mobius_recursive(sigma: Partition, pi: Partition,
                     universe: list[Partition] | None = None) -> int:
    """Independent oracle: the defining recursion of the Moebius function.

    mu(sigma, sigma) = 1 and sum over sigma <= tau <= pi of mu(sigma, tau)
    vanishes for sigma < pi. Quadratic in the segment size; meant for tests.
    """
    if not is_refinement(sigma, pi):
        raise ValueError("moebius requires sigma <= pi")
    if universe is None:
        universe = enumerate_partitions(sigma.n)
    interval = [t for t in universe
                if is_refinement(sigma, t) and is_refinement(t, pi)]
    # tau strictly below rho has strictly more blocks, so this order is safe
    interval.sort(key=lambda t: -t.block_count)
    values: dict[Partition, int] = {}
    for tau in interval:
        if tau == sigma:
            values[tau] = 1
            continue
        acc = 0
        for rho, v in values.items():
            if rho != tau and is_refinement(rho, tau):
                acc += v
        values[tau] = -acc
    return values[pi]


def collapse_interval(sigma: Partition, pi: Partition) -> Partition:
    """Collapse pi >= sigma to a partition of the sigma-block indices.

    Block j of sigma (canonical order) becomes element j of {1..#sigma};
    two indices land in the same block exactly when the corresponding
    sigma-blocks sit inside the same pi-block. The map [sigma, top] ->
    (partitions of {1..#sigma}) is an order- and Moebius-preserving
    bijection, which the test suite checks exhaustively.
    """
    if not is_refinement(sigma, pi):
        raise ValueError("collapse requires sigma <= pi")
    labels = [-1] * sigma.block_count
    for i in range(sigma.n):
        labels[sigma.rgs[i]] = pi.rgs[i]
    return Partition.from_rgs(labels)


@dataclass(frozen=True)
class Permutation:
    """Permutation of {1..n}; images[i-1] is the image of i.

    Acting on a vector pulls coordinates: p applied to x is
    (x[p(1)], ..., x[p(n)]) -- see diagonals.permute_tuple. Acting on a
    partition maps elements forward -- see permute_partition.
    """

    images: tuple[int, ...]

    def __post_init__(self):
        images = tuple(int(i) for i in self.images)
        object.__setattr__(self, "images", images)
        if sorted(images) != list(range(1, len(images) + 1)):
            raise ValueError("not a permutation of 1..n")

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(tuple(range(1, n + 1)))

    @property
    def n(self) -> int:
        return len(self.images)

    def __call__(self, i: int) -> int:
        return self.images[i - 1]

    def inverse(self) -> "Permutation":
        inv = [0] * self.n
        for i, img in enumerate(self.images, start=1):
            inv[img - 1] = i
        return Permutation(tuple(inv))

    def compose(self, other: "Permutation") -> "Permutation":
        """self after other: (self.compose(other))(i) == self(other(i))."""
        if self.n != other.n:
            raise ValueError("mismatched sizes")
        return Permutation(tuple(self(other(i)) for i in range(1, self.n + 1)))


def all_permutations(n: int) -> Iterator[Permutation]:
    for images in itertools.permutations(range(1, n + 1)):
        yield Permutation(images)


def permute_partition(p: Permutation, sigma: Partition) -> tuple[Partition, Permutation]:
    """Image partition p(sigma) plus the block-ordering permutation.

    Returns (tau, p1) where tau has blocks {p(x) : x in B_j} in canonical
    order and p1 says where each canonical block of tau came from: block i
    of tau is the image of block p1(i) of sigma. Consequently applying p1
    to the block-size vector of sigma yields the block-size vector of tau.
    """
    if p.n != sigma.n:
        raise ValueError("permutation and partition sizes differ")
    images = [sorted(p(x) for x in block) for block in sigma.blocks]
    order = sorted(range(len(images)), key=lambda j: images[j][0])
    tau = Partition(sigma.n, [images[j] for j in order])
    p1 = Permutation(tuple(j + 1 for j in order))
    return tau, p1


def count_by_type(n: int, t: TypeVector) -> int:
    """Number of partitions of an n-set with r_j blocks of size j."""
    if t.weighted_size != n:
        raise ValueError(f"type {t.counts} is not a type of an {n}-set")
    denom = 1
    for j, rj in enumerate(t.counts, start=1):
        denom *= factorial(j) ** rj * factorial(rj)
    return factorial(n) // denom


def type_vectors(n: int) -> list[TypeVector]:
    """All block-size types of partitions of an n-set, deterministic order."""
    if n < 1:
        raise ValueError("n must be positive")
    out: list[TypeVector] = []
    acc: list[int] = []

    def rec(j: int, rem: int) -> None:
        if rem == 0:
            out.append(TypeVector(tuple(acc)))
            return
        if j > rem:
            return
        for c in range(rem // j, -1, -1):
            acc.append(c)
            rec(j + 1, rem - j * c)
            acc.pop()

    rec(1, n)
    return out

"""Discrete random-measure calculus over a grid of cells.

An AtomFamily holds one real atom per cell for each needed order. Two
flavours matter in practice: multiplicative families, whose order-r atoms
are r-th powers of the base atoms (the pre-limit objects produced by a
refining grid), and variation families, whose order-r atoms come from a
path's jump list via `levy.variation_increments`.

The two basic set functions are the product measure, which sums the atom
products over every tuple whose kernel partition is at least the base
partition (entries constant on its blocks), and the Ito measure, which
keeps only tuples whose kernel equals the base partition exactly. They
determine each other by Moebius inversion over the partition lattice, and
`mobius_recover_ito` recovers the second from the first along that route.

Enumeration over the full index cube is the reference semantics; closed
block-product forms for rectangle sets live alongside and are validated
against the enumeration in the test suite.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from . import _kernels as kernels
from .diagonals import CellRectangle
from .levy import LevyPath, variation_increments
from .partitions import (Partition, enumerate_partitions, is_refinement,
                         mobius, zero_partition)

#: Hard budget on exhaustive tuple enumeration (cells ** arity).
ENUMERATION_BUDGET = 10 ** 8


class AtomFamily:
    """Per-order cell atoms; multiplicative families derive powers on demand."""

    def __init__(self, n_cells: int, orders: Mapping[int, np.ndarray] | None = None,
                 base: np.ndarray | None = None):
        if (orders is None) == (base is None):
            raise ValueError("give either explicit orders or a multiplicative base")
        self._n_cells = int(n_cells)
        self._base: np.ndarray | None = None
        self._orders: dict[int, np.ndarray] = {}
        if base is not None:
            base = np.asarray(base, dtype=np.float64)
            if base.shape != (self._n_cells,):
                raise ValueError("base atoms must be one value per cell")
            self._base = base
        else:
            for r, arr in orders.items():
                r = int(r)
                if r < 1:
                    raise ValueError("orders must be positive")
                arr = np.asarray(arr, dtype=np.float64)
                if arr.shape != (self._n_cells,):
                    raise ValueError(f"order-{r} atoms must be one value per cell")
                self._orders[r] = arr

    @classmethod
    def multiplicative(cls, base: np.ndarray) -> "AtomFamily":
        base = np.asarray(base, dtype=np.float64)
        return cls(base.shape[0], base=base)

    @classmethod
    def from_orders(cls, orders: Mapping[int, np.ndarray]) -> "AtomFamily":
        arrays = {int(r): np.asarray(a, dtype=np.float64) for r, a in orders.items()}
        if not arrays:
            raise ValueError("need at least one order")
        n_cells = next(iter(arrays.values())).shape[0]
        return cls(n_cells, orders=arrays)

    @classmethod
    def from_path(cls, path: LevyPath, max_order: int) -> "AtomFamily":
        """Variation family: order-r atoms are the order-r variation increments."""
        if max_order < 1:
            raise ValueError("need at least order 1")
        return cls(path.n_cells,
                   orders={r: variation_increments(path, r)
                           for r in range(1, max_order + 1)})

    @property
    def n_cells(self) -> int:
        return self._n_cells

    @property
    def is_multiplicative(self) -> bool:
        return self._base is not None

    @property
    def base(self) -> np.ndarray:
        if self._base is None:
            raise ValueError("family is not multiplicative")
        return self._base

    @property
    def registered_orders(self) -> tuple[int, ...]:
        return tuple(sorted(self._orders))

    def atoms(self, r: int) -> np.ndarray:
        r = int(r)
        if r < 1:
            raise ValueError("order must be positive")
        if self._base is not None:
            return self._base ** r
        if r not in self._orders:
            raise ValueError(f"order {r} not registered (have {sorted(self._orders)})")
        return self._orders[r]


@dataclass(frozen=True)
class DiagonalSpec:
    """A set of index tuples (predicate or rectangle) plus a base partition."""

    n: int
    base: Partition
    predicate: Callable[[tuple[int, ...]], bool] | None = None
    rectangle: CellRectangle | None = None

    def __post_init__(self):
        if self.base.n != self.n:
            raise ValueError("base partition must live on the tuple positions")
        if self.predicate is not None and self.rectangle is not None:
            raise ValueError("give a predicate or a rectangle, not both")
        if self.rectangle is not None and self.rectangle.n != self.n:
            raise ValueError("rectangle arity must match the tuple length")

    @classmethod
    def full(cls, n: int, base: Partition | None = None) -> "DiagonalSpec":
        return cls(n, base if base is not None else zero_partition(n))

    @classmethod
    def over_rectangle(cls, rect: CellRectangle,
                       base: Partition | None = None) -> "DiagonalSpec":
        n = rect.n
        return cls(n, base if base is not None else zero_partition(n), rectangle=rect)

    @classmethod
    def over_predicate(cls, n: int, fn: Callable[[tuple[int, ...]], bool],
                       base: Partition | None = None) -> "DiagonalSpec":
        return cls(n, base if base is not None else zero_partition(n), predicate=fn)


def _check_budget(n_cells: int, arity: int) -> None:
    if n_cells ** arity > ENUMERATION_BUDGET:
        raise ValueError(
            f"enumeration budget exceeded: {n_cells}**{arity} > {ENUMERATION_BUDGET}")


def _slot_rows(atoms: AtomFamily, orders: Sequence[int],
               spec: DiagonalSpec) -> np.ndarray | None:
    """Per-slot atom rows with any rectangle restriction folded in as masks.

    Returns None when the rectangle is empty (the sum has no terms).
    """
    if len(orders) != spec.n:
        raise ValueError("order vector length must match the tuple length")
    rows = np.stack([atoms.atoms(r) for r in orders]).astype(np.float64, copy=True)
    if spec.rectangle is not None:
        if spec.rectangle.is_empty:
            return None
        for k, factor in enumerate(spec.rectangle.factors):
            mask = np.zeros(atoms.n_cells)
            idx = [c - 1 for c in factor]
            if idx and (min(idx) < 0 or max(idx) >= atoms.n_cells):
                raise ValueError("rectangle cell outside the grid")
            mask[idx] = 1.0
            rows[k] *= mask
    return rows


def _tuple_matches(t: tuple[int, ...], base: Partition, exact: bool) -> bool:
    rep: dict[int, int] = {}
    for pos, lab in enumerate(base.rgs):
        if lab in rep:
            if t[pos] != t[rep[lab]]:
                return False
        else:
            rep[lab] = pos
    if exact:
        heads = sorted(rep.values())
        vals = [t[h] for h in heads]
        if len(set(vals)) != len(vals):
            return False
    return True


def _enumerate_predicate(rows: np.ndarray, spec: DiagonalSpec, exact: bool) -> float:
    n, width = rows.shape
    total = 0.0
    for t in itertools.product(range(1, width + 1), repeat=n):
        if not spec.predicate(t):
            continue
        if not _tuple_matches(t, spec.base, exact):
            continue
        w = 1.0
        for k in range(n):
            w *= rows[k, t[k] - 1]
        total += w
    return total


def product_measure(atoms: AtomFamily, orders: Sequence[int],
                    spec: DiagonalSpec) -> float:
    """Sum of atom products over tuples in the set with kernel >= base."""
    rows = _slot_rows(atoms, orders, spec)
    if rows is None:
        return 0.0
    _check_budget(atoms.n_cells, spec.n)
    if spec.predicate is not None:
        return _enumerate_predicate(rows, spec, exact=False)
    return kernels.weighted_sum_kernel(None, rows, spec.base.rgs, exact=False)


def ito_measure(atoms: AtomFamily, orders: Sequence[int],
                spec: DiagonalSpec) -> float:
    """Sum of atom products over tuples in the set with kernel == base exactly."""
    rows = _slot_rows(atoms, orders, spec)
    if rows is None:
        return 0.0
    _check_budget(atoms.n_cells, spec.n)
    if spec.predicate is not None:
        return _enumerate_predicate(rows, spec, exact=True)
    return kernels.weighted_sum_kernel(None, rows, spec.base.rgs, exact=True)


def mobius_recover_ito(atoms: AtomFamily, orders: Sequence[int],
                       spec: DiagonalSpec) -> float:
    """Ito measure recovered from product measures by Moebius inversion."""
    total = 0.0
    for sigma in enumerate_partitions(spec.n):
        if is_refinement(spec.base, sigma):
            total += mobius(spec.base, sigma) * product_measure(
                atoms, orders, replace(spec, base=sigma))
    return total


def product_measure_block_fast(atoms: AtomFamily, orders: Sequence[int],
                               base: Partition,
                               rectangle: CellRectangle | None = None) -> float:
    """Closed block-product form of the product measure over a rectangle.

    The constant-on-blocks sum factorises: one free index per block, whose
    weight is the cellwise product of the slot atoms in that block.
    """
    spec = DiagonalSpec(base.n, base, rectangle=rectangle)
    rows = _slot_rows(atoms, orders, spec)
    if rows is None:
        return 0.0
    total = 1.0
    for block in base.blocks:
        w = np.ones(atoms.n_cells)
        for i in block:
            w = w * rows[i - 1]
        total *= float(w.sum())
    return total


def ito_measure_mobius_fast(atoms: AtomFamily, orders: Sequence[int],
                            base: Partition,
                            rectangle: CellRectangle | None = None) -> float:
    """Fast Ito measure over a rectangle via inclusion-exclusion."""
    total = 0.0
    for sigma in enumerate_partitions(base.n):
        if is_refinement(base, sigma):
            total += mobius(base, sigma) * product_measure_block_fast(
                atoms, orders, sigma, rectangle)
    return total


def collapse_block_atoms(atoms: AtomFamily, orders: Sequence[int],
                         sigma: Partition) -> list[tuple[int, np.ndarray]]:
    """Collapse slot atoms along the blocks of sigma.

    Returns one (order, atoms) pair per canonical block: the order is the
    sum of the slot orders in the block and the atom at cell c is the
    product of the slot atoms at c. Pairs are returned positionally since
    two blocks may share a total order while carrying different atoms; for
    a multiplicative family the pair for a block of total order r always
    equals the family's own order-r atoms.
    """
    if len(orders) != sigma.n:
        raise ValueError("order vector length must match the partition ground set")
    out = []
    for block in sigma.blocks:
        r = sum(int(orders[i - 1]) for i in block)
        a = np.ones(atoms.n_cells)
        for i in block:
            a = a * atoms.atoms(orders[i - 1])
        out.append((r, a))
    return out


def _cell_mask(path: LevyPath, cells: Iterable[int] | None) -> np.ndarray:
    if cells is None:
        return np.ones(path.n_cells)
    mask = np.zeros(path.n_cells)
    idx = sorted({int(c) for c in cells})
    if idx and (idx[0] < 1 or idx[-1] > path.n_cells):
        raise ValueError("cell index outside the grid")
    mask[[c - 1 for c in idx]] = 1.0
    return mask


def diagonal_measure_refinement(path: LevyPath, n: int,
                                cells: Iterable[int] | None,
                                levels: Sequence[int]) -> tuple[list[float], float]:
    """Power sums of grid increments along a ladder of dyadic coarsenings.

    For each level m the grid splits into 2**m dyadic cells; the statistic
    is the sum over those cells of the n-th power of the increment of the
    path over (cell intersect A), where A is the union of the given finest
    cells (all of them when None). Returns the per-level values and the
    limit object: the order-n variation of the path restricted to A.
    """
    if n < 1:
        raise ValueError("order must be at least 1")
    levels = [int(m) for m in levels]
    if not levels or any(b <= a for a, b in zip(levels, levels[1:])):
        raise ValueError("levels must be strictly increasing")
    if levels[0] < 0:
        raise ValueError("levels must be non-negative")
    depth = path.n_cells.bit_length() - 1
    if levels[-1] > depth:
        raise ValueError("deepest level exceeds the path grid depth")
    mask = _cell_mask(path, cells)
    restricted = path.base_increments * mask
    values = []
    for m in levels:
        coarse = restricted.reshape(1 << m, path.n_cells >> m).sum(axis=1)
        values.append(float(np.sum(coarse ** n)))
    reference = float(np.sum(variation_increments(path, n) * mask))
    return values, reference


def mixed_variation_refinement(path: LevyPath, orders: Sequence[int],
                               levels: Sequence[int],
                               cells: Iterable[int] | None = None
                               ) -> tuple[list[float], float]:
    """Diagonal sums of products of variation increments of several orders.

    Level m sums, over the 2**m dyadic cells, the product over k of the
    order-orders[k] variation increment of the path over (cell intersect A).
    The limit object is the variation of total order sum(orders) over A.
    """
    orders = [int(r) for r in orders]
    if not orders or any(r < 1 for r in orders):
        raise ValueError("orders must be positive")
    levels = [int(m) for m in levels]
    if not levels or any(b <= a for a, b in zip(levels, levels[1:])):
        raise ValueError("levels must be strictly increasing")
    depth = path.n_cells.bit_length() - 1
    if levels[-1] > depth or levels[0] < 0:
        raise ValueError("levels outside the path grid depth")
    mask = _cell_mask(path, cells)
    fine = [variation_increments(path, r) * mask for r in orders]
    values = []
    for m in levels:
        prod = np.ones(1 << m)
        for arr in fine:
            prod = prod * arr.reshape(1 << m, path.n_cells >> m).sum(axis=1)
        values.append(float(prod.sum()))
    reference = float(np.sum(variation_increments(path, sum(orders)) * mask))
    return values, reference

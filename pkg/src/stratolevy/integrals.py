"""Multiple Ito and Stratonovich integrals of grid functions.

The Stratonovich (product) integral sums f(t) times the base atoms over
every index tuple t; the Ito integral keeps only tuples with pairwise
distinct entries. For a multiplicative atom family the two are tied cell
by cell: grouping the product sum by the kernel partition of the tuple
turns each group into an Ito integral of lower arity whose integrand is f
composed with the expansion map of the partition and whose slot orders are
the block sizes. `hu_meyer_terms` spells out that decomposition, one term
per partition, and `hu_meyer_evaluate` sums it; the identity with the
product integral is exact at every grid size, not just in the limit.

Grid functions carry their horizon so that cell representatives are the
right endpoints k*T/N; a function built as a tensor product of per-axis
factors keeps the factorisation, which the integral routines exploit
(distinct-index sums then cost O(#partitions * N) via inclusion-exclusion
instead of O(N^arity)).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import _kernels as kernels
from .measures import ENUMERATION_BUDGET, AtomFamily
from .partitions import (Partition, Permutation, TypeVector, block_size_vector,
                         count_by_type, enumerate_partitions, mobius,
                         type_vectors, zero_partition)

_DECOMPOSITION_CAP = 7


class GridFunction:
    """A real function of n cell indices, with optional structure.

    Exactly one of `dense`, `func`, `factors` must be given:
      * dense: an (N,)*n tensor of values,
      * func: a callable on [0,T]^n, sampled at cell representatives,
      * factors: per-axis length-N vectors whose outer product is the
        function (optionally with the per-axis callables they came from,
        so jump-time evaluation can stay exact).
    """

    __slots__ = ("n", "n_cells", "horizon", "symmetric",
                 "_dense", "_func", "_factors", "_factor_funcs")

    def __init__(self, n: int, n_cells: int, horizon: float = 1.0, *,
                 dense: np.ndarray | None = None,
                 func: Callable[..., float] | None = None,
                 factors: Sequence[np.ndarray] | None = None,
                 factor_funcs: Sequence[Callable[[float], float]] | None = None,
                 symmetric: bool | None = None):
        self.n = int(n)
        self.n_cells = int(n_cells)
        self.horizon = float(horizon)
        if self.n < 1 or self.n_cells < 1 or self.horizon <= 0:
            raise ValueError("need n >= 1, n_cells >= 1, horizon > 0")
        given = sum(x is not None for x in (dense, func, factors))
        if given != 1:
            raise ValueError("give exactly one of dense, func, factors")
        self._dense = None
        self._func = func
        self._factors = None
        self._factor_funcs = None
        if dense is not None:
            dense = np.asarray(dense, dtype=np.float64)
            if dense.shape != (self.n_cells,) * self.n:
                raise ValueError("dense tensor shape must be (n_cells,)*n")
            self._dense = dense
        if factors is not None:
            factors = tuple(np.asarray(g, dtype=np.float64) for g in factors)
            if len(factors) != self.n or any(g.shape != (self.n_cells,) for g in factors):
                raise ValueError("need one length-n_cells factor per axis")
            self._factors = factors
            if factor_funcs is not None:
                if len(factor_funcs) != self.n:
                    raise ValueError("need one factor callable per axis")
                self._factor_funcs = tuple(factor_funcs)
        elif factor_funcs is not None:
            raise ValueError("factor callables only make sense with factors")
        self.symmetric = symmetric
        if symmetric is True:
            self._spot_check_symmetry()

    # -- constructors -------------------------------------------------------

    @classmethod
    def from_dense(cls, dense: np.ndarray, horizon: float = 1.0,
                   symmetric: bool | None = None) -> "GridFunction":
        dense = np.asarray(dense, dtype=np.float64)
        return cls(dense.ndim, dense.shape[0] if dense.ndim else 1,
                   horizon, dense=dense, symmetric=symmetric)

    @classmethod
    def from_callable(cls, func: Callable[..., float], n: int, n_cells: int,
                      horizon: float = 1.0,
                      symmetric: bool | None = None) -> "GridFunction":
        return cls(n, n_cells, horizon, func=func, symmetric=symmetric)

    @classmethod
    def from_factors(cls, factors: Sequence, n_cells: int, horizon: float = 1.0,
                     symmetric: bool | None = None) -> "GridFunction":
        """Tensor product of per-axis factors (arrays or callables on [0,T])."""
        pts = horizon * np.arange(1, n_cells + 1) / n_cells
        arrays = []
        funcs = []
        all_callable = True
        for g in factors:
            if callable(g):
                arrays.append(np.asarray([float(g(t)) for t in pts]))
                funcs.append(g)
            else:
                arrays.append(np.asarray(g, dtype=np.float64))
                all_callable = False
        return cls(len(arrays), n_cells, horizon, factors=arrays,
                   factor_funcs=tuple(funcs) if all_callable else None,
                   symmetric=symmetric)

    @classmethod
    def constant(cls, value: float, n: int, n_cells: int,
                 horizon: float = 1.0) -> "GridFunction":
        vol = float(value)
        funcs = [(lambda t: 1.0)] * (n - 1) + [(lambda t, _v=vol: _v)]
        return cls.from_factors(funcs, n_cells, horizon, symmetric=True)

    # -- access -------------------------------------------------------------

    @property
    def factors(self) -> tuple[np.ndarray, ...] | None:
        return self._factors

    @property
    def factor_funcs(self):
        return self._factor_funcs

    @property
    def func(self):
        return self._func

    def grid_points(self) -> np.ndarray:
        """Cell representatives: right endpoints k*T/N."""
        return self.horizon * np.arange(1, self.n_cells + 1) / self.n_cells

    def dense(self) -> np.ndarray:
        if self._dense is None:
            if self.n_cells ** self.n > ENUMERATION_BUDGET:
                raise ValueError("dense materialisation exceeds the enumeration budget")
            if self._factors is not None:
                out = self._factors[0]
                for g in self._factors[1:]:
                    out = np.multiply.outer(out, g)
                self._dense = np.asarray(out, dtype=np.float64).reshape(
                    (self.n_cells,) * self.n)
            else:
                pts = self.grid_points()
                out = np.empty((self.n_cells,) * self.n)
                for t in itertools.product(range(self.n_cells), repeat=self.n):
                    out[t] = self._func(*(pts[i] for i in t))
                self._dense = out
        return self._dense

    def at(self, t: Sequence[int]) -> float:
        """Value at a 1-based index tuple."""
        if len(t) != self.n:
            raise ValueError("index tuple length must equal the arity")
        if self._factors is not None:
            w = 1.0
            for g, i in zip(self._factors, t):
                w *= g[i - 1]
            return float(w)
        return float(self.dense()[tuple(i - 1 for i in t)])

    def _spot_check_symmetry(self) -> None:
        if self.n == 1:
            return
        rng = np.random.default_rng(0)
        pts = [tuple(int(v) for v in rng.integers(1, self.n_cells + 1, self.n))
               for _ in range(8)]
        for t in pts:
            v = self.at(t)
            s = self.at(tuple(sorted(t)))
            if not math.isclose(v, s, rel_tol=1e-9, abs_tol=1e-12):
                raise ValueError("function declared symmetric is not")

    # -- structure maps -----------------------------------------------------

    def compose_q(self, sigma: Partition) -> "GridFunction":
        """The integrand f(q_sigma(.)) of arity #sigma (canonical block order)."""
        if sigma.n != self.n:
            raise ValueError("partition ground set must match the arity")
        m = sigma.block_count
        if self._factors is not None:
            new = []
            for block in sigma.blocks:
                g = np.ones(self.n_cells)
                for i in block:
                    g = g * self._factors[i - 1]
                new.append(g)
            funcs = None
            if self._factor_funcs is not None:
                funcs = []
                for block in sigma.blocks:
                    members = tuple(self._factor_funcs[i - 1] for i in block)
                    funcs.append(_product_of(members))
            return GridFunction(m, self.n_cells, self.horizon, factors=new,
                                factor_funcs=funcs)
        if self._func is not None and self._dense is None:
            inner = self._func
            labels = sigma.rgs
            return GridFunction(
                m, self.n_cells, self.horizon,
                func=lambda *xs, _f=inner, _lab=labels: _f(*(xs[l] for l in _lab)))
        arr = self.dense()
        idx = np.indices((self.n_cells,) * m, sparse=True)
        gathered = arr[tuple(idx[sigma.block_of(i)] for i in range(1, self.n + 1))]
        return GridFunction(m, self.n_cells, self.horizon, dense=gathered)

    def compose_perm(self, p: Permutation) -> "GridFunction":
        """The integrand f(p(.)): value at t is f(t[p(1)], ..., t[p(n)])."""
        if p.n != self.n:
            raise ValueError("permutation size must match the arity")
        inv = p.inverse()
        if self._factors is not None:
            # slot j of f reads coordinate inv(j) of the new argument
            new = [self._factors[inv(i) - 1] for i in range(1, self.n + 1)]
            funcs = None
            if self._factor_funcs is not None:
                funcs = [self._factor_funcs[inv(i) - 1] for i in range(1, self.n + 1)]
            return GridFunction(self.n, self.n_cells, self.horizon, factors=new,
                                factor_funcs=funcs, symmetric=self.symmetric)
        arr = self.dense()
        axes = tuple(inv(i) - 1 for i in range(1, self.n + 1))
        return GridFunction(self.n, self.n_cells, self.horizon,
                            dense=arr.transpose(axes), symmetric=self.symmetric)


def _product_of(funcs):
    def product(x: float) -> float:
        w = 1.0
        for g in funcs:
            w *= g(x)
        return w
    return product


def symmetrize(f: GridFunction) -> GridFunction:
    """Average of f over all coordinate permutations (idempotent)."""
    if f.symmetric is True:
        return f
    n = f.n
    if math.factorial(n) * f.n_cells ** n > ENUMERATION_BUDGET:
        raise ValueError("symmetrisation exceeds the enumeration budget")
    arr = f.dense()
    acc = np.zeros_like(arr)
    for axes in itertools.permutations(range(n)):
        acc += arr.transpose(axes)
    acc /= math.factorial(n)
    return GridFunction(n, f.n_cells, f.horizon, dense=acc, symmetric=True)


def _check_compatible(f: GridFunction, atoms: AtomFamily) -> None:
    if f.n_cells != atoms.n_cells:
        raise ValueError("grid function and atom family cell counts differ")


def ito_integral_rows(f: GridFunction, rows: Sequence[np.ndarray]) -> float:
    """Distinct-index sum with an explicit atom row per slot."""
    n = f.n
    if len(rows) != n:
        raise ValueError("need one atom row per slot")
    rows = [np.asarray(r, dtype=np.float64) for r in rows]
    if any(r.shape != (f.n_cells,) for r in rows):
        raise ValueError("atom rows must have one value per cell")
    if f.factors is not None:
        weights = [g * r for g, r in zip(f.factors, rows)]
        return _distinct_sum_factored(weights)
    if f.n_cells ** n > ENUMERATION_BUDGET:
        raise ValueError("enumeration budget exceeded; use a factored integrand")
    return kernels.weighted_sum_distinct(f.dense(), np.stack(rows))


def _distinct_sum_factored(weights: Sequence[np.ndarray]) -> float:
    # Inclusion-exclusion over the partition lattice: constant-on-blocks sums
    # factorise into per-block cellwise products.
    n = len(weights)
    bottom = zero_partition(n)
    total = 0.0
    for sigma in enumerate_partitions(n):
        term = float(mobius(bottom, sigma))
        for block in sigma.blocks:
            w = weights[block[0] - 1]
            for i in block[1:]:
                w = w * weights[i - 1]
            term *= float(w.sum())
        total += term
    return total


def ito_integral(f: GridFunction, orders: Sequence[int], atoms: AtomFamily) -> float:
    """Multiple Ito integral: sum of f times slot atoms over distinct tuples."""
    _check_compatible(f, atoms)
    if len(orders) != f.n:
        raise ValueError("order vector length must equal the arity")
    return ito_integral_rows(f, [atoms.atoms(r) for r in orders])


def iterated_form(f: GridFunction, orders: Sequence[int], atoms: AtomFamily) -> float:
    """The same distinct-index sum grouped as iterated simplex integrals.

    One strictly-increasing enumeration per coordinate permutation; the
    union of the permuted simplices is the distinct-index region, so this
    equals ito_integral term for term.
    """
    _check_compatible(f, atoms)
    n = f.n
    if len(orders) != n:
        raise ValueError("order vector length must equal the arity")
    rows = [atoms.atoms(r) for r in orders]
    width = f.n_cells
    if math.comb(width, n) * math.factorial(n) > ENUMERATION_BUDGET:
        raise ValueError("enumeration budget exceeded")
    if n > width:
        return 0.0
    dense = f.dense()
    total = 0.0
    for p in itertools.permutations(range(n)):
        for comb in itertools.combinations(range(width), n):
            t = tuple(comb[p[k]] for k in range(n))
            w = dense[t]
            for k in range(n):
                w *= rows[k][t[k]]
            total += w
    return float(total)


def stratonovich_integral(f: GridFunction, atoms: AtomFamily) -> float:
    """Product integral: sum of f times base atoms over every index tuple."""
    _check_compatible(f, atoms)
    base = atoms.atoms(1)
    if f.factors is not None:
        total = 1.0
        for g in f.factors:
            total *= float((g * base).sum())
        return total
    if f.n_cells ** f.n > ENUMERATION_BUDGET:
        raise ValueError("enumeration budget exceeded; use a factored integrand")
    res = f.dense()
    for _ in range(f.n):
        res = np.tensordot(res, base, axes=([0], [0]))
    return float(res)


@dataclass(frozen=True)
class HuMeyerTerm:
    """One partition's contribution to the diagonal decomposition."""

    partition: Partition
    orders: tuple[int, ...]
    contracted: GridFunction
    coefficient: int = 1


def hu_meyer_terms(f: GridFunction) -> list[HuMeyerTerm]:
    """One term per partition: contract f along the blocks, order = block size."""
    if f.n > _DECOMPOSITION_CAP:
        raise ValueError(f"decomposition supported for arity <= {_DECOMPOSITION_CAP}")
    return [HuMeyerTerm(sigma, block_size_vector(sigma), f.compose_q(sigma), 1)
            for sigma in enumerate_partitions(f.n)]


def hu_meyer_evaluate(f: GridFunction, atoms: AtomFamily) -> float:
    """Sum of the decomposition terms; equals the product integral exactly
    when the atom family is multiplicative."""
    if not atoms.is_multiplicative:
        raise ValueError("the exact decomposition needs a multiplicative family")
    _check_compatible(f, atoms)
    total = 0.0
    for term in hu_meyer_terms(f):
        total += term.coefficient * ito_integral(term.contracted, term.orders, atoms)
    return total


def _canonical_partition_of_type(n: int, t: TypeVector) -> Partition:
    blocks = []
    nxt = 1
    for j, rj in enumerate(t.counts, start=1):
        for _ in range(rj):
            blocks.append(range(nxt, nxt + j))
            nxt += j
    return Partition(n, blocks)


def hu_meyer_symmetric_evaluate(f: GridFunction, atoms: AtomFamily) -> float:
    """Type-grouped decomposition for symmetric integrands.

    All partitions of one block-size type contribute equally for symmetric
    f, so each type is evaluated once on a representative and weighted by
    the number of partitions of that type.
    """
    if f.symmetric is not True:
        raise ValueError("the grouped decomposition needs a symmetric integrand")
    if not atoms.is_multiplicative:
        raise ValueError("the exact decomposition needs a multiplicative family")
    if f.n > _DECOMPOSITION_CAP:
        raise ValueError(f"decomposition supported for arity <= {_DECOMPOSITION_CAP}")
    _check_compatible(f, atoms)
    total = 0.0
    for t in type_vectors(f.n):
        sigma = _canonical_partition_of_type(f.n, t)
        weight = count_by_type(f.n, t)
        total += weight * ito_integral(f.compose_q(sigma),
                                       block_size_vector(sigma), atoms)
    return total


def lambda_norm_sq(f: GridFunction) -> float:
    """Squared norm against the sum of diagonal images of Lebesgue measure.

    Each partition contributes the Riemann sum of (f o q_sigma)^2 with cell
    weight (T/N)^#sigma, so lower-dimensional diagonals keep positive mass.
    """
    if f.n > _DECOMPOSITION_CAP:
        raise ValueError(f"decomposition supported for arity <= {_DECOMPOSITION_CAP}")
    width = f.horizon / f.n_cells
    total = 0.0
    for sigma in enumerate_partitions(f.n):
        g = f.compose_q(sigma)
        if g.factors is not None:
            part = 1.0
            for fac in g.factors:
                part *= float((fac * fac).sum())
        else:
            arr = g.dense()
            part = float((arr * arr).sum())
        total += width ** sigma.block_count * part
    return total


def ito_bound(f: GridFunction, orders: Sequence[int], table) -> float:
    """A-priori second-moment bound for the Ito integral.

    The constant is deliberately loose: each slot of order r contributes a
    factor 2 * (K_{2r} + K_r^2 * T), which dominates both the martingale
    part and the drift part of that slot's increments.
    """
    if len(orders) != f.n:
        raise ValueError("order vector length must equal the arity")
    alpha = 1.0
    for r in orders:
        alpha *= 2.0 * (table.k(2 * int(r)) + table.k(int(r)) ** 2 * f.horizon)
    if f.factors is not None:
        sq = 1.0
        for g in f.factors:
            sq *= float((g * g).sum())
    else:
        arr = f.dense()
        sq = float((arr * arr).sum())
    return alpha * (f.horizon / f.n_cells) ** f.n * sq

"""Closed-form specializations of the diagonal decomposition.

Three integrator families admit shortcuts that the general machinery does
not see:

* Brownian motion: squared increments concentrate on the deterministic
  quadratic variation and higher powers vanish, so the partition sum
  collapses to trace contractions with the classical coefficients
  n! / ((n-2j)! j! 2^j).
* Compensated Poisson: every variation increment of order >= 2 equals the
  cell's jump count, which is the raw increment plus the compensator, so
  integrals against higher-order atoms expand into dX / dt patterns.
* Subordinators (no diffusion, no drift): the path is its jump list, so
  multiple integrals can be evaluated directly on tuples of jumps, at the
  exact jump times.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .integrals import (GridFunction, _distinct_sum_factored, ito_integral,
                        ito_integral_rows)
from .levy import Brownian, CompensatedPoisson, LevyPath
from .measures import ENUMERATION_BUDGET, AtomFamily
from .partitions import block_size_vector, enumerate_partitions

_PATHWISE_CAP = 7


# ---------------------------------------------------------------------------
# Brownian motion
# ---------------------------------------------------------------------------

def hu_meyer_brownian_coefficient(n: int, j: int) -> int:
    """n! / ((n-2j)! j! 2^j): the number of ways to glue j disjoint pairs."""
    if n < 0 or j < 0 or 2 * j > n:
        raise ValueError("need 0 <= 2j <= n")
    return math.factorial(n) // (math.factorial(n - 2 * j)
                                 * math.factorial(j) * 2 ** j)


def brownian_trace(f: GridFunction, j: int,
                   weights: np.ndarray | None = None):
    """Contract the last 2j arguments of f pairwise onto the diagonal.

    Each glued pair variable is summed against `weights` (default: the
    Lebesgue cell weights T/N), so for j = 0 the function is returned
    unchanged and for 2j = n the result is a plain float.
    """
    n = f.n
    if j < 0 or 2 * j > n:
        raise ValueError("need 0 <= 2j <= arity")
    if f.symmetric is False:
        raise ValueError("trace contraction is for symmetric integrands")
    if j == 0:
        return f
    if weights is None:
        w = np.full(f.n_cells, f.horizon / f.n_cells)
    else:
        w = np.asarray(weights, dtype=np.float64)
        if w.shape != (f.n_cells,):
            raise ValueError("pair weights must have one value per cell")
    m = n - 2 * j
    if f.factors is not None:
        scale = 1.0
        for k in range(j):
            a = f.factors[m + 2 * k]
            b = f.factors[m + 2 * k + 1]
            scale *= float((a * b * w).sum())
        if m == 0:
            return scale
        new = list(f.factors[:m])
        new[-1] = new[-1] * scale
        funcs = None
        if f.factor_funcs is not None and scale != 0.0:
            funcs = list(f.factor_funcs[:m])
            last = funcs[-1]
            funcs[-1] = lambda x, _g=last, _s=scale: _s * _g(x)
        return GridFunction(m, f.n_cells, f.horizon, factors=new,
                            factor_funcs=funcs, symmetric=f.symmetric)
    arr = f.dense()
    for _ in range(j):
        # glue the last two axes and integrate the glued variable
        diag = np.diagonal(arr, axis1=-2, axis2=-1)
        arr = np.tensordot(diag, w, axes=([-1], [0]))
    if m == 0:
        return float(arr)
    return GridFunction(m, f.n_cells, f.horizon, dense=np.ascontiguousarray(arr),
                        symmetric=f.symmetric)


def brownian_atoms(path: LevyPath, order_two: str = "lebesgue",
                   max_order: int = 8) -> AtomFamily:
    """Atom family for a Brownian path.

    order_two="lebesgue": order 2 is the deterministic bracket sigma^2*T/N
    and every higher order is identically zero (the limit convention).
    order_two="squared": plain powers of the increments (the pre-limit,
    exactly multiplicative convention).
    """
    if not isinstance(path.model, Brownian):
        raise ValueError("brownian_atoms needs a Brownian path")
    if order_two == "squared":
        return AtomFamily.multiplicative(path.base_increments)
    if order_two != "lebesgue":
        raise ValueError("order_two must be 'lebesgue' or 'squared'")
    return AtomFamily.from_path(path, max_order=max_order)


def brownian_hu_meyer(f: GridFunction, path: LevyPath,
                      order_two: str = "lebesgue") -> float:
    """Trace-form decomposition: sum_j c(n,j) I_{n-2j}(trace^j f).

    With the "lebesgue" pair weights this is the classical formula; it
    matches the product integral only as the grid is refined, because the
    glued pair variables range over all cells instead of avoiding the
    other slots.
    """
    if not isinstance(path.model, Brownian):
        raise ValueError("brownian_hu_meyer needs a Brownian path")
    if f.symmetric is not True:
        raise ValueError("the grouped formula needs a symmetric integrand")
    if order_two == "lebesgue":
        w = np.full(f.n_cells, path.model.volatility ** 2 * path.cell_width)
    elif order_two == "squared":
        w = path.base_increments ** 2
    else:
        raise ValueError("order_two must be 'lebesgue' or 'squared'")
    family = AtomFamily.multiplicative(path.base_increments)
    n = f.n
    total = 0.0
    for j in range(n // 2 + 1):
        coeff = hu_meyer_brownian_coefficient(n, j)
        g = brownian_trace(f, j, weights=w)
        if isinstance(g, float):
            total += coeff * g
        else:
            total += coeff * ito_integral(g, (1,) * g.n, family)
    return total


# ---------------------------------------------------------------------------
# Compensated Poisson
# ---------------------------------------------------------------------------

def poisson_reduce(orders: Sequence[int]) -> list[tuple[int, tuple[str, ...]]]:
    """Expand higher-order integrator slots as dX + dt.

    Each slot of order >= 2 (whose variation increments are the jump
    counts) splits into a dX choice and a dt choice; order-1 slots stay
    dX. Returns (coefficient, pattern) pairs, one per choice combination,
    all with coefficient +1.
    """
    if any(int(r) < 1 for r in orders):
        raise ValueError("integrator orders must be >= 1")
    choices = [("dX",) if int(r) == 1 else ("dX", "dt") for r in orders]
    return [(1, pattern) for pattern in itertools.product(*choices)]


def poisson_pattern_integral(f: GridFunction, pattern: Sequence[str],
                             path: LevyPath) -> float:
    """Ito integral with dX slots fed raw increments and dt slots the
    compensator intensity * T/N."""
    if not isinstance(path.model, CompensatedPoisson):
        raise ValueError("the dX/dt reduction is for compensated Poisson paths")
    if len(pattern) != f.n:
        raise ValueError("pattern length must equal the arity")
    lam = path.model.intensity
    dt_row = np.full(path.n_cells, lam * path.cell_width)
    rows = []
    for tag in pattern:
        if tag == "dX":
            rows.append(path.base_increments)
        elif tag == "dt":
            rows.append(dt_row)
        else:
            raise ValueError("pattern entries must be 'dX' or 'dt'")
    return ito_integral_rows(f, rows)


# ---------------------------------------------------------------------------
# Subordinators: pathwise jump-tuple integrals
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class JumpMeasure:
    """A finite jump list (times in (0,T], nonzero sizes) seen as a measure."""

    times: np.ndarray
    sizes: np.ndarray
    horizon: float

    def __post_init__(self):
        times = np.asarray(self.times, dtype=np.float64)
        sizes = np.asarray(self.sizes, dtype=np.float64)
        if times.shape != sizes.shape or times.ndim != 1:
            raise ValueError("times and sizes must be matching 1-d arrays")
        if times.size:
            if np.any(times <= 0) or np.any(times > self.horizon):
                raise ValueError("jump times must lie in (0, horizon]")
            if np.unique(times).size != times.size:
                raise ValueError("jump times must be distinct")
            if np.any(sizes == 0):
                raise ValueError("jump sizes must be nonzero")
        for name, arr in (("times", times), ("sizes", sizes)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def from_path(cls, path: LevyPath) -> "JumpMeasure":
        return cls(np.array(path.jump_times), np.array(path.jump_sizes),
                   path.horizon)

    @property
    def n_jumps(self) -> int:
        return int(self.times.size)

    @property
    def total_mass(self) -> float:
        return float(np.abs(self.sizes).sum())


def _snap_cells(times: np.ndarray, n_cells: int, horizon: float) -> np.ndarray:
    rights = horizon * np.arange(1, n_cells + 1) / n_cells
    return np.searchsorted(rights, times, side="left")


def _per_jump_factor_rows(f: GridFunction, jm: JumpMeasure):
    """Per-slot weight rows over jumps, or None if f does not factorise."""
    if f.factor_funcs is not None:
        return [np.array([g(t) for t in jm.times]) for g in f.factor_funcs]
    if f.factors is not None:
        cells = _snap_cells(jm.times, f.n_cells, f.horizon)
        return [g[cells] for g in f.factors]
    return None


def _pointwise_evaluator(f, n: int, jm: JumpMeasure):
    """f as a callable on time tuples (cell-snapped only for dense data)."""
    if isinstance(f, GridFunction):
        if f.n != n:
            raise ValueError("grid function arity does not match the order vector")
        if f.func is not None:
            return f.func
        dense = f.dense()
        cells = _snap_cells(jm.times, f.n_cells, f.horizon)
        lookup = {t: c for t, c in zip(jm.times, cells)}
        return lambda *ts: float(dense[tuple(lookup[t] for t in ts)])
    if callable(f):
        return f
    raise TypeError("f must be a GridFunction or a callable")


def jump_measure_ito(f, orders: Sequence[int], jm: JumpMeasure) -> float:
    """Sum of f times jump-size powers over tuples of distinct jumps."""
    n = len(orders)
    if n < 1:
        raise ValueError("need at least one integrator slot")
    J = jm.n_jumps
    if J < n:
        return 0.0
    if isinstance(f, GridFunction):
        rows = _per_jump_factor_rows(f, jm)
        if rows is not None:
            if f.n != n:
                raise ValueError("grid function arity does not match the order vector")
            weights = [r * jm.sizes ** int(o) for r, o in zip(rows, orders)]
            return _distinct_sum_factored(weights)
    if J ** n > ENUMERATION_BUDGET:
        raise ValueError("jump-tuple enumeration budget exceeded")
    ev = _pointwise_evaluator(f, n, jm)
    powers = [jm.sizes ** int(o) for o in orders]
    total = 0.0
    for idx in itertools.permutations(range(J), n):
        w = ev(*(jm.times[i] for i in idx))
        for k in range(n):
            w *= powers[k][idx[k]]
        total += w
    return float(total)


def jump_measure_stratonovich(f, jm: JumpMeasure, n: int | None = None) -> float:
    """Sum of f times jump sizes over ALL jump tuples (the product measure)."""
    if isinstance(f, GridFunction):
        n = f.n
    if n is None:
        raise ValueError("pass the arity n for a bare callable")
    J = jm.n_jumps
    if J == 0:
        return 0.0
    if isinstance(f, GridFunction):
        rows = _per_jump_factor_rows(f, jm)
        if rows is not None:
            total = 1.0
            for r in rows:
                total *= float((r * jm.sizes).sum())
            return total
    if J ** n > ENUMERATION_BUDGET:
        raise ValueError("jump-tuple enumeration budget exceeded")
    ev = _pointwise_evaluator(f, n, jm)
    total = 0.0
    for idx in itertools.product(range(J), repeat=n):
        w = ev(*(jm.times[i] for i in idx))
        for i in idx:
            w *= jm.sizes[i]
        total += w
    return float(total)


def jump_measure_hu_meyer(f, jm: JumpMeasure, n: int | None = None) -> float:
    """Partition sum of distinct-jump integrals of the diagonal contractions.

    Pure finite algebra on the jump set: equals jump_measure_stratonovich
    exactly, for any jump list.
    """
    if isinstance(f, GridFunction):
        n = f.n
    if n is None:
        raise ValueError("pass the arity n for a bare callable")
    if n > _PATHWISE_CAP:
        raise ValueError(f"decomposition supported for arity <= {_PATHWISE_CAP}")
    total = 0.0
    for sigma in enumerate_partitions(n):
        orders = block_size_vector(sigma)
        if isinstance(f, GridFunction):
            g = f.compose_q(sigma)
        else:
            labels = sigma.rgs
            g = (lambda *xs, _f=f, _lab=labels: _f(*(xs[l] for l in _lab)))
        total += jump_measure_ito(g, orders, jm)
    return total


def truncation_bias_bound(eps: float, n: int, sup_f: float, mass: float) -> float:
    """Bias bound for dropping jumps below eps: each of the n slots can host
    one truncated jump, against the retained mass in the others."""
    if eps < 0 or n < 1 or sup_f < 0 or mass < 0:
        raise ValueError("need eps, sup_f, mass >= 0 and n >= 1")
    return eps * n * sup_f * mass ** (n - 1)

"""Levy path simulation on a dyadic grid with explicit jump lists.

The sampler is jump-first: jump times and sizes are drawn before anything
grid-dependent, so the jump list of a path is independent of the grid
resolution (two simulations of the same model and seed at different cell
counts carry identical jumps). Cells are the half-open dyadic intervals
((k-1) T/N, k T/N], represented by their right endpoint.

Power-variation increments of any order are computed from the exact jump
list rather than from powered cell increments:

    order 1: the raw cell increments,
    order 2: sum of squared jumps per cell plus the diffusion contribution
             (variance rate times cell width),
    order n >= 3: sum of n-th powers of the jumps per cell.

Their expectations per unit time are the moment constants K_n: K_1 is the
mean of the process at time one, K_2 adds the squared diffusion coefficient
to the second jump moment, and for n >= 3 only the n-th jump moment
remains. Subtracting K_n times the cell width from the order-n variation
increments yields centred (martingale-difference) increments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from math import factorial
from typing import TextIO, Union

import numpy as np

MASK64 = (1 << 64) - 1
#: Odd 64-bit stride; replica r of a run uses seed  base ^ (r * SEED_STRIDE).
SEED_STRIDE = 0x9E3779B97F4A7C15

MAX_CELLS = 1 << 20


def replica_seed(base_seed: int, replica: int) -> int:
    """Derived seed for one replica of a Monte Carlo run."""
    if replica < 0:
        raise ValueError("replica index must be non-negative")
    return (int(base_seed) ^ ((replica * SEED_STRIDE) & MASK64)) & MASK64


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based generator (Philox) keyed by a 64-bit seed."""
    return np.random.Generator(np.random.Philox(key=int(seed) & MASK64))


# --------------------------------------------------------------------------
# jump size laws


@dataclass(frozen=True)
class ConstantJumps:
    size: float

    def __post_init__(self):
        if self.size == 0:
            raise ValueError("jump size must be non-zero")

    def moment(self, n: int) -> float:
        return float(self.size) ** n

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        return np.full(count, float(self.size))


@dataclass(frozen=True)
class ExponentialJumps:
    mean: float

    def __post_init__(self):
        if self.mean <= 0:
            raise ValueError("mean jump size must be positive")

    def moment(self, n: int) -> float:
        return factorial(n) * float(self.mean) ** n

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        return rng.exponential(self.mean, count)


@dataclass(frozen=True)
class UniformJumps:
    low: float
    high: float

    def __post_init__(self):
        if not self.low < self.high:
            raise ValueError("need low < high")

    def moment(self, n: int) -> float:
        a, b = float(self.low), float(self.high)
        return (b ** (n + 1) - a ** (n + 1)) / ((n + 1) * (b - a))

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        return rng.uniform(self.low, self.high, count)


JumpLaw = Union[ConstantJumps, ExponentialJumps, UniformJumps]


# --------------------------------------------------------------------------
# models


@dataclass(frozen=True)
class Brownian:
    """Brownian motion with drift: volatility * W_t + drift * t."""

    volatility: float = 1.0
    drift: float = 0.0
    horizon: float = 1.0

    def __post_init__(self):
        if self.volatility <= 0:
            raise ValueError("volatility must be positive")
        if self.horizon <= 0:
            raise ValueError("horizon must be positive")


@dataclass(frozen=True)
class CompensatedPoisson:
    """Poisson process with unit jumps minus its intensity drift."""

    intensity: float = 1.0
    horizon: float = 1.0

    def __post_init__(self):
        if self.intensity <= 0:
            raise ValueError("intensity must be positive")
        if self.horizon <= 0:
            raise ValueError("horizon must be positive")


@dataclass(frozen=True)
class CompoundPoisson:
    """Compound Poisson process, optionally compensated to zero mean."""

    intensity: float
    jump_law: JumpLaw = ConstantJumps(1.0)
    compensated: bool = False
    horizon: float = 1.0

    def __post_init__(self):
        if self.intensity <= 0:
            raise ValueError("intensity must be positive")
        if self.horizon <= 0:
            raise ValueError("horizon must be positive")


@dataclass(frozen=True)
class GammaSubordinator:
    """Standard gamma subordinator, jumps below `cutoff` discarded.

    The jump intensity exp(-x)/x integrates to infinity near zero, so the
    sampler draws only jumps above the cutoff; the bias this leaves in the
    first moment is at most the cutoff itself and no compensating drift is
    added.
    """

    cutoff: float = 1e-4
    horizon: float = 1.0

    def __post_init__(self):
        if not 0 < self.cutoff < 1:
            raise ValueError("cutoff must lie in (0, 1)")
        if self.horizon <= 0:
            raise ValueError("horizon must be positive")


LevyModel = Union[Brownian, CompensatedPoisson, CompoundPoisson, GammaSubordinator]


@dataclass(frozen=True)
class MomentTable:
    """Moment constants K_1..K_m of a model."""

    values: tuple[float, ...]

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        if not values:
            raise ValueError("table must hold at least K_1")
        if len(values) >= 2 and values[1] < 0:
            raise ValueError("K_2 must be non-negative")
        object.__setattr__(self, "values", values)

    @property
    def order(self) -> int:
        return len(self.values)

    def k(self, n: int) -> float:
        if not 1 <= n <= len(self.values):
            raise ValueError(f"K_{n} not available (table holds K_1..K_{len(self.values)})")
        return self.values[n - 1]


def moments(model: LevyModel, m: int) -> MomentTable:
    """Closed-form moment constants K_1..K_m for the supported families."""
    if m < 1:
        raise ValueError("need at least one moment")
    if isinstance(model, Brownian):
        vals = [model.drift, model.volatility ** 2] + [0.0] * (m - 2)
    elif isinstance(model, CompensatedPoisson):
        vals = [0.0] + [model.intensity] * (m - 1)
    elif isinstance(model, CompoundPoisson):
        k1 = 0.0 if model.compensated else model.intensity * model.jump_law.moment(1)
        vals = [k1] + [model.intensity * model.jump_law.moment(n) for n in range(2, m + 1)]
    elif isinstance(model, GammaSubordinator):
        vals = [float(factorial(n - 1)) for n in range(1, m + 1)]
    else:
        raise ValueError(f"unsupported model {model!r}")
    return MomentTable(tuple(vals[:m]))


# --------------------------------------------------------------------------
# paths


@dataclass(frozen=True)
class LevyPath:
    """One simulated path: grid increments plus the exact jump list."""

    model: LevyModel
    n_cells: int
    base_increments: np.ndarray
    gaussian_part: np.ndarray
    drift_rate: float
    jump_times: np.ndarray
    jump_sizes: np.ndarray
    jump_cells: np.ndarray = field(init=False, compare=False)

    def __post_init__(self):
        for name in ("base_increments", "gaussian_part", "jump_times", "jump_sizes"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        cells = _cells_of_times(self.jump_times, self.n_cells, self.horizon)
        cells.setflags(write=False)
        object.__setattr__(self, "jump_cells", cells)

    @property
    def horizon(self) -> float:
        return self.model.horizon

    @property
    def cell_width(self) -> float:
        return self.horizon / self.n_cells

    @property
    def diffusion_variance(self) -> float:
        return self.model.volatility ** 2 if isinstance(self.model, Brownian) else 0.0

    def validate(self, atol: float = 1e-12) -> None:
        """Check that cell increments equal drift + gaussian + binned jumps."""
        rebuilt = np.full(self.n_cells, self.drift_rate * self.cell_width)
        rebuilt += self.gaussian_part
        np.add.at(rebuilt, self.jump_cells, self.jump_sizes)
        scale = 1.0 + np.max(np.abs(self.base_increments), initial=0.0)
        if not np.allclose(rebuilt, self.base_increments, rtol=0.0, atol=atol * scale):
            raise AssertionError("cell increments do not match their decomposition")


def _cells_of_times(times: np.ndarray, n_cells: int, horizon: float) -> np.ndarray:
    edges = horizon * np.arange(1, n_cells + 1) / n_cells
    return np.searchsorted(edges, times, side="left")


def _separate_ties(times: np.ndarray, horizon: float) -> np.ndarray:
    """Nudge tied (sorted) jump times apart by one ulp each."""
    if times.size < 2:
        return times
    out = times.copy()
    for i in range(1, out.size):
        if out[i] <= out[i - 1]:
            out[i] = np.nextafter(out[i - 1], np.inf)
    if out[-1] > horizon:
        out[-1] = horizon
        for i in range(out.size - 2, -1, -1):
            if out[i] >= out[i + 1]:
                out[i] = np.nextafter(out[i + 1], -np.inf)
    return out


def _sample_jumps(model: LevyModel, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    T = model.horizon
    if isinstance(model, Brownian):
        return np.empty(0), np.empty(0)
    if isinstance(model, CompensatedPoisson):
        count = int(rng.poisson(model.intensity * T))
        times = T * (1.0 - rng.random(count))  # uniform on (0, T]
        return times, np.ones(count)
    if isinstance(model, CompoundPoisson):
        count = int(rng.poisson(model.intensity * T))
        times = T * (1.0 - rng.random(count))
        sizes = np.asarray(model.jump_law.sample(rng, count), dtype=np.float64)
        keep = sizes != 0.0
        return times[keep], sizes[keep]
    if isinstance(model, GammaSubordinator):
        return _sample_gamma_jumps(model, rng)
    raise ValueError(f"unsupported model {model!r}")


def _sample_gamma_jumps(model: GammaSubordinator,
                        rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    # Thinning against the envelope  1/x on (cutoff, 1]  +  exp(-x) on (1, oo),
    # both of which dominate exp(-x)/x on their range.
    eps = model.cutoff
    T = model.horizon
    mass_low = math.log(1.0 / eps)
    mass_high = math.exp(-1.0)
    count = int(rng.poisson((mass_low + mass_high) * T))
    times = T * (1.0 - rng.random(count))
    u_branch = rng.random(count)
    u_pos = rng.random(count)
    u_acc = rng.random(count)
    low = u_branch < mass_low / (mass_low + mass_high)
    x = np.empty(count)
    x[low] = eps * np.exp(u_pos[low] * mass_low)
    x[~low] = 1.0 - np.log(1.0 - u_pos[~low])
    accept = np.where(x <= 1.0, u_acc <= np.exp(-x), u_acc * x <= 1.0)
    return times[accept], x[accept]


def simulate(model: LevyModel, n_cells: int, seed: int) -> LevyPath:
    """Simulate one path on a dyadic grid of n_cells (a power of two) cells."""
    N = int(n_cells)
    if N < 1 or N & (N - 1):
        raise ValueError("cell count must be a power of two")
    if N > MAX_CELLS:
        raise ValueError(f"cell count above {MAX_CELLS}")
    rng = make_rng(seed)
    T = model.horizon

    times, sizes = _sample_jumps(model, rng)
    order = np.argsort(times, kind="stable")
    times, sizes = times[order], sizes[order]
    times = _separate_ties(times, T)

    if isinstance(model, Brownian):
        gaussian = rng.normal(0.0, model.volatility * math.sqrt(T / N), N)
        drift = model.drift
    else:
        gaussian = np.zeros(N)
        if isinstance(model, CompensatedPoisson):
            drift = -model.intensity
        elif isinstance(model, CompoundPoisson) and model.compensated:
            drift = -model.intensity * model.jump_law.moment(1)
        else:
            drift = 0.0

    base = drift * (T / N) + gaussian
    np.add.at(base, _cells_of_times(times, N, T), sizes)
    return LevyPath(model=model, n_cells=N, base_increments=base,
                    gaussian_part=gaussian, drift_rate=drift,
                    jump_times=times, jump_sizes=sizes)


def variation_increments(path: LevyPath, n: int) -> np.ndarray:
    """Per-cell increments of the order-n power variation of the path."""
    if n < 1:
        raise ValueError("order must be at least 1")
    if n == 1:
        return path.base_increments.copy()
    out = np.zeros(path.n_cells)
    if path.jump_times.size:
        np.add.at(out, path.jump_cells, path.jump_sizes ** n)
    if n == 2 and path.diffusion_variance:
        out += path.diffusion_variance * path.cell_width
    return out


def teugels_increments(path: LevyPath, n: int, table: MomentTable) -> np.ndarray:
    """Centred power-variation increments: variation minus K_n * cell width."""
    return variation_increments(path, n) - table.k(n) * path.cell_width


def coarsen(path: LevyPath, n_cells: int) -> LevyPath:
    """The same path on a coarser dyadic grid (cells merged pairwise)."""
    N = int(n_cells)
    if N < 1 or N & (N - 1) or N > path.n_cells or path.n_cells % N:
        raise ValueError("target cell count must be a power of two dividing the grid")
    step = path.n_cells // N
    return LevyPath(model=path.model, n_cells=N,
                    base_increments=path.base_increments.reshape(N, step).sum(axis=1),
                    gaussian_part=path.gaussian_part.reshape(N, step).sum(axis=1),
                    drift_rate=path.drift_rate,
                    jump_times=path.jump_times, jump_sizes=path.jump_sizes)


# --------------------------------------------------------------------------
# debug dump format: one record per line, exact decimal round-trip


def dump_path(path: LevyPath, stream: TextIO) -> None:
    """Write `cell,<increment>` lines then `jump,<time>,<size>` lines."""
    for v in path.base_increments:
        stream.write(f"cell,{float(v)!r}\n")
    for t, s in zip(path.jump_times, path.jump_sizes):
        stream.write(f"jump,{float(t)!r},{float(s)!r}\n")


def load_path_dump(stream: TextIO) -> tuple[np.ndarray, list[tuple[float, float]]]:
    """Parse a dump back into (cell increments, jump list)."""
    cells: list[float] = []
    jumps: list[tuple[float, float]] = []
    for lineno, line in enumerate(stream, start=1):
        line = line.strip()
        if not line:
            continue
        parts = line.split(",")
        if parts[0] == "cell" and len(parts) == 2:
            cells.append(float(parts[1]))
        elif parts[0] == "jump" and len(parts) == 3:
            jumps.append((float(parts[1]), float(parts[2])))
        else:
            raise ValueError(f"unrecognised record on line {lineno}: {line!r}")
    return np.asarray(cells), jumps

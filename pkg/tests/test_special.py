"""Model-specific shortcuts: Brownian traces, Poisson patterns, jump tuples."""

import itertools
import math

import numpy as np
import pytest

from stratolevy.integrals import (GridFunction, hu_meyer_evaluate,
                                  ito_integral, stratonovich_integral,
                                  symmetrize)
from stratolevy.levy import (Brownian, CompensatedPoisson, CompoundPoisson,
                             ExponentialJumps, GammaSubordinator, simulate)
from stratolevy.measures import AtomFamily
from stratolevy.special import (JumpMeasure, brownian_atoms, brownian_hu_meyer,
                                brownian_trace, hu_meyer_brownian_coefficient,
                                jump_measure_hu_meyer, jump_measure_ito,
                                jump_measure_stratonovich, poisson_reduce,
                                poisson_pattern_integral,
                                truncation_bias_bound)


@pytest.fixture
def rng():
    return np.random.default_rng(909)


# -- Brownian ----------------------------------------------------------------

def test_brownian_coefficients():
    table = {(1, 0): 1, (2, 0): 1, (2, 1): 1, (3, 0): 1, (3, 1): 3,
             (4, 0): 1, (4, 1): 6, (4, 2): 3, (6, 3): 15}
    for (n, j), expected in table.items():
        assert hu_meyer_brownian_coefficient(n, j) == expected
    # independent counting: choose the 2j paired slots, then match them up
    for n in range(0, 8):
        for j in range(0, n // 2 + 1):
            matchings = math.comb(n, 2 * j) * math.factorial(2 * j) \
                // (math.factorial(j) * 2 ** j)
            assert hu_meyer_brownian_coefficient(n, j) == matchings
    with pytest.raises(ValueError):
        hu_meyer_brownian_coefficient(2, 2)
    with pytest.raises(ValueError):
        hu_meyer_brownian_coefficient(3, -1)


def test_brownian_trace_identity_and_scalar(rng):
    N, T = 8, 2.0
    g = rng.uniform(-1, 1, size=N)
    f2 = GridFunction.from_factors([g, g], N, horizon=T, symmetric=True)
    assert brownian_trace(f2, 0) is f2
    # full contraction of a rank-one square: (T/N) * sum g^2
    got = brownian_trace(f2, 1)
    assert isinstance(got, float)
    assert got == pytest.approx((T / N) * (g * g).sum(), rel=1e-12)


def test_brownian_trace_matches_naive_contraction(rng):
    N, T = 5, 1.0
    dense = rng.uniform(-1, 1, size=(N,) * 4)
    f = symmetrize(GridFunction.from_dense(dense, horizon=T))
    w = rng.uniform(0.1, 1.0, size=N)
    got = brownian_trace(f, 1, weights=w)
    arr = f.dense()
    expected = np.einsum("abtt,t->ab", arr, w)
    np.testing.assert_allclose(got.dense(), expected, rtol=1e-12)
    # double contraction ends at a scalar
    got2 = brownian_trace(f, 2, weights=w)
    expected2 = float(np.einsum("sstt,s,t->", arr, w, w))
    assert got2 == pytest.approx(expected2, rel=1e-12)


def test_brownian_trace_factored_agrees_with_dense(rng):
    N, T = 6, 1.5
    gs = rng.uniform(-1, 1, size=(4, N))
    base = GridFunction.from_factors(list(gs), N, horizon=T)
    w = rng.uniform(0.1, 1.0, size=N)
    ff = GridFunction(4, N, T, factors=base.factors)
    fd = GridFunction.from_dense(base.dense(), horizon=T)
    a = brownian_trace(ff, 1, weights=w)
    b = brownian_trace(fd, 1, weights=w)
    np.testing.assert_allclose(a.dense(), b.dense(), rtol=1e-12)


def test_brownian_trace_validation(rng):
    f = GridFunction.from_dense(rng.uniform(size=(4, 4)))
    with pytest.raises(ValueError):
        brownian_trace(f, 2)  # 2j > n
    with pytest.raises(ValueError):
        brownian_trace(f, -1)
    with pytest.raises(ValueError):
        brownian_trace(f, 1, weights=np.ones(3))
    asym = GridFunction.from_dense(rng.uniform(size=(4, 4)), symmetric=False)
    with pytest.raises(ValueError):
        brownian_trace(asym, 1)


def test_brownian_atom_families():
    path = simulate(Brownian(volatility=0.5), 32, 17)
    leb = brownian_atoms(path, "lebesgue")
    np.testing.assert_array_equal(leb.atoms(1), path.base_increments)
    np.testing.assert_allclose(leb.atoms(2), np.full(32, 0.25 / 32))
    assert np.all(leb.atoms(3) == 0)
    sq = brownian_atoms(path, "squared")
    np.testing.assert_allclose(sq.atoms(2), path.base_increments ** 2)
    with pytest.raises(ValueError):
        brownian_atoms(path, "cubed")
    with pytest.raises(ValueError):
        brownian_atoms(simulate(CompensatedPoisson(), 8, 1))


def test_lebesgue_family_kills_high_order_blocks(rng):
    # any slot of order >= 3 annihilates the integral under the limit family
    path = simulate(Brownian(), 16, 23)
    fam = brownian_atoms(path, "lebesgue")
    f = GridFunction.from_dense(rng.uniform(size=(16, 16)))
    assert ito_integral(f, (1, 3), fam) == 0.0
    assert ito_integral(f, (4, 2), fam) == 0.0


def test_brownian_hu_meyer_constant_two(rng):
    path = simulate(Brownian(volatility=0.7, horizon=2.0), 64, 5)
    f = GridFunction.constant(1.0, 2, 64, horizon=2.0)
    got = brownian_hu_meyer(f, path)
    dw = path.base_increments
    expected = dw.sum() ** 2 - (dw * dw).sum() + 0.49 * 2.0
    assert got == pytest.approx(expected, rel=1e-12)


def test_brownian_hu_meyer_squared_weights_are_exact(rng):
    # with squared-increment pair weights the trace form IS the discrete
    # decomposition for n = 2, so it must match the product integral exactly
    path = simulate(Brownian(volatility=1.3), 32, 29)
    f = symmetrize(GridFunction.from_dense(rng.uniform(-1, 1, size=(32, 32))))
    got = brownian_hu_meyer(f, path, order_two="squared")
    fam = AtomFamily.multiplicative(path.base_increments)
    assert got == pytest.approx(stratonovich_integral(f, fam), rel=1e-11)
    assert got == pytest.approx(hu_meyer_evaluate(f, fam), rel=1e-11)


def test_brownian_hu_meyer_validation(rng):
    path = simulate(Brownian(), 16, 3)
    f = GridFunction.from_dense(rng.uniform(size=(16, 16)))
    with pytest.raises(ValueError):
        brownian_hu_meyer(f, path)  # symmetry flag not set
    sym = symmetrize(f)
    with pytest.raises(ValueError):
        brownian_hu_meyer(sym, simulate(CompensatedPoisson(), 16, 3))
    with pytest.raises(ValueError):
        brownian_hu_meyer(sym, path, order_two="other")


# -- compensated Poisson ------------------------------------------------------

def test_poisson_reduce_patterns():
    assert poisson_reduce((1, 1)) == [(1, ("dX", "dX"))]
    assert poisson_reduce((2,)) == [(1, ("dX",)), (1, ("dt",))]
    got = poisson_reduce((2, 3))
    assert len(got) == 4
    assert {p for _, p in got} == {("dX", "dX"), ("dX", "dt"),
                                   ("dt", "dX"), ("dt", "dt")}
    assert all(c == 1 for c, _ in got)
    assert len(poisson_reduce((2, 1, 4))) == 4
    with pytest.raises(ValueError):
        poisson_reduce((0, 1))


def test_poisson_pattern_sum_equals_variation_integral(rng):
    # counts = raw increments + compensator, exactly, cell by cell; summing
    # the dX/dt patterns must therefore reproduce the variation-atom integral
    path = simulate(CompensatedPoisson(intensity=3.0), 64, 41)
    fam = AtomFamily.from_path(path, max_order=3)
    for orders in [(2,), (1, 2), (2, 2), (1, 3), (2, 1, 2)]:
        n = len(orders)
        f = GridFunction.from_factors(
            list(rng.uniform(-1, 1, size=(n, 64))), 64)
        direct = ito_integral(f, orders, fam)
        expanded = sum(c * poisson_pattern_integral(f, pattern, path)
                       for c, pattern in poisson_reduce(orders))
        assert expanded == pytest.approx(direct, rel=1e-10, abs=1e-13)


def test_poisson_pattern_validation(rng):
    path = simulate(CompensatedPoisson(), 8, 2)
    f = GridFunction.from_dense(rng.uniform(size=(8, 8)))
    with pytest.raises(ValueError):
        poisson_pattern_integral(f, ("dX",), path)
    with pytest.raises(ValueError):
        poisson_pattern_integral(f, ("dX", "bogus"), path)
    with pytest.raises(ValueError):
        poisson_pattern_integral(f, ("dX", "dX"), simulate(Brownian(), 8, 2))


# -- jump measures -------------------------------------------------------------

def test_jump_measure_validation():
    with pytest.raises(ValueError):
        JumpMeasure(np.array([0.0, 0.5]), np.array([1.0, 1.0]), 1.0)
    with pytest.raises(ValueError):
        JumpMeasure(np.array([0.5, 1.5]), np.array([1.0, 1.0]), 1.0)
    with pytest.raises(ValueError):
        JumpMeasure(np.array([0.5, 0.5]), np.array([1.0, 1.0]), 1.0)
    with pytest.raises(ValueError):
        JumpMeasure(np.array([0.3, 0.5]), np.array([1.0, 0.0]), 1.0)
    with pytest.raises(ValueError):
        JumpMeasure(np.array([0.3, 0.5]), np.array([1.0]), 1.0)
    jm = JumpMeasure(np.array([0.25, 0.75]), np.array([1.0, -2.0]), 1.0)
    assert jm.n_jumps == 2
    assert jm.total_mass == pytest.approx(3.0)
    with pytest.raises(ValueError):
        jm.times[0] = 0.1


def test_jump_measure_from_path():
    path = simulate(CompoundPoisson(intensity=4.0,
                                    jump_law=ExponentialJumps(1.0)), 32, 19)
    jm = JumpMeasure.from_path(path)
    np.testing.assert_array_equal(jm.times, path.jump_times)
    np.testing.assert_array_equal(jm.sizes, path.jump_sizes)
    assert jm.horizon == path.horizon


def test_jump_measure_ito_small_cases():
    empty = JumpMeasure(np.empty(0), np.empty(0), 1.0)
    assert jump_measure_ito(lambda s, t: 1.0, (1, 1), empty) == 0.0
    one = JumpMeasure(np.array([0.5]), np.array([2.0]), 1.0)
    # fewer jumps than slots: no distinct tuples at all
    assert jump_measure_ito(lambda s, t: 1.0, (1, 1), one) == 0.0
    assert jump_measure_ito(lambda s: s, (3,), one) == pytest.approx(0.5 * 8.0)


def test_single_jump_stratonovich():
    t_star, c = 0.6, 1.7
    jm = JumpMeasure(np.array([t_star]), np.array([c]), 1.0)
    f = lambda x, y, z: x * y + z
    expected = f(t_star, t_star, t_star) * c ** 3
    assert jump_measure_stratonovich(f, jm, n=3) == pytest.approx(expected)
    with pytest.raises(ValueError):
        jump_measure_stratonovich(f, jm)  # bare callable needs the arity


def test_jump_stratonovich_factorizes(rng):
    path = simulate(CompoundPoisson(intensity=5.0,
                                    jump_law=ExponentialJumps(0.6)), 64, 59)
    jm = JumpMeasure.from_path(path)
    funcs = [lambda t: 1.0 + t, lambda t: math.exp(-t)]
    f = GridFunction.from_factors(funcs, 64)
    expected = np.prod([
        sum(g(t) * s for t, s in zip(jm.times, jm.sizes)) for g in funcs])
    assert jump_measure_stratonovich(f, jm) == pytest.approx(expected, rel=1e-12)


def test_jump_ito_fast_path_matches_brute(rng):
    path = simulate(CompoundPoisson(intensity=6.0,
                                    jump_law=ExponentialJumps(0.8)), 128, 67)
    jm = JumpMeasure.from_path(path)
    assert jm.n_jumps >= 3
    funcs = [lambda t: 1.0 + t, lambda t: math.exp(-t), lambda t: t * t]
    f = GridFunction.from_factors(funcs, 128)
    orders = (1, 2, 1)
    got = jump_measure_ito(f, orders, jm)
    brute = 0.0
    for idx in itertools.permutations(range(jm.n_jumps), 3):
        w = 1.0
        for k, i in enumerate(idx):
            w *= funcs[k](jm.times[i]) * jm.sizes[i] ** orders[k]
        brute += w
    assert got == pytest.approx(brute, rel=1e-10)


def test_pathwise_hu_meyer_identity(rng):
    # finite jump algebra: the decomposition equals the product sum exactly
    for model in (CompoundPoisson(intensity=4.0, jump_law=ExponentialJumps(1.0)),
                  GammaSubordinator(cutoff=1e-2)):
        for seed in (3, 11):
            jm = JumpMeasure.from_path(simulate(model, 256, seed))
            if jm.n_jumps == 0:
                continue
            funcs = [lambda t: 1.0 / (1.0 + t), lambda t: t,
                     lambda t: math.cos(t)]
            for n in (2, 3):
                f = GridFunction.from_factors(funcs[:n], 256)
                lhs = jump_measure_hu_meyer(f, jm)
                rhs = jump_measure_stratonovich(f, jm)
                assert lhs == pytest.approx(rhs, rel=1e-10)
            bare = lambda s, t: s * t + 1.0
            assert jump_measure_hu_meyer(bare, jm, n=2) == pytest.approx(
                jump_measure_stratonovich(bare, jm, n=2), rel=1e-10)


def test_pathwise_cap_and_arity_checks(rng):
    jm = JumpMeasure(np.array([0.5]), np.array([1.0]), 1.0)
    with pytest.raises(ValueError):
        jump_measure_hu_meyer(lambda *ts: 1.0, jm, n=8)
    with pytest.raises(ValueError):
        jump_measure_hu_meyer(lambda *ts: 1.0, jm)
    f = GridFunction.from_factors([np.ones(4), np.ones(4)], 4)
    with pytest.raises(ValueError):
        jump_measure_ito(f, (1,), jm)
    with pytest.raises(ValueError):
        jump_measure_ito(f, (), jm)


def test_truncation_bias_bound():
    assert truncation_bias_bound(0.01, 3, 2.0, 5.0) == pytest.approx(
        0.01 * 3 * 2.0 * 25.0)
    assert truncation_bias_bound(0.0, 2, 1.0, 1.0) == 0.0
    with pytest.raises(ValueError):
        truncation_bias_bound(-0.1, 2, 1.0, 1.0)
    with pytest.raises(ValueError):
        truncation_bias_bound(0.1, 0, 1.0, 1.0)

"""Random-measure layer: atom families, product/Ito measures, refinements."""

import itertools

import numpy as np
import pytest

from stratolevy.diagonals import CellRectangle, kernel_partition
from stratolevy.levy import (CompensatedPoisson, CompoundPoisson,
                             ExponentialJumps, simulate, variation_increments)
from stratolevy.measures import (ENUMERATION_BUDGET, AtomFamily, DiagonalSpec,
                                 collapse_block_atoms,
                                 diagonal_measure_refinement, ito_measure,
                                 ito_measure_mobius_fast,
                                 mixed_variation_refinement,
                                 mobius_recover_ito, product_measure,
                                 product_measure_block_fast)
from stratolevy.partitions import (Partition, enumerate_partitions,
                                   is_refinement, zero_partition)


def brute_measure(atoms, orders, spec, exact):
    """Independent enumeration oracle straight from the definitions."""
    total = 0.0
    for t in itertools.product(range(1, atoms.n_cells + 1), repeat=spec.n):
        ker = kernel_partition(t)
        if exact:
            if ker != spec.base:
                continue
        elif not is_refinement(spec.base, ker):
            continue
        if spec.predicate is not None and not spec.predicate(t):
            continue
        if spec.rectangle is not None and not spec.rectangle.contains(t):
            continue
        w = 1.0
        for k, r in enumerate(orders):
            w *= atoms.atoms(r)[t[k] - 1]
        total += w
    return total


@pytest.fixture
def rng():
    return np.random.default_rng(515)


def test_multiplicative_family_powers(rng):
    base = rng.uniform(-1, 1, size=6)
    fam = AtomFamily.multiplicative(base)
    assert fam.is_multiplicative
    np.testing.assert_array_equal(fam.atoms(1), base)
    np.testing.assert_allclose(fam.atoms(3), base ** 3)
    np.testing.assert_array_equal(fam.base, base)
    with pytest.raises(ValueError):
        fam.atoms(0)


def test_explicit_family_orders(rng):
    a1, a2 = rng.uniform(-1, 1, size=(2, 5))
    fam = AtomFamily.from_orders({1: a1, 2: a2})
    assert not fam.is_multiplicative
    assert fam.registered_orders == (1, 2)
    np.testing.assert_array_equal(fam.atoms(2), a2)
    with pytest.raises(ValueError):
        fam.atoms(3)  # unregistered order
    with pytest.raises(ValueError):
        fam.base
    with pytest.raises(ValueError):
        AtomFamily.from_orders({})
    with pytest.raises(ValueError):
        AtomFamily.from_orders({0: a1})
    with pytest.raises(ValueError):
        AtomFamily(5, orders={1: a1}, base=a1)
    with pytest.raises(ValueError):
        AtomFamily(5)


def test_variation_family_from_path():
    path = simulate(CompoundPoisson(intensity=3.0), 16, 77)
    fam = AtomFamily.from_path(path, max_order=3)
    for r in (1, 2, 3):
        np.testing.assert_array_equal(fam.atoms(r), variation_increments(path, r))
    with pytest.raises(ValueError):
        fam.atoms(4)
    with pytest.raises(ValueError):
        AtomFamily.from_path(path, max_order=0)


def test_diagonal_spec_validation():
    with pytest.raises(ValueError):
        DiagonalSpec(3, zero_partition(2))
    with pytest.raises(ValueError):
        DiagonalSpec(2, zero_partition(2), predicate=lambda t: True,
                     rectangle=CellRectangle.cube(2, 3))
    with pytest.raises(ValueError):
        DiagonalSpec(2, zero_partition(2), rectangle=CellRectangle.cube(3, 3))


def test_measures_match_brute_force(rng):
    width = 4
    fam = AtomFamily.multiplicative(rng.uniform(-1, 1, size=width))
    mixed = AtomFamily.from_orders(
        {r: rng.uniform(-1, 1, size=width) for r in (1, 2, 3)})
    for family in (fam, mixed):
        for n in (1, 2, 3):
            orders = tuple(int(r) for r in rng.integers(1, 4, size=n))
            for base in enumerate_partitions(n):
                spec = DiagonalSpec(n, base)
                assert product_measure(family, orders, spec) == pytest.approx(
                    brute_measure(family, orders, spec, exact=False), rel=1e-11, abs=1e-13)
                assert ito_measure(family, orders, spec) == pytest.approx(
                    brute_measure(family, orders, spec, exact=True), rel=1e-11, abs=1e-13)


def test_measures_respect_rectangles_and_predicates(rng):
    width = 4
    fam = AtomFamily.multiplicative(rng.uniform(0.2, 1, size=width))
    rect = CellRectangle((frozenset({1, 2, 4}), frozenset({2, 3})))
    spec_r = DiagonalSpec.over_rectangle(rect)
    orders = (1, 2)
    assert product_measure(fam, orders, spec_r) == pytest.approx(
        brute_measure(fam, orders, spec_r, exact=False), rel=1e-12)
    assert ito_measure(fam, orders, spec_r) == pytest.approx(
        brute_measure(fam, orders, spec_r, exact=True), rel=1e-12)
    # upper-triangle predicate
    spec_p = DiagonalSpec.over_predicate(2, lambda t: t[0] < t[1])
    assert product_measure(fam, orders, spec_p) == pytest.approx(
        brute_measure(fam, orders, spec_p, exact=False), rel=1e-12)
    assert ito_measure(fam, orders, spec_p) == pytest.approx(
        brute_measure(fam, orders, spec_p, exact=True), rel=1e-12)
    # empty rectangle kills the sum outright
    empty = DiagonalSpec.over_rectangle(CellRectangle.empty(2))
    assert product_measure(fam, orders, empty) == 0.0
    assert ito_measure(fam, orders, empty) == 0.0
    # rectangle referencing cells off the grid is rejected
    off = DiagonalSpec.over_rectangle(CellRectangle((frozenset({9}), frozenset({1}))))
    with pytest.raises(ValueError):
        product_measure(fam, orders, off)


def test_ito_vanishes_without_enough_cells(rng):
    fam = AtomFamily.multiplicative(rng.uniform(-1, 1, size=2))
    assert ito_measure(fam, (1, 1, 1), DiagonalSpec.full(3)) == 0.0


def test_mobius_inversion_recovers_ito(rng):
    width = 3
    fam = AtomFamily.from_orders(
        {r: rng.uniform(-1, 1, size=width) for r in (1, 2, 3)})
    for n in (1, 2, 3):
        orders = tuple(int(r) for r in rng.integers(1, 4, size=n))
        for base in enumerate_partitions(n):
            spec = DiagonalSpec(n, base)
            assert mobius_recover_ito(fam, orders, spec) == pytest.approx(
                ito_measure(fam, orders, spec), rel=1e-11, abs=1e-13)


def test_fast_forms_match_enumeration(rng):
    width = 5
    fam = AtomFamily.multiplicative(rng.uniform(-1, 1, size=width))
    rect = CellRectangle((frozenset({1, 2, 3}), frozenset({2, 4, 5}), frozenset({1, 5})))
    for n in (2, 3):
        orders = tuple(int(r) for r in rng.integers(1, 3, size=n))
        use_rect = rect if n == 3 else None
        for base in enumerate_partitions(n):
            spec = DiagonalSpec(n, base, rectangle=use_rect)
            assert product_measure_block_fast(fam, orders, base, use_rect) == \
                pytest.approx(product_measure(fam, orders, spec), rel=1e-11, abs=1e-13)
            assert ito_measure_mobius_fast(fam, orders, base, use_rect) == \
                pytest.approx(ito_measure(fam, orders, spec), rel=1e-11, abs=1e-13)


def test_collapse_block_atoms_multiplicative(rng):
    fam = AtomFamily.multiplicative(rng.uniform(0.5, 1.5, size=6))
    sigma = Partition(4, [[1, 3], [2], [4]])
    pairs = collapse_block_atoms(fam, (1, 2, 2, 1), sigma)
    assert [r for r, _ in pairs] == [3, 2, 1]
    for r, arr in pairs:
        np.testing.assert_allclose(arr, fam.atoms(r), rtol=1e-12)


def test_collapse_block_atoms_positional(rng):
    arrays = {r: rng.uniform(-1, 1, size=4) for r in (1, 2)}
    fam = AtomFamily.from_orders(arrays)
    sigma = Partition(3, [[1, 3], [2]])
    pairs = collapse_block_atoms(fam, (1, 2, 1), sigma)
    # both blocks have total order 2 but carry different atom vectors
    assert [r for r, _ in pairs] == [2, 2]
    np.testing.assert_allclose(pairs[0][1], arrays[1] * arrays[1])
    np.testing.assert_array_equal(pairs[1][1], arrays[2])
    with pytest.raises(ValueError):
        collapse_block_atoms(fam, (1, 2), sigma)


def test_enumeration_budget_guard():
    fam = AtomFamily.multiplicative(np.ones(100_000))
    with pytest.raises(ValueError):
        product_measure(fam, (1, 1), DiagonalSpec.full(2))
    assert 100_000 ** 2 > ENUMERATION_BUDGET


def test_diagonal_refinement_converges_to_variation():
    path = simulate(CompoundPoisson(intensity=3.0), 4096, 21)
    for n in (2, 3):
        values, reference = diagonal_measure_refinement(path, n, None, list(range(13)))
        assert reference == pytest.approx(
            float(variation_increments(path, n).sum()), rel=1e-12)
        errors = [abs(v - reference) for v in values]
        assert errors[-1] <= errors[0] / 4
        # at the finest level the grid cells are the path cells: exact match
        assert values[-1] == pytest.approx(
            float((path.base_increments ** n).sum()), rel=1e-12)


def test_diagonal_refinement_order_one_telescopes():
    path = simulate(CompoundPoisson(intensity=2.0), 64, 9)
    values, reference = diagonal_measure_refinement(path, 1, None, [0, 3, 6])
    for v in values:
        assert v == pytest.approx(reference, rel=1e-12)


def test_diagonal_refinement_cell_restriction():
    path = simulate(CompoundPoisson(intensity=5.0), 32, 13)
    cells = range(1, 17)  # left half of the horizon
    values, reference = diagonal_measure_refinement(path, 2, cells, [5])
    mask = np.zeros(32)
    mask[:16] = 1
    assert values[0] == pytest.approx(float(((path.base_increments * mask) ** 2).sum()))
    assert reference == pytest.approx(float((variation_increments(path, 2) * mask).sum()))
    with pytest.raises(ValueError):
        diagonal_measure_refinement(path, 2, [0], [5])
    with pytest.raises(ValueError):
        diagonal_measure_refinement(path, 2, [40], [5])


def test_diagonal_refinement_level_validation():
    path = simulate(CompoundPoisson(intensity=1.0), 16, 2)
    with pytest.raises(ValueError):
        diagonal_measure_refinement(path, 2, None, [])
    with pytest.raises(ValueError):
        diagonal_measure_refinement(path, 2, None, [3, 3])
    with pytest.raises(ValueError):
        diagonal_measure_refinement(path, 2, None, [-1, 2])
    with pytest.raises(ValueError):
        diagonal_measure_refinement(path, 2, None, [2, 5])
    with pytest.raises(ValueError):
        diagonal_measure_refinement(path, 0, None, [2])


def test_mixed_variation_refinement():
    model = CompoundPoisson(intensity=3.0, jump_law=ExponentialJumps(1.0))
    path = simulate(model, 4096, 33)
    # isolated jumps at maximum depth make the product sum exact
    assert len(np.unique(path.jump_cells)) == path.jump_times.size
    values, reference = mixed_variation_refinement(path, (1, 2), list(range(13)))
    assert reference == pytest.approx(float(variation_increments(path, 3).sum()))
    assert values[-1] == pytest.approx(reference, rel=1e-12)
    assert abs(values[-1] - reference) <= abs(values[0] - reference)
    with pytest.raises(ValueError):
        mixed_variation_refinement(path, (), [2])
    with pytest.raises(ValueError):
        mixed_variation_refinement(path, (1, 0), [2])
    with pytest.raises(ValueError):
        mixed_variation_refinement(path, (1, 2), [2, 1])

"""Tuple-enumeration kernels: backend parity and brute-force checks."""

import itertools

import numpy as np
import pytest

from stratolevy.diagonals import kernel_partition
from stratolevy.partitions import Partition, is_refinement
from stratolevy._kernels import (BACKEND, pyref, weighted_sum_all,
                                 weighted_sum_distinct, weighted_sum_kernel)

if BACKEND == "cython":
    from stratolevy._kernels import _core
else:
    _core = None


def brute(f, atoms, keep):
    n, width = atoms.shape
    total = 0.0
    for t in itertools.product(range(width), repeat=n):
        if not keep(t):
            continue
        w = np.prod([atoms[k, t[k]] for k in range(n)])
        if f is not None:
            flat = 0
            for v in t:
                flat = flat * width + v
            w *= f[flat]
        total += w
    return total


@pytest.fixture
def rng():
    return np.random.default_rng(4021)


def test_backend_identifier():
    assert BACKEND in ("cython", "python")


def test_weighted_sum_all_factorizes(rng):
    for n in (1, 2, 3, 4):
        atoms = rng.uniform(-1, 1, size=(n, 5))
        got = weighted_sum_all(None, atoms)
        assert got == pytest.approx(np.prod(atoms.sum(axis=1)), rel=1e-13)


def test_weighted_sum_all_matches_brute(rng):
    for n, width in [(1, 4), (2, 4), (3, 3)]:
        atoms = rng.uniform(-1, 1, size=(n, width))
        f = rng.uniform(-1, 1, size=width ** n)
        assert weighted_sum_all(f, atoms) == pytest.approx(
            brute(f, atoms, lambda t: True), rel=1e-12)


def test_weighted_sum_distinct_matches_brute(rng):
    for n, width in [(1, 4), (2, 4), (3, 4), (4, 5)]:
        atoms = rng.uniform(-1, 1, size=(n, width))
        f = rng.uniform(-1, 1, size=width ** n)
        keep = lambda t: len(set(t)) == len(t)
        assert weighted_sum_distinct(f, atoms) == pytest.approx(
            brute(f, atoms, keep), rel=1e-12)
        assert weighted_sum_distinct(None, atoms) == pytest.approx(
            brute(None, atoms, keep), rel=1e-12)


def test_distinct_vanishes_when_arity_exceeds_width(rng):
    atoms = rng.uniform(-1, 1, size=(4, 3))
    assert weighted_sum_distinct(None, atoms) == 0.0


def test_weighted_sum_kernel_matches_brute(rng):
    cases = [
        ((0, 0), False), ((0, 0), True),
        ((0, 1), False), ((0, 1), True),
        ((0, 1, 0), False), ((0, 1, 0), True),
        ((0, 0, 0), True), ((0, 1, 2), True),
        ((0, 1, 1, 0), False), ((0, 1, 1, 0), True),
    ]
    for labels, exact in cases:
        n = len(labels)
        width = 4
        base = Partition.from_rgs(labels)
        atoms = rng.uniform(-1, 1, size=(n, width))
        f = rng.uniform(-1, 1, size=width ** n)

        def keep(t):
            ker = kernel_partition(tuple(v + 1 for v in t))
            return ker == base if exact else is_refinement(base, ker)

        got = weighted_sum_kernel(f, atoms, np.array(labels), exact)
        assert got == pytest.approx(brute(f, atoms, keep), rel=1e-12)


def test_kernel_sums_tile_the_cube(rng):
    # summing the exact-kernel sums over every base partition recovers the
    # unrestricted sum: the diagonals partition the cube
    from stratolevy.partitions import enumerate_partitions

    n, width = 3, 4
    atoms = rng.uniform(-1, 1, size=(n, width))
    f = rng.uniform(-1, 1, size=width ** n)
    total = sum(
        weighted_sum_kernel(f, atoms, np.array(sigma.rgs), True)
        for sigma in enumerate_partitions(n)
    )
    assert total == pytest.approx(weighted_sum_all(f, atoms), rel=1e-12)


def test_input_validation(rng):
    atoms = rng.uniform(-1, 1, size=(2, 3))
    with pytest.raises(ValueError):
        weighted_sum_all(None, np.zeros(3))  # not 2-d
    with pytest.raises(ValueError):
        weighted_sum_all(np.zeros(5), atoms)  # wrong tensor size
    with pytest.raises(ValueError):
        weighted_sum_kernel(None, atoms, np.array([0]), False)  # short labels


@pytest.mark.skipif(BACKEND != "cython", reason="compiled backend unavailable")
def test_compiled_matches_reference_bit_for_bit(rng):
    # identical traversal and accumulation order: results are equal, not
    # merely close
    for n, width in [(1, 5), (2, 4), (3, 4), (4, 3)]:
        atoms = np.ascontiguousarray(rng.uniform(-1, 1, size=(n, width)))
        f = np.ascontiguousarray(rng.uniform(-1, 1, size=width ** n))
        assert _core.weighted_sum_all(f, atoms) == pyref.weighted_sum_all(f, atoms)
        assert _core.weighted_sum_distinct(f, atoms) == pyref.weighted_sum_distinct(f, atoms)
        labels = np.zeros(n, dtype=np.intp)
        labels[1::2] = 1 if n > 1 else 0
        for exact in (False, True):
            assert _core.weighted_sum_kernel(f, atoms, labels, exact) == \
                pyref.weighted_sum_kernel(f, atoms, labels, exact)


@pytest.mark.skipif(BACKEND != "cython", reason="compiled backend unavailable")
def test_compiled_arity_and_label_guards(rng):
    atoms = np.ascontiguousarray(np.ones((17, 2)))
    f = None
    with pytest.raises(ValueError):
        _core.weighted_sum_all(f, atoms)
    bad = np.array([0, 5], dtype=np.intp)
    with pytest.raises(ValueError):
        _core.weighted_sum_kernel(None, np.ascontiguousarray(np.ones((2, 3))), bad, False)

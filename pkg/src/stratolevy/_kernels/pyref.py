"""Reference implementations of the tuple-enumeration kernels.

Everything here walks {0..N-1}^n explicitly with itertools; the compiled
backend in _core.pyx mirrors these semantics loop for loop. Keep the two
in sync: the test suite asserts they agree to the last bit pattern of the
summation order (same traversal, same accumulate order).

Conventions shared with the compiled backend:
  * `atoms` is a (n, N) float64 array; slot k contributes atoms[k, t_k].
  * `f` is either None (constant 1) or the C-order flattening of an
    (N,)*n tensor, indexed by t_0*N^(n-1) + ... + t_{n-1}.
  * `labels` is a length-n block-label vector (restricted-growth string)
    describing the base partition for the kernel-restricted sums.
"""

import itertools


def weighted_sum_all(f, atoms):
    """Sum of f(t) * prod_k atoms[k, t_k] over every tuple t."""
    n, width = atoms.shape
    total = 0.0
    for t in itertools.product(range(width), repeat=n):
        w = 1.0
        flat = 0
        for k in range(n):
            w *= atoms[k, t[k]]
            flat = flat * width + t[k]
        if f is not None:
            w *= f[flat]
        total += w
    return total


def weighted_sum_distinct(f, atoms):
    """Same as weighted_sum_all but only over tuples with pairwise-distinct entries."""
    n, width = atoms.shape
    total = 0.0
    for t in itertools.permutations(range(width), n):
        w = 1.0
        flat = 0
        for k in range(n):
            w *= atoms[k, t[k]]
            flat = flat * width + t[k]
        if f is not None:
            w *= f[flat]
        total += w
    return total


def weighted_sum_kernel(f, atoms, labels, exact):
    """Sum restricted by the kernel partition of the tuple.

    With exact=False the tuple only has to be constant on each block of
    `labels` (its kernel refines into the base partition); with exact=True
    distinct blocks must additionally take distinct values, i.e. the kernel
    partition equals the base partition.
    """
    n, width = atoms.shape
    rep = [0] * n
    first = {}
    for i, lab in enumerate(labels):
        if lab not in first:
            first[lab] = i
        rep[i] = first[lab]
    block_heads = sorted(first.values())
    total = 0.0
    for t in itertools.product(range(width), repeat=n):
        ok = True
        for i in range(n):
            if t[i] != t[rep[i]]:
                ok = False
                break
        if ok and exact:
            for a in range(len(block_heads)):
                for b in range(a + 1, len(block_heads)):
                    if t[block_heads[a]] == t[block_heads[b]]:
                        ok = False
                        break
                if not ok:
                    break
        if not ok:
            continue
        w = 1.0
        flat = 0
        for k in range(n):
            w *= atoms[k, t[k]]
            flat = flat * width + t[k]
        if f is not None:
            w *= f[flat]
        total += w
    return total

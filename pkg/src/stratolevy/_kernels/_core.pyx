# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled tuple-enumeration kernels.

Mirrors stratolevy._kernels.pyref exactly: same traversal order (odometer
in lexicographic order), same accumulation order, same semantics. The
wrappers in stratolevy._kernels normalise dtypes before calling in here.
"""

DEF MAX_ARITY = 16


def weighted_sum_all(f, double[:, ::1] atoms):
    cdef Py_ssize_t n = atoms.shape[0]
    cdef Py_ssize_t width = atoms.shape[1]
    cdef double[::1] fv
    cdef bint has_f = f is not None
    cdef Py_ssize_t idx[MAX_ARITY]
    cdef Py_ssize_t k, flat
    cdef double total = 0.0, w
    if n > MAX_ARITY:
        raise ValueError("tuple arity above compiled kernel limit")
    if width == 0:
        return 0.0
    if has_f:
        fv = f
    for k in range(n):
        idx[k] = 0
    while True:
        w = 1.0
        flat = 0
        for k in range(n):
            w *= atoms[k, idx[k]]
            flat = flat * width + idx[k]
        if has_f:
            w *= fv[flat]
        total += w
        k = n - 1
        while k >= 0:
            idx[k] += 1
            if idx[k] < width:
                break
            idx[k] = 0
            k -= 1
        if k < 0:
            break
    return total


def weighted_sum_distinct(f, double[:, ::1] atoms):
    cdef Py_ssize_t n = atoms.shape[0]
    cdef Py_ssize_t width = atoms.shape[1]
    cdef double[::1] fv
    cdef bint has_f = f is not None
    cdef Py_ssize_t idx[MAX_ARITY]
    cdef Py_ssize_t k, j, flat
    cdef bint distinct
    cdef double total = 0.0, w
    if n > MAX_ARITY:
        raise ValueError("tuple arity above compiled kernel limit")
    if width == 0 or n > width:
        return 0.0
    if has_f:
        fv = f
    for k in range(n):
        idx[k] = 0
    while True:
        distinct = True
        for k in range(n):
            for j in range(k + 1, n):
                if idx[k] == idx[j]:
                    distinct = False
                    break
            if not distinct:
                break
        if distinct:
            w = 1.0
            flat = 0
            for k in range(n):
                w *= atoms[k, idx[k]]
                flat = flat * width + idx[k]
            if has_f:
                w *= fv[flat]
            total += w
        k = n - 1
        while k >= 0:
            idx[k] += 1
            if idx[k] < width:
                break
            idx[k] = 0
            k -= 1
        if k < 0:
            break
    return total


def weighted_sum_kernel(f, double[:, ::1] atoms, Py_ssize_t[::1] labels, bint exact):
    cdef Py_ssize_t n = atoms.shape[0]
    cdef Py_ssize_t width = atoms.shape[1]
    cdef double[::1] fv
    cdef bint has_f = f is not None
    cdef Py_ssize_t idx[MAX_ARITY]
    cdef Py_ssize_t rep[MAX_ARITY]
    cdef Py_ssize_t heads[MAX_ARITY]
    cdef Py_ssize_t first[MAX_ARITY]
    cdef Py_ssize_t k, j, flat, lab, nblocks
    cdef bint ok
    cdef double total = 0.0, w
    if n > MAX_ARITY:
        raise ValueError("tuple arity above compiled kernel limit")
    if labels.shape[0] != n:
        raise ValueError("label vector length must match tuple arity")
    if width == 0:
        return 0.0
    if has_f:
        fv = f
    nblocks = 0
    for k in range(n):
        first[k] = -1
    for k in range(n):
        lab = labels[k]
        if lab < 0 or lab >= n:
            raise ValueError("block labels must lie in 0..n-1")
        if first[lab] < 0:
            first[lab] = k
            heads[nblocks] = k
            nblocks += 1
        rep[k] = first[lab]
    for k in range(n):
        idx[k] = 0
    while True:
        ok = True
        for k in range(n):
            if idx[k] != idx[rep[k]]:
                ok = False
                break
        if ok and exact:
            for k in range(nblocks):
                for j in range(k + 1, nblocks):
                    if idx[heads[k]] == idx[heads[j]]:
                        ok = False
                        break
                if not ok:
                    break
        if ok:
            w = 1.0
            flat = 0
            for k in range(n):
                w *= atoms[k, idx[k]]
                flat = flat * width + idx[k]
            if has_f:
                w *= fv[flat]
            total += w
        k = n - 1
        while k >= 0:
            idx[k] += 1
            if idx[k] < width:
                break
            idx[k] = 0
            k -= 1
        if k < 0:
            break
    return total

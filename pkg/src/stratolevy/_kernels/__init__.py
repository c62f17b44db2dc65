"""Backend selection for the tuple-enumeration kernels.

The compiled extension is used when it imported cleanly; otherwise the
pure-Python reference implementation takes over. Setting the environment
variable STRATOLEVY_PURE_PYTHON to a non-empty value forces the fallback,
which is handy for benchmarking and debugging.
"""

import os

import numpy as np

from . import pyref

BACKEND = "python"
_impl = pyref
if not os.environ.get("STRATOLEVY_PURE_PYTHON"):
    try:
        from . import _core as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = pyref
        BACKEND = "python"


def _normalize(f, atoms):
    atoms = np.ascontiguousarray(atoms, dtype=np.float64)
    if atoms.ndim != 2:
        raise ValueError("atoms must be a (arity, cells) array")
    if f is not None:
        f = np.ascontiguousarray(f, dtype=np.float64).reshape(-1)
        if f.size != atoms.shape[1] ** atoms.shape[0]:
            raise ValueError("flattened tensor size does not match cells**arity")
    return f, atoms


def weighted_sum_all(f, atoms):
    f, atoms = _normalize(f, atoms)
    return float(_impl.weighted_sum_all(f, atoms))


def weighted_sum_distinct(f, atoms):
    f, atoms = _normalize(f, atoms)
    return float(_impl.weighted_sum_distinct(f, atoms))


def weighted_sum_kernel(f, atoms, labels, exact):
    f, atoms = _normalize(f, atoms)
    labels = np.ascontiguousarray(labels, dtype=np.intp)
    if labels.ndim != 1 or labels.shape[0] != atoms.shape[0]:
        raise ValueError("label vector length must match tuple arity")
    return float(_impl.weighted_sum_kernel(f, atoms, labels, bool(exact)))

"""Build script for the optional compiled enumeration kernels.

The package is pure Python plus one Cython extension holding the hot
tuple-enumeration loops. If Cython or a C compiler is unavailable the
extension is skipped and the package falls back to the reference
implementation in stratolevy._kernels.pyref at import time.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("STRATOLEVY_SKIP_EXTENSION"):
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "stratolevy._kernels._core",
                    ["src/stratolevy/_kernels/_core.pyx"],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)

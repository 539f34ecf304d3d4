"""Build script for the optional compiled kernels.

The package works without the extension (a pure-Python backend is selected
at import time), so a missing Cython or C compiler only costs speed.
"""

import os

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None and not os.environ.get("NAKAMAP_SKIP_EXT"):
    ext = Extension(
        "nakamap._kernels",
        sources=["src/nakamap/_kernels.pyx"],
        # -ffp-contract=off: no fused multiply-add, so the compiled kernels
        # perform exactly the same IEEE-754 operations as the pure backend.
        extra_compile_args=["-O3", "-ffp-contract=off"],
    )
    ext_modules = cythonize([ext], language_level="3")

setup(ext_modules=ext_modules)

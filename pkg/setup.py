"""Build shim for the optional compiled DP kernel.

The package works without the extension (scheduler falls back to a numpy
implementation), so a failed compile should not block installation: build with
RELAYDIFF_REQUIRE_EXT=1 to turn a missing compiler into a hard error.
"""

import os

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "relaydiff._dp_core",
                sources=["src/relaydiff/_dp_core.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
elif os.environ.get("RELAYDIFF_REQUIRE_EXT"):
    raise RuntimeError("RELAYDIFF_REQUIRE_EXT is set but Cython is unavailable")

setup(ext_modules=ext_modules)

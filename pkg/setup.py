"""Build script: compiles the optional fast step kernel when Cython and a C
compiler are available.  The package works without it (pure-Python kernel is
selected at import time), so any build failure here degrades gracefully.

Set ETCOORD_NO_EXT=1 to skip the extension entirely.
"""

import os

from setuptools import setup

ext_modules = []
if os.environ.get("ETCOORD_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "etcoord._kernels._fast",
                    ["src/etcoord/_kernels/_fast.pyx"],
                    # -ffp-contract=off: the compiled kernel must produce
                    # bit-identical doubles to the pure-Python kernel; fused
                    # multiply-adds would change rounding.
                    extra_compile_args=["-O2", "-ffp-contract=off"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)

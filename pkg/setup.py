"""Build script: compiles the optional Cython kernel extension.

The package is fully functional without the extension (a NumPy fallback
backend is selected at import time); set STABLESDE_PURE=1 to skip the
compilation entirely.
"""

import os

from setuptools import setup

ext_modules = []
if os.environ.get("STABLESDE_PURE", "0") != "1":
    try:
        from Cython.Build import cythonize
        from setuptools.extension import Extension

        exts = [
            Extension(
                "stablesde.kernels._core",
                sources=["src/stablesde/kernels/_core.pyx"],
                extra_compile_args=[
                    "-O3",
                    "-ffast-math",
                    "-ffp-contract=off",
                    "-march=native",
                    "-fopenmp",
                ],
                extra_link_args=["-fopenmp", "-lmvec", "-lm"],
            )
        ]
        ext_modules = cythonize(exts, language_level=3)
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)

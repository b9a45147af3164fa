"""Build script for the compiled scheduling kernel.

The extension is optional: if it fails to build (no compiler, no Cython),
the package still installs and falls back to the pure-numpy kernel at
import time.  Set VOISCHED_NO_EXT=1 to skip the extension on purpose.
"""

import os

import numpy
from setuptools import setup

ext_modules = []
if not os.environ.get("VOISCHED_NO_EXT"):
    try:
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "voisched._core",
                    sources=["src/voisched/_core.pyx"],
                    include_dirs=[numpy.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)

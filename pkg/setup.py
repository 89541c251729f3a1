"""Build script for the optional compiled kernel.

The package works without the extension: ``farnoma`` falls back to the
pure-numpy kernel at import time when ``farnoma._genz`` is missing.
Build in place with ``python setup.py build_ext --inplace`` or simply
``pip install -e . --no-build-isolation``.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("FARNOMA_SKIP_EXT"):
    try:
        import numpy
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "farnoma._genz",
                    ["src/farnoma/_genz.pyx"],
                    include_dirs=[numpy.get_include()],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={
                "language_level": 3,
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
            },
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)

"""Build script for the optional compiled sweep kernel.

The package works without the extension: graphbell._kernels falls back to a
pure-numpy implementation at import time.  The extension fuses Bell-operator
construction with LAPACK eigensolves for the dense angle-grid sweeps.
"""

import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

extensions = []
if cythonize is not None:
    ext = Extension(
        "graphbell._kernels._sweep",
        ["src/graphbell/_kernels/_sweep.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    ext.optional = True  # a failed build must not block installation
    extensions = cythonize(
        [ext],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
            "initializedcheck": False,
        },
    )

setup(ext_modules=extensions)

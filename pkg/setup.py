from setuptools import Extension, setup

import numpy

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "fseval._sinkhorn_cy",
                ["src/fseval/_sinkhorn_cy.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except ImportError:
    # No Cython: the package falls back to the pure-numpy kernel at import time.
    ext_modules = []

setup(ext_modules=ext_modules)

import os

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

if cythonize is not None and os.path.exists("src/swhops/_kernel.pyx"):
    # -ffp-contract=off: the compiled kernel must produce bit-identical doubles
    # to the pure-Python fallback, so FMA contraction is disabled.
    ext_modules = cythonize(
        [
            Extension(
                "swhops._kernel",
                ["src/swhops/_kernel.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3", "-ffp-contract=off"],
            )
        ],
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
            "initializedcheck": False,
        },
    )
else:
    ext_modules = []

setup(ext_modules=ext_modules)

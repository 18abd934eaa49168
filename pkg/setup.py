"""Build script for the optional compiled bit-vector kernels.

The package works without the extension (a NumPy fallback is selected at
import time); building it just makes fingerprint similarity search faster.
"""

import numpy
from Cython.Build import cythonize
from setuptools import Extension, setup

extensions = [
    Extension(
        "rxnbalance.kernels._bitops",
        ["src/rxnbalance/kernels/_bitops.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    ),
]

setup(ext_modules=cythonize(extensions, language_level=3))

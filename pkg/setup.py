"""Build script for the optional Cython training kernel.

The package works without the compiled extension; ontolabel.kernels falls
back to the numpy implementation when the import fails.
"""

from setuptools import setup, Extension

import numpy as np

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "ontolabel.kernels._fast",
                ["src/ontolabel/kernels/_fast.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)

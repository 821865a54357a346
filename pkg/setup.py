import numpy as np
from setuptools import setup, Extension

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "smoothval.kernels._kernels",
                ["src/smoothval/kernels/_kernels.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except ImportError:
    # Pure-Python fallback in smoothval.kernels is used when the
    # compiled extension is unavailable.
    ext_modules = []

setup(ext_modules=ext_modules)

"""Build hook for the optional Cython kernel extension.

The package is fully functional without the extension (a NumPy fallback is
selected at import time); building it just makes the Monte Carlo inner loops
faster. `pip install -e . --no-build-isolation` with Cython available will
compile it.
"""
from setuptools import Extension, setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "arbp.kernels._fast",
                sources=["src/arbp/kernels/_fast.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level="3",
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)

import os

import numpy as np
from setuptools import Extension, setup

ext_modules = []
if os.environ.get("HYPQEC_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize
    except ImportError:  # no Cython: the pure-Python fallback is used
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "hypqec._core",
                    ["src/hypqec/_core.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            language_level=3,
        )

setup(ext_modules=ext_modules)

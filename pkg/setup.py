import os

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # fall back to the numpy kernels
    cythonize = None

ext_modules = []
if cythonize is not None and os.environ.get("KGMRADIAL_NO_EXT", "") != "1":
    ext_modules = cythonize(
        [
            Extension(
                "kgmradial._ckernels",
                ["src/kgmradial/_ckernels.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)

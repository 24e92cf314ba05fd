"""Build the optional Cython kernels.

The package works without them; ``twotime.kernels`` falls back to numpy
when the compiled module cannot be imported.
"""
import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("TWOTIME_NO_EXT") != "1":
    try:
        import numpy as np
        from Cython.Build import cythonize
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "twotime._ckernels",
                    ["src/twotime/_ckernels.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                    optional=True,
                )
            ],
            language_level=3,
        )

setup(ext_modules=ext_modules)

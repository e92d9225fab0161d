"""Build hook for the optional compiled kernels.

The pure-Python fallback in ``layerdiff._core_py`` is used whenever the
extension is missing, so a failed compile only costs speed.
"""
import os

from setuptools import setup

ext_modules = []
if os.environ.get("LAYERDIFF_NO_EXT") != "1":
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "layerdiff._core",
                    ["src/layerdiff/_core.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)

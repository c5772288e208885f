"""Builds the optional compiled kernels.

The package is fully functional without the extension (a numpy fallback is
selected at import time); the build is best-effort so that environments
without a C toolchain can still install the pure-Python package.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "vecdrive.backend._kernels",
                ["src/vecdrive/backend/_kernels.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)

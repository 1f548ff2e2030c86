import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "ghzmc._mc_kernels",
                ["src/ghzmc/_mc_kernels.pyx"],
                extra_compile_args=["-O3"],
                include_dirs=[numpy.get_include()],
            )
        ],
        language_level=3,
    )
except ImportError:
    # Without Cython the package still installs; ghzmc.kernels falls back
    # to the pure-Python implementation at import time.
    extensions = []

setup(ext_modules=extensions)

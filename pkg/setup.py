import sys

from setuptools import Extension, setup

# The compiled kernel backend is optional: if Cython (or a C compiler) is
# unavailable the package falls back to mlvsim._kernels_py at import time.
ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [Extension("mlvsim._kernels", ["src/mlvsim/_kernels.pyx"])],
        language_level=3,
    )
except ImportError:
    print("Cython not available; building without the compiled kernel backend",
          file=sys.stderr)

setup(ext_modules=ext_modules)

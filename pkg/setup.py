"""Build script for the optional compiled elimination kernels.

The package is fully functional without the extension; `fpt._kernels`
falls back to the pure-Python twin when the compiled module is absent.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [Extension("fpt._kernels._speedups", ["src/fpt/_kernels/_speedups.pyx"])],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)

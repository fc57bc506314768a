"""Build script.

The compiled kernel extension is optional: if Cython (or a C compiler) is
unavailable the package installs anyway and falls back to the pure-Python
kernels at import time.
"""

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "rhopf.kernels._poly_c",
                ["src/rhopf/kernels/_poly_c.pyx"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)

"""Build hook for the optional compiled search kernel.

The package works without the extension (a pure-Python kernel is selected
at import time); building it just makes large sweeps much faster.
"""
from setuptools import Extension, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "qwake._search_cy",
                ["src/qwake/_search_cy.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        language_level="3",
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)

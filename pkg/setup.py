from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [Extension("cl4kit._kernel", ["src/cl4kit/_kernel.pyx"])],
        language_level=3,
    )
except ImportError:
    # No Cython available: build a pure-Python package. The tautology
    # kernel falls back to the bigint lane at import time.
    extensions = []

setup(ext_modules=extensions)

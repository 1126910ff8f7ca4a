"""Build hook for the optional compiled counting kernel.

The package works without the extension (a NumPy fallback is selected at
import time), so a missing Cython toolchain only costs speed.
"""

from setuptools import Extension, setup

try:
    import numpy
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "bnprune._loglike",
                ["src/bnprune/_loglike.pyx"],
                include_dirs=[numpy.get_include()],
                language="c++",
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)

"""Build script for the optional compiled kernel extension.

The package is pure Python plus one optional Cython extension holding the
per-datum likelihood kernels.  If Cython or a C compiler is unavailable the
build simply skips the extension and the package falls back to the numpy
implementation at import time.
"""

from setuptools import Extension, setup


def _extensions():
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "tallmh._kernels._fast",
        sources=["src/tallmh/_kernels/_fast.pyx"],
        include_dirs=[numpy.get_include()],
        extra_compile_args=["-O3"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        optional=True,
    )
    return cythonize([ext], language_level="3")


setup(ext_modules=_extensions())

"""Builds the optional compiled refinement kernel; the package works without it."""

import os

from setuptools import Extension, setup


def extensions():
    if os.environ.get("SLPFO_NO_EXT"):
        return []
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension("slpfo._canon_ext", ["src/slpfo/_canon_ext.pyx"])
    return cythonize([ext], language_level=3, quiet=True)


setup(ext_modules=extensions())

import os

from setuptools import setup, Extension

ext_modules = []
if os.environ.get("QROE_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [Extension("qroe._ckernels", ["src/qroe/_ckernels.pyx"])],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)

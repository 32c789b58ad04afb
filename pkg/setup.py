"""Build script for the optional compiled evaluation kernel.

Package metadata lives in pyproject.toml.  When Cython or a C compiler is
missing, the extension is skipped and the pure-Python kernel is used.
"""

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [Extension("feh._ckernel", ["src/feh/_ckernel.pyx"], optional=True)],
        compiler_directives={"language_level": "3"},
        quiet=True,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)

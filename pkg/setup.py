"""Build script: compiles the optional similarity-scan extension.

The extension is marked optional; if Cython or a C compiler is missing the
package installs anyway and selects the pure-numpy backend at import time.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "spurmatch._matchkernel",
                ["src/spurmatch/_matchkernel.pyx"],
                include_dirs=[numpy.get_include()],
                optional=True,
            )
        ],
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)

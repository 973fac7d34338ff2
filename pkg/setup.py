import os

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

# The compiled kernel is an optional speedup; the package falls back to the
# pure-Python implementation when the extension is absent (see
# tradenet/_kernels/__init__.py). Set TRADENET_SKIP_EXT=1 to skip the build.
ext_modules = []
if cythonize is not None and not os.environ.get("TRADENET_SKIP_EXT"):
    ext_modules = cythonize(
        [
            Extension(
                "tradenet._kernels._loop",
                ["src/tradenet/_kernels/_loop.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)

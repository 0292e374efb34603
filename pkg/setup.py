"""Build script for the optional compiled kernel extension.

The package works without the extension (a pure-Python fallback is selected
at import time), so the build is best-effort: if Cython or a C compiler is
unavailable the sdist still installs.

`-ffp-contract=off` keeps the compiled kernels bitwise-identical to the
pure-Python fallback (no fused multiply-add contraction).
"""

from setuptools import setup

try:
    import numpy
    from Cython.Build import cythonize
    from setuptools.extension import Extension

    extensions = cythonize(
        [
            Extension(
                "bandit_bakery._kernels",
                ["src/bandit_bakery/_kernels.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O2", "-ffp-contract=off"],
            )
        ],
        language_level=3,
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)

"""Build script for the optional compiled split-search kernel.

The package is fully functional without the extension; horserule._split
falls back to the numpy implementation when the import fails.
"""

from setuptools import setup

try:
    import numpy
    from Cython.Build import cythonize
    from setuptools.extension import Extension

    # -ffp-contract=off keeps the compiled kernels bit-compatible with the
    # numpy fallbacks (no fused multiply-add reassociation).
    _opts = dict(
        include_dirs=[numpy.get_include()],
        extra_compile_args=["-O3", "-ffp-contract=off"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    extensions = cythonize(
        [
            Extension("horserule._splitc", ["src/horserule/_splitc.pyx"], **_opts),
            Extension("horserule._dssc", ["src/horserule/_dssc.pyx"], **_opts),
        ],
        language_level=3,
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)

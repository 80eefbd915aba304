"""Build script for the compiled shortest-path kernel.

The extension is optional: if the Cython build fails (no compiler, no
Cython), installation still succeeds and the package falls back to the
pure-Python kernel at import time.
"""

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext

try:
    import numpy
    from Cython.Build import cythonize
except ImportError:
    cythonize = None


class OptionalBuildExt(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # pragma: no cover - depends on toolchain
            print(f"warning: compiled kernel not built ({exc}); "
                  "using pure-Python fallback")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # pragma: no cover - depends on toolchain
            print(f"warning: building {ext.name} failed ({exc}); "
                  "using pure-Python fallback")


if cythonize is not None:
    extensions = cythonize(
        [
            Extension(
                "lqg._ckernel",
                ["src/lqg/_ckernel.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
else:  # pragma: no cover - depends on toolchain
    extensions = []

setup(ext_modules=extensions, cmdclass={"build_ext": OptionalBuildExt})

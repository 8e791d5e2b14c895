import os

import numpy
from Cython.Build import cythonize
from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext

NPYRANDOM_LIB = os.path.join(os.path.dirname(numpy.__file__), "random", "lib")

extensions = [
    Extension(
        "bathtub_repair._core",
        ["src/bathtub_repair/_core.pyx"],
        include_dirs=[numpy.get_include()],
        library_dirs=[NPYRANDOM_LIB],
        libraries=["npyrandom", "m"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
    )
]


class OptionalBuildExt(build_ext):
    """Build the compiled core if possible; the package works without it."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # noqa: BLE001
            print(f"warning: compiled core not built ({exc}); using pure-Python fallback")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # noqa: BLE001
            print(f"warning: failed to build {ext.name} ({exc}); using pure-Python fallback")


setup(
    ext_modules=cythonize(extensions, compiler_directives={"language_level": "3"}),
    cmdclass={"build_ext": OptionalBuildExt},
)

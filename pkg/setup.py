"""Build script: compiles the hot integrator kernel as a C extension.

The extension is optional.  If Cython or a C compiler is unavailable the
package installs anyway and falls back to the pure-Python kernel at import
time (rossler_knots.integrator picks the backend).

-ffp-contract=off keeps the compiled kernel bit-identical to the pure
Python one: same IEEE operations in the same order, no fused multiply-add.
"""

import sys

from setuptools import setup, Extension
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Build the kernel if possible; install pure-Python otherwise."""

    def run(self):
        try:
            super().run()
        except Exception as e:
            print(f"warning: skipping compiled kernel ({e}); "
                  "the pure-Python kernel will be used", file=sys.stderr)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as e:
            print(f"warning: could not compile {ext.name} ({e}); "
                  "the pure-Python kernel will be used", file=sys.stderr)


ext_modules = []
try:
    from Cython.Build import cythonize

    directives = {
        "language_level": "3",
        "boundscheck": False,
        "wraparound": False,
        "cdivision": True,
        "initializedcheck": False,
    }
    ext_modules = cythonize(
        [
            Extension(
                "rossler_knots._kernels",
                ["src/rossler_knots/_kernels.pyx"],
                extra_compile_args=["-O2", "-ffp-contract=off"],
            )
        ],
        compiler_directives=directives,
        quiet=True,
    )
except ImportError:
    print("warning: Cython unavailable; installing with the pure-Python kernel",
          file=sys.stderr)

setup(cmdclass={"build_ext": optional_build_ext}, ext_modules=ext_modules)

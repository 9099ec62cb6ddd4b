"""Build script: compiles the optional Cython rainflow kernel.

The extension is best-effort; if Cython or a C compiler is unavailable the
package installs anyway and falls back to the pure-Python kernel at import.
"""

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Skip extension compilation failures instead of aborting the install."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, etc.
            print(f"warning: skipping Cython extension build ({exc})")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"warning: failed to build {ext.name} ({exc}); "
                  "pure-Python rainflow kernel will be used")


def extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        print("warning: Cython not available; pure-Python rainflow kernel will be used")
        return []
    return cythonize(
        [Extension("dbio._rainflow_cy", ["src/dbio/_rainflow_cy.pyx"])],
        compiler_directives={"language_level": "3"},
    )


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})

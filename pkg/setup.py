"""Build script: compiles the optional integer-pivot extension.

The package works without the extension (a pure-Python twin of the
kernel is selected at import time), so compilation failures are
downgraded to a warning rather than aborting the install.
"""

import sys

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/beliefgames/_pivot.pyx"],
        compiler_directives={"language_level": 3},
    )
except Exception as exc:  # pragma: no cover - build environment dependent
    print(f"warning: skipping compiled pivot kernel ({exc})", file=sys.stderr)

setup(ext_modules=ext_modules)

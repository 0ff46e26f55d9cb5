"""Build script: compiles the optional kernel extension.

The package works without the extension (a NumPy fallback is selected at
import time); the build only warns when Cython or a C compiler is missing.
No -ffast-math and no floating-point contraction: the compiled kernels must
round exactly like the fallback.
"""

import warnings

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "pixclust._ckernels",
                ["src/pixclust/_ckernels.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3", "-ffp-contract=off"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError as exc:  # pragma: no cover - build environment dependent
    warnings.warn(f"building without compiled kernels: {exc}")

setup(ext_modules=ext_modules)

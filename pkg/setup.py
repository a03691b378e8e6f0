"""Build the optional compiled Jacobi kernel.

The package imports without it; ``buildinglab.linalg`` falls back to a
vectorised numpy implementation when the extension is missing.
"""
from setuptools import Extension, setup

DIRECTIVES = {
    "language_level": "3",
    "boundscheck": False,
    "wraparound": False,
    "cdivision": True,
    "initializedcheck": False,
}

try:
    from Cython.Build import cythonize
except ImportError:  # pragma: no cover - build without cython
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "buildinglab._jacobi_ext",
                ["src/buildinglab/_jacobi_ext.pyx"],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        compiler_directives=DIRECTIVES,
    )

setup(ext_modules=ext_modules)

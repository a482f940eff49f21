from setuptools import Extension, setup

# The compiled integrator kernels are optional: without Cython (or a C
# compiler) the install still works and kdlab falls back to the numpy
# implementation at import time.
try:
    import numpy as np
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "kdlab._rk4",
                ["src/kdlab/_rk4.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)

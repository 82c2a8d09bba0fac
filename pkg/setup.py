import numpy
from setuptools import Extension, setup

# The compiled kernels are optional: the package falls back to the NumPy
# implementations in ksflow._kernels_py when the extension is absent.
try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "ksflow._kernels",
                ["src/ksflow/_kernels.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)

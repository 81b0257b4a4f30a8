from setuptools import Extension, setup

# The compiled k-NN kernel is optional: without Cython the package installs
# pure-Python and xq.kernels falls back to the NumPy implementation.
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "xq.kernels._fastknn",
                ["src/xq/kernels/_fastknn.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)

from setuptools import setup, Extension

try:
    from Cython.Build import cythonize
except ImportError:
    # Without Cython the package still works through the pure-Python kernels.
    ext_modules = []
else:
    ext_modules = cythonize(
        [Extension("dcgames._simplex", ["src/dcgames/_simplex.pyx"])],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)

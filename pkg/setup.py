"""Build the optional compiled kernels; the package works without them."""
from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [Extension("sfid._kernels._ext", ["src/sfid/_kernels/_ext.pyx"],
                   include_dirs=[numpy.get_include()], optional=True)],
        language_level=3)
except ImportError:
    pass

setup(ext_modules=ext_modules)

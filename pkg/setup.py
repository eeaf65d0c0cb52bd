"""Build the optional Cython split-search kernel.

The package works without it (a pure-numpy fallback is selected at import
time), so the extension is marked optional: a failed compile degrades to
the slower backend instead of breaking the install.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "probsim._tree_kernel",
                ["src/probsim/_tree_kernel.pyx"],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": 3},
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)

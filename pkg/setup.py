from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "effectsched._sweeps",
                ["src/effectsched/_sweeps.pyx"],
                optional=True,
            )
        ],
        language_level="3",
    )
except ImportError:
    # No Cython available: the pure-Python sweep kernels are used instead.
    extensions = []

setup(ext_modules=extensions)

"""Builds the optional compiled kernels; the package works without them."""

import os

from setuptools import setup

ext_modules = []
if os.environ.get("ACL0LMS_NO_EXT") != "1":
    try:
        import numpy as np  # noqa: F401
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [Extension("acl0lms._kernels", ["src/acl0lms/_kernels.pyx"],
                       extra_compile_args=["-O3", "-ffp-contract=off"])],
            language_level=3,
        )

setup(ext_modules=ext_modules)

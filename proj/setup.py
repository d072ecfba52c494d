import glob
import os

from pybind11.setup_helpers import Pybind11Extension, build_ext
from setuptools import setup


def eigen_include():
    env = os.environ.get("EIGEN3_INCLUDE_DIR")
    if env:
        return env
    for candidate in ("/usr/include/eigen3", "/usr/local/include/eigen3"):
        if os.path.isdir(candidate):
            return candidate
    raise RuntimeError("Eigen3 headers not found; set EIGEN3_INCLUDE_DIR")


ext = Pybind11Extension(
    "robustfolio._core",
    sources=sorted(glob.glob("src/*.cpp")) + ["bindings/module.cpp"],
    include_dirs=["include", "vendor", eigen_include()],
    cxx_std=20,
)

setup(ext_modules=[ext], cmdclass={"build_ext": build_ext})

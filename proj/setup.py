import os

from pybind11.setup_helpers import Pybind11Extension, build_ext
from setuptools import setup

CORE_SOURCES = [
    "src/matrix.cpp",
    "src/kernel_entropy.cpp",
    "src/nn.cpp",
    "src/multiview.cpp",
    "src/meib_model.cpp",
    "src/synth_gen.cpp",
    "src/data_io.cpp",
    "src/harness.cpp",
]


def eigen_include():
    for candidate in ("/usr/include/eigen3", "/usr/local/include/eigen3"):
        if os.path.isdir(candidate):
            return candidate
    raise RuntimeError("Eigen headers not found; install libeigen3-dev")


ext_modules = [
    Pybind11Extension(
        "meib._meib",
        sources=["bindings/meib_py.cpp"] + CORE_SOURCES,
        include_dirs=["include", "vendor", eigen_include()],
        cxx_std=20,
        extra_compile_args=["-O2"],
    )
]

setup(ext_modules=ext_modules, cmdclass={"build_ext": build_ext})

"""Builds the extension with cargo; no maturin needed.

Install from the repository root with
    pip install -e python/ --no-build-isolation
"""

import pathlib
import shutil
import subprocess

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext

WORKSPACE = pathlib.Path(__file__).resolve().parent.parent


class CargoBuild(build_ext):
    def build_extension(self, ext):
        subprocess.run(
            ["cargo", "build", "--release", "-p", "cartconv-py"],
            cwd=WORKSPACE,
            check=True,
        )
        built = WORKSPACE / "target" / "release" / "lib_cartconv.so"
        dest = pathlib.Path(self.get_ext_fullpath(ext.name))
        dest.parent.mkdir(parents=True, exist_ok=True)
        shutil.copyfile(built, dest)


setup(
    ext_modules=[Extension("cartconv._cartconv", sources=[])],
    cmdclass={"build_ext": CargoBuild},
)

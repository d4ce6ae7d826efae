import shutil
import subprocess
import sys
from pathlib import Path

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class CMakeExtension(Extension):
    def __init__(self, name):
        super().__init__(name, sources=[])


class CMakeBuild(build_ext):
    def build_extension(self, ext):
        source = Path(__file__).resolve().parent
        build_dir = Path(self.build_temp).resolve() / "cmake"
        build_dir.mkdir(parents=True, exist_ok=True)
        dest = Path(self.get_ext_fullpath(ext.name)).resolve().parent
        dest.mkdir(parents=True, exist_ok=True)

        subprocess.run(
            [
                "cmake",
                "-S", str(source),
                "-B", str(build_dir),
                f"-DCMAKE_BUILD_TYPE={'Debug' if self.debug else 'Release'}",
                f"-DPython3_EXECUTABLE={sys.executable}",
                "-DQREM_BUILD_CLI=OFF",
                "-DQREM_BUILD_TESTS=OFF",
            ],
            check=True,
        )
        subprocess.run(
            ["cmake", "--build", str(build_dir), "--target", "_qrem", "--parallel"],
            check=True,
        )

        staged = build_dir / "python" / "qrem"
        for lib in staged.glob("_qrem.*"):
            shutil.copy2(lib, dest / lib.name)


setup(
    ext_modules=[CMakeExtension("qrem._qrem")],
    cmdclass={"build_ext": CMakeBuild},
)

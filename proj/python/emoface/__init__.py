"""Python bindings for the emoface core library."""

import os
import subprocess
import sys

from ._emoface import (
    EmofaceError,
    align_to_canonical,
    animate,
    canonical_template,
    cpbd,
    delaunay,
    evaluate,
    frechet_distance,
    index_dataset,
    psnr,
    read_png,
    ssim,
    write_png,
    write_synthetic_dataset,
)

__all__ = [
    "EmofaceError",
    "align_to_canonical",
    "animate",
    "canonical_template",
    "cpbd",
    "delaunay",
    "evaluate",
    "frechet_distance",
    "index_dataset",
    "psnr",
    "read_png",
    "ssim",
    "write_png",
    "write_synthetic_dataset",
    "cli",
]


def cli(*args: str) -> subprocess.CompletedProcess:
    """Run the bundled `emoface` command-line tool."""
    exe = os.path.join(os.path.dirname(__file__), "bin", "emoface")
    return subprocess.run([exe, *args], check=True, capture_output=True, text=True)


def main() -> None:
    exe = os.path.join(os.path.dirname(__file__), "bin", "emoface")
    os.execv(exe, [exe, *sys.argv[1:]])

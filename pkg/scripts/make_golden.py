"""Regenerate the frozen kl-scan fixture used by the determinism tests."""

import argparse
import os
import sys
from pathlib import Path

from brwgibbs.cli import main

GOLDEN_ARGS = [
    "kl-scan", "gaussian:d=2", "--beta", "0.8", "--N", "12", "--M", "1,2,3,4,6,12",
    "--seeds", "0:100", "--deterministic",
]


def main_(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    default = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "kl_scan_golden.csv"
    parser.add_argument("--out", default=str(default))
    args = parser.parse_args(argv)
    os.environ.setdefault("BRWGIBBS_THREADS", "1")
    return main(GOLDEN_ARGS + ["--out", args.out])


if __name__ == "__main__":
    sys.exit(main_())

"""Full hardness experiment through the CLI, written to a directory.

Equivalent to ``brwgibbs hardness gaussian:d=2 --out DIR`` with the
acceptance-scale settings.
"""

import argparse
import sys

from brwgibbs.cli import main as cli_main


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="results/hardness")
    parser.add_argument("--trials", type=int, default=20000)
    parser.add_argument("--searches", type=int, default=2000)
    args = parser.parse_args(argv)
    return cli_main([
        "hardness", "gaussian:d=2", "--beta", "1.5", "--N", "8,12,16,20", "--pilot-N", "16",
        "--trials", str(args.trials), "--searches", str(args.searches), "--search-N", "16",
        "--tail-N", "18", "--tail-trials", "5000", "--xs", "0,2,4,6",
        "--base-seed", "1", "--deterministic", "--out", args.out,
    ])


if __name__ == "__main__":
    sys.exit(main())

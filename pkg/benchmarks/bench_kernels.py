"""Time the compiled dominance/hypervolume kernels against pure python.

Usage: python benchmarks/bench_kernels.py [--points K] [--objectives M]
Thin wrapper over `dmsearch bench`; kept as a script so the comparison can
run from a source tree before installation.
"""

import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from dmsearch.cli import main  # noqa: E402

if __name__ == "__main__":
    sys.exit(main(["bench"] + sys.argv[1:]))

"""Run the bf-cdf experiment; extra arguments are passed to the CLI.

    python scripts/run_bf_cdf.py --seed 1 --out results/bf_cdf.csv
"""

import sys

from pa_sim.cli import main

if __name__ == "__main__":
    sys.exit(main(["bf-cdf", *sys.argv[1:]]))

"""Run the fig2 experiment; extra arguments are passed to the CLI.

    python scripts/run_fig2.py --seed 1 --out results/fig2.csv
"""

import sys

from pa_sim.cli import main

if __name__ == "__main__":
    sys.exit(main(["fig2", *sys.argv[1:]]))

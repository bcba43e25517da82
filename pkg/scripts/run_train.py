"""Run the train experiment; extra arguments are passed to the CLI.

    python scripts/run_train.py --seed 1 --out results/train.csv
"""

import sys

from pa_sim.cli import main

if __name__ == "__main__":
    sys.exit(main(["train", *sys.argv[1:]]))

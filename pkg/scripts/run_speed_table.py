"""Run the speed-table experiment; extra arguments are passed to the CLI.

    python scripts/run_speed_table.py --seed 1 --out results/speed_table.csv
"""

import sys

from pa_sim.cli import main

if __name__ == "__main__":
    sys.exit(main(["speed-table", *sys.argv[1:]]))

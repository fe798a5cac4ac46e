# This file is part of irsma.
#
# SPDX-License-Identifier: BSD-3-Clause

# Run an experiment from a source checkout, e.g.
# python3 run_experiment.py sweep-distance --trials 10 --out results

import sys

from irsma.cli import main

if __name__ == "__main__":
    sys.exit(main())

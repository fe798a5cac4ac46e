# This file is part of irsma.
#
# SPDX-License-Identifier: BSD-3-Clause

import sys

from irsma.cli import main

sys.exit(main())

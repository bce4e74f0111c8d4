"""Run the command line front end with ``python -m specres``."""

import sys

from .cli import main

sys.exit(main())

"""Module entry point: ``python -m swhops``."""

import sys

from .cli import main

sys.exit(main())

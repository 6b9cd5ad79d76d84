"""Entry point for python -m compacta."""

import sys

from .cli import main

sys.exit(main())

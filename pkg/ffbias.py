#!/usr/bin/env python3
"""Entry point for the ffbias laboratory.

Thin wrapper around ``src.main`` so the tool can be started as
``python ffbias.py <command> ...`` from the repository root.
"""

import sys

from src.main import main

if __name__ == "__main__":
    sys.exit(main())

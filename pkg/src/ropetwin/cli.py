"""Console-script entry point (`ropetwin` command)."""
import sys

from ropetwin.shell.cli import build_parser, main

__all__ = ["build_parser", "main"]

if __name__ == "__main__":
    sys.exit(main())

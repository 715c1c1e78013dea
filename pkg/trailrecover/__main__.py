"""
Main entry point for running trailrecover as a module.

Usage:
    python -m trailrecover <command> [options]
"""

from .cli import main

if __name__ == "__main__":
    import sys

    sys.exit(main())

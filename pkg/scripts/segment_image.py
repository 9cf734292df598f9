"""Segment a binary PPM with DBSCAN++; forwards to the ``segment`` command."""

import sys

from dbscanpp.cli import main

if __name__ == "__main__":
    sys.exit(main(["segment", *sys.argv[1:]]))

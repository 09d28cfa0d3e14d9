"""Shared helpers for the experiment scripts: argument parsing and CSV output."""

import argparse
import csv
import sys
from pathlib import Path


def parser(description):
    ap = argparse.ArgumentParser(description=description)
    ap.add_argument("--out", default=None, help="CSV path (default: stdout)")
    return ap


def write_rows(path, columns, rows):
    fh = open(path, "w", newline="") if path else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([f"{v:.16e}" if isinstance(v, float) else v for v in row])
    finally:
        if path:
            fh.close()
            print(f"wrote {Path(path)}", file=sys.stderr)

#!/usr/bin/env python3
"""Regenerate the bundled CSV copies of the classic UCI datasets.

Iris and Wine ship with scikit-learn, which carries the canonical UCI
values; this script just exports them to the plain comma-separated layout
`dcprog.data.load_csv` reads (features first, integer class label last).

Yeast (1484 x 8) and Glass (214 x 9) are not bundled with any offline
package. To run the clustering experiments on them, download
`yeast.data` / `glass.data` from the UCI repository and convert:

    python scripts/fetch_datasets.py --convert-yeast yeast.data
    python scripts/fetch_datasets.py --convert-glass glass.data

(yeast.data: drop the leading sequence-name column, keep the 8 numeric
features, map the class name to an integer; glass.data: drop the leading
Id column, keep the 9 numeric features and the integer label.)
"""

import argparse
import sys
from pathlib import Path

DATA_DIR = Path(__file__).resolve().parents[1] / "data"


def export_sklearn():
    from sklearn.datasets import load_iris, load_wine

    for name, bunch in (("iris", load_iris()), ("wine", load_wine())):
        path = DATA_DIR / f"{name}.csv"
        with open(path, "w", encoding="utf-8") as fh:
            for row, label in zip(bunch.data, bunch.target):
                fh.write(",".join(repr(float(v)) for v in row) + f",{int(label)}\n")
        print(f"wrote {path} ({bunch.data.shape[0]} x {bunch.data.shape[1]} + label)")


def convert_yeast(src):
    classes = {}
    out = DATA_DIR / "yeast.csv"
    with open(src) as fh, open(out, "w", encoding="utf-8") as dst:
        for line in fh:
            parts = line.split()
            if len(parts) != 10:
                continue
            feats = parts[1:9]
            label = classes.setdefault(parts[9], len(classes))
            dst.write(",".join(feats) + f",{label}\n")
    print(f"wrote {out}")


def convert_glass(src):
    out = DATA_DIR / "glass.csv"
    with open(src) as fh, open(out, "w", encoding="utf-8") as dst:
        for line in fh:
            parts = line.strip().split(",")
            if len(parts) != 11:
                continue
            dst.write(",".join(parts[1:]) + "\n")
    print(f"wrote {out}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--convert-yeast", metavar="FILE")
    ap.add_argument("--convert-glass", metavar="FILE")
    args = ap.parse_args()
    DATA_DIR.mkdir(exist_ok=True)
    if args.convert_yeast:
        convert_yeast(args.convert_yeast)
    elif args.convert_glass:
        convert_glass(args.convert_glass)
    else:
        try:
            export_sklearn()
        except ImportError:
            sys.exit("scikit-learn is required to regenerate iris/wine CSVs")

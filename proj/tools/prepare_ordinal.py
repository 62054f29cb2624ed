#!/usr/bin/env python3
"""Turn a regression table into an ordinal classification CSV.

The target column is cut into equal-frequency bins labelled 1..k, numeric
feature columns are kept as is and the label is written last. For the UCI
"Computer Hardware" file (machine.data, no header) the usual call is

    python tools/prepare_ordinal.py machine.data data/machinecpu.csv \
        --no-header --target 8 --drop 0 1 9 --bins 10
"""

import argparse
import sys

import pandas as pd


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("source")
    ap.add_argument("dest")
    ap.add_argument("--target", default="-1", help="target column name or 0-based index (default: last)")
    ap.add_argument("--drop", nargs="*", default=[], help="columns to discard, by name or index")
    ap.add_argument("--bins", type=int, default=10)
    ap.add_argument("--no-header", action="store_true")
    args = ap.parse_args(argv)

    df = pd.read_csv(args.source, header=None if args.no_header else "infer")

    def column(ref):
        if ref in df.columns:
            return ref
        try:
            return df.columns[int(ref)]
        except (ValueError, IndexError):
            sys.exit(f"unknown column {ref!r}")

    target = column(args.target)
    drop = {column(c) for c in args.drop} | {target}
    features = df.drop(columns=list(drop)).select_dtypes("number")
    # rank first so heavy ties cannot collapse bins
    labels = pd.qcut(df[target].rank(method="first"), args.bins, labels=False) + 1

    out = features.copy()
    out["label"] = labels.astype(int)
    out.to_csv(args.dest, index=False)
    print(f"{len(out)} rows, {features.shape[1]} features, {args.bins} ordinal levels -> {args.dest}")


if __name__ == "__main__":
    main()

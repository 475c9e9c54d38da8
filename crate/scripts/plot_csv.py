#!/usr/bin/env python3
"""Plot one or more dp-laplace CSV outputs on shared axes.

    dp-laplace profile gauss.json > g.csv
    dp-laplace compose rr.json > rr.csv
    python3 scripts/plot_csv.py g.csv rr.csv --log -o profiles.png

Lines starting with '#' are metadata; the first other line is the header.
The first column is x, every further column becomes a curve.
"""

import argparse
import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def read(path):
    with open(path) as fh:
        rows = [r for r in csv.reader(line for line in fh if not line.startswith("#"))]
    header, body = rows[0], rows[1:]
    cols = list(zip(*[[float(v) for v in r] for r in body]))
    return header, cols


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("csv", nargs="+", type=Path)
    ap.add_argument("--log", action="store_true", help="log scale on y")
    ap.add_argument("-o", "--output", type=Path, default=Path("plot.png"))
    args = ap.parse_args()

    fig, ax = plt.subplots(figsize=(6, 4))
    for path in args.csv:
        header, cols = read(path)
        for name, ys in zip(header[1:], cols[1:]):
            label = path.stem if len(header) == 2 else f"{path.stem}: {name}"
            ax.plot(cols[0], ys, label=label)
    ax.set_xlabel(header[0])
    if len(header) == 2:
        ax.set_ylabel(header[1])
    if args.log:
        ax.set_yscale("log")
    ax.grid(alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(args.output, dpi=150)


if __name__ == "__main__":
    main()

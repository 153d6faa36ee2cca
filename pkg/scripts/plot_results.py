"""Render sweep heatmaps and removal curves written by the CLI.

    python3 scripts/plot_results.py heatmap results/heatmaps/wvg_gaussian.csv out.png
    python3 scripts/plot_results.py curves results/valuation/planted_curve_0.csv out.png
"""

import argparse
import csv

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


def heatmap(path, out):
    with open(path) as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [list(map(float, r)) for r in reader]
    a = np.array(rows)
    nx, ny = int(a[:, 0].max()) + 1, int(a[:, 1].max()) + 1
    M = np.full((ny, nx), np.nan)
    M[a[:, 1].astype(int), a[:, 0].astype(int)] = a[:, 4]
    xs = np.unique(a[:, 2])
    ys = np.unique(a[:, 3])
    fig, ax = plt.subplots(figsize=(5, 4))
    im = ax.imshow(M, origin="lower", aspect="auto", cmap="viridis",
                   extent=[xs[0], xs[-1], ys[0], ys[-1]] if nx > 1 and ny > 1 else None)
    ax.set_xlabel(header[2])
    ax.set_ylabel(header[3])
    fig.colorbar(im, ax=ax, label="mean least-core value")
    fig.tight_layout()
    fig.savefig(out, dpi=150)


def curves(path, out):
    with open(path) as fh:
        reader = csv.DictReader(fh)
        rows = list(reader)
    f = [float(r["fraction"]) for r in rows]
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for key in rows[0]:
        if key.startswith("score_"):
            ax.plot(f, [float(r[key]) for r in rows], marker="o", label=key[len("score_"):])
    ax.set_xlabel("fraction removed")
    ax.set_ylabel("test score")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out, dpi=150)


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("kind", choices=("heatmap", "curves"))
    ap.add_argument("csv")
    ap.add_argument("out")
    args = ap.parse_args()
    {"heatmap": heatmap, "curves": curves}[args.kind](args.csv, args.out)

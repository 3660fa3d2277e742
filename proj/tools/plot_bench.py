#!/usr/bin/env python3
# Copyright 2026 The roomsir Authors
# SPDX-License-Identifier: Apache-2.0
"""Plot a CSV written by `roomsir bench`. Mean with +/- one SD error bars."""

import argparse
import csv
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

Y = {
    "room-size": ("paths_mean", "paths_sd", "valid paths"),
    "ray-count": ("time_mean_s", "time_sd_s", "wall time (s)"),
    "energy": ("energy_mean", "energy_sd", "share of total energy"),
    "storage": ("bytes_mean", "bytes_sd", "file size (bytes)"),
}
X = {"room-size": "x", "ray-count": "total_rays", "energy": "x", "storage": "paths_mean"}
X_LABEL = {"room-size": "room scale", "ray-count": "total rays",
           "energy": "fraction of top-ranked paths", "storage": "stored rows"}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("csv")
    ap.add_argument("-o", "--output", default=None, help="image file (default: <csv>.png)")
    args = ap.parse_args()

    rows = list(csv.DictReader(open(args.csv)))
    if not rows:
        raise SystemExit("empty report")
    exp = rows[0]["experiment"]
    ykey, sdkey, ylabel = Y[exp]
    xkey = X[exp]
    groups = defaultdict(list)
    for r in rows:
        groups[r["group"]].append(r)

    fig, ax = plt.subplots(figsize=(6, 4))
    for name, rs in groups.items():
        x = [float(r[xkey]) for r in rs]
        y = [float(r[ykey]) for r in rs]
        sd = [float(r[sdkey]) for r in rs]
        ax.errorbar(x, y, yerr=sd, marker="o", ms=3, capsize=2, label=name)
    if exp == "energy":
        ax.set_xscale("log")
    if exp == "room-size":
        ax.set_yscale("log")
    ax.set_xlabel(X_LABEL[exp])
    ax.set_ylabel(ylabel)
    ax.set_title(exp)
    if len(groups) > 1:
        ax.legend()
    fig.tight_layout()
    fig.savefig(args.output or args.csv.rsplit(".", 1)[0] + ".png", dpi=120)


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Wasserstein recovery of a two-point mixing truth under the unit
Gaussian kernel with the bandwidth pinned at 1."""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

import numpy as np

from supermix.cli import main

OUT = Path(__file__).with_suffix(".csv")

if __name__ == "__main__":
    code = main(
        [
            "w2",
            "--truth", "twopoint",
            "--n-ladder", "250,1000,4000",
            "--replicates", "10",
            "--seed", "0",
            "--threads", "4",
            "--out", str(OUT),
        ]
    )
    if code == 0:
        rows = np.loadtxt(OUT, delimiter=",", skiprows=1)
        for n in np.unique(rows[:, 0]):
            sel = rows[rows[:, 0] == n]
            print(f"n={int(n):5d}  median posterior W2 = {np.median(sel[:, 2]):.4f}")
    sys.exit(code)

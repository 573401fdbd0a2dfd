"""Plot the CSV, PGM and matrix outputs written by `sim`.

Usage: python3 scripts/plot.py <output dir> [figure.png]

The layout is picked from the files present in the directory.
"""

import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np
import pandas as pd
from PIL import Image


def plot_dir(out, ax):
    if (out / "map.matrix").exists():
        diff = np.loadtxt(out / "map.matrix", ndmin=2)
        rows = np.loadtxt(out / "map.rows", ndmin=1)
        cols = np.loadtxt(out / "map.cols", ndmin=1)
        mesh = ax.pcolormesh(cols, rows, diff, shading="auto", cmap="viridis")
        plt.colorbar(mesh, ax=ax, label="T+ - T-")
        ax.set(xlabel="Delta_c (MHz)", ylabel="f_R2")
    elif (out / "hysteresis.csv").exists():
        df = pd.read_csv(out / "hysteresis.csv", dtype={"direction": str})
        for direction, group in df.groupby("direction"):
            ax.plot(group["Delta_c"], group["T"], label=f"sweep {direction}")
        ax.set(xlabel="Delta_c (MHz)", ylabel="T")
        ax.legend()
    elif (out / "scan.csv").exists():
        df = pd.read_csv(out / "scan.csv")
        ax.errorbar(df["f_R"], df["f_I"], yerr=df["stddev"], fmt="o", ms=3)
        ax.set(xlabel="f_R", ylabel="f_I")
    elif (out / "timeseries.csv").exists():
        pgm = next(out.glob("*.pgm"), None)
        if pgm is not None:
            ax.imshow(np.asarray(Image.open(pgm)), cmap="gray", interpolation="nearest")
            ax.set_title(pgm.name)
        else:
            df = pd.read_csv(out / "timeseries.csv")
            for column in ["f_S", "f_I", "f_D"]:
                ax.plot(df["iteration"], df[column], label=column)
            ax.set(xlabel="iteration", ylabel="fraction")
            ax.legend()
    else:
        sys.exit(f"no plottable output in {out}")


def main():
    if len(sys.argv) < 2:
        sys.exit(__doc__)
    out = Path(sys.argv[1])
    target = Path(sys.argv[2]) if len(sys.argv) > 2 else out / "plot.png"
    fig, ax = plt.subplots(figsize=(6, 4.5))
    plot_dir(out, ax)
    fig.tight_layout()
    fig.savefig(target, dpi=150)
    print(f"wrote {target}")


if __name__ == "__main__":
    main()

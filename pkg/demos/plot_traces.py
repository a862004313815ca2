"""Plot true objective value against iteration for every trace CSV in a folder.

    python -m robustfw bench --spec demos/gamma_sweep.json
    python demos/plot_traces.py results/gamma_sweep [--x lmo_calls|iteration|elapsed_seconds]

Reads only the CSVs written by ``bench``.  One panel per instance, one line
per method.  Without matplotlib a text table of final values is printed.
"""

import argparse
import csv
import sys
from collections import defaultdict
from pathlib import Path


def load_traces(folder):
    runs = defaultdict(dict)
    for path in sorted(Path(folder).glob("*__*.csv")):
        instance, method = path.stem.rsplit("__", 1)
        with open(path, newline="") as fh:
            runs[instance][method] = list(csv.DictReader(fh))
    return runs


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("folder")
    ap.add_argument("--x", default="iteration",
                    choices=["iteration", "lmo_calls", "elapsed_seconds"])
    ap.add_argument("--out", default=None, help="image file (default: <folder>/traces.png)")
    args = ap.parse_args(argv)

    runs = load_traces(args.folder)
    if not runs:
        sys.exit(f"no trace CSVs in {args.folder}")
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        for instance, methods in runs.items():
            print(instance)
            for method, rows in methods.items():
                best = min(float(r["f_value"]) for r in rows)
                print(f"  {method:<12} rows={len(rows):>6} best f={best:.6g}")
        return

    fig, axes = plt.subplots(1, len(runs), figsize=(4.5 * len(runs), 3.4), squeeze=False)
    for ax, (instance, methods) in zip(axes[0], runs.items()):
        for method, rows in sorted(methods.items()):
            xs = [float(r[args.x]) for r in rows]
            best, ys = float("inf"), []
            for r in rows:
                best = min(best, float(r["f_value"]))
                ys.append(best)
            ax.plot(xs, ys, label=method)
        ax.set_title(instance, fontsize=9)
        ax.set_xlabel(args.x)
        ax.set_xscale("symlog")
    axes[0][0].set_ylabel("best f(x)")
    axes[0][-1].legend(fontsize=8)
    fig.tight_layout()
    out = args.out or str(Path(args.folder) / "traces.png")
    fig.savefig(out, dpi=120)
    print(f"wrote {out}")


if __name__ == "__main__":
    main()

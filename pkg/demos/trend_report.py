"""Compare FW and CONSGEN traces: step-time growth, LMO calls and iterations.

    python demos/trend_report.py results/gamma_sweep [--rel 1e-3]

For every instance with both an FW and a CONSGEN trace, the threshold is the
best final value of the two times ``1 + rel``.  Reports how each method's time
per iteration evolves and how many LMO calls and iterations each needed to
reach the threshold.  Uses the trace CSVs only.
"""

import argparse
from pathlib import Path

from robustfw.harness import trends


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("folder")
    ap.add_argument("--rel", type=float, default=1e-3)
    args = ap.parse_args(argv)
    folder = Path(args.folder)

    names = sorted({p.stem.rsplit("__", 1)[0] for p in folder.glob("*__FW.csv")})
    header = (f"{'instance':<28} {'growth CG':>9} {'growth FW':>9} {'LMO CG':>7} {'LMO FW':>7} "
              f"{'it CG':>6} {'it FW':>6}")
    print(header)
    for name in names:
        if not (folder / f"{name}__CONSGEN.csv").exists():
            continue
        fw = trends.load(folder, name, "FW")
        cg = trends.load(folder, name, "CONSGEN")
        thr = min(trends.final_best(fw), trends.final_best(cg)) * (1 + args.rel)
        cells = [trends.per_iteration_growth(cg), trends.per_iteration_growth(fw),
                 trends.lmo_calls_to_reach(cg, thr), trends.lmo_calls_to_reach(fw, thr),
                 trends.iterations_to_reach(cg, thr), trends.iterations_to_reach(fw, thr)]
        text = [f"{c:.2f}" if isinstance(c, float) else ("-" if c is None else str(c))
                for c in cells]
        print(f"{name:<28} {text[0]:>9} {text[1]:>9} {text[2]:>7} {text[3]:>7} "
              f"{text[4]:>6} {text[5]:>6}")
    print("\n'-' means the threshold was not reached within the run's budget.")


if __name__ == "__main__":
    main()

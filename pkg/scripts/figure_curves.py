"""Write the four d-dependent bound curves as CSV files."""

import argparse
from pathlib import Path

from mubcert import cli


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--dim", type=int, default=4)
    parser.add_argument("--points", type=int, default=1000)
    parser.add_argument("--outdir", default="curves")
    args = parser.parse_args()

    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    for bound, column in cli.BOUND_COLUMNS.items():
        spec = cli.SweepSpec(args.dim, bound, args.points)
        path = outdir / f"{column}_d{args.dim}.csv"
        path.write_text(cli.sweep_csv(spec))
        lo, hi = spec.resolved_range()
        print(f"{path}  p_bar in [{lo:.6f}, {hi:.6f}]")


if __name__ == "__main__":
    main()

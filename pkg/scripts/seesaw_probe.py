"""Run the seesaw search for several dimensions and compare with the MUB value."""

import argparse
import time

from mubcert import certify, qrac


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--dims", type=int, nargs="+", default=[2, 3, 4, 5])
    parser.add_argument("--restarts", type=int, default=50)
    parser.add_argument("--iters", type=int, default=200)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    print("d  best_asp            p_Q                 max_restart - p_Q  seconds")
    for d in args.dims:
        start = time.perf_counter()
        result = qrac.seesaw_optimize(d, args.restarts, args.iters, args.seed)
        p_q = certify.ideal_asp(d)
        excess = max(result.restart_asps) - p_q
        print(f"{d}  {result.best_asp:.15f}  {p_q:.15f}  {excess:+.3e}         {time.perf_counter() - start:.1f}")


if __name__ == "__main__":
    main()

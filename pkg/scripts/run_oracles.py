"""Run every randomized oracle suite over a range of dimensions."""

import argparse
import json
import sys
import time

from mubcert import oracles


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--dims", type=int, nargs="+", default=[2, 3, 4, 5, 6])
    parser.add_argument("--trials", type=int, default=10_000)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--json", help="also dump all outcomes to this file")
    args = parser.parse_args()

    outcomes = [oracles.check_h_lemma(1000)]
    print(f"{'PASS' if outcomes[0].passed else 'FAIL'} hlemma worst={outcomes[0].worst_margin:.3e}")
    for name in oracles.SUITES:
        if name == "hlemma":
            continue
        for d in args.dims:
            start = time.perf_counter()
            o = oracles.run_suite(name, args.trials, d, args.seed)
            outcomes.append(o)
            print(
                f"{'PASS' if o.passed else 'FAIL'} {name:14s} d={d} worst={o.worst_margin:.3e} "
                f"random={o.worst_random_margin:.3e} ({time.perf_counter() - start:.1f} s)"
            )
    if args.json:
        with open(args.json, "w") as fh:
            json.dump([o.to_dict() for o in outcomes], fh, indent=1)
    sys.exit(0 if all(o.passed for o in outcomes) else 1)


if __name__ == "__main__":
    main()

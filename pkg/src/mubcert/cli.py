"""Command-line interface: ``mubcert {mub,certify,sweep,optimize,verify}``.

Exit codes: 0 success, 1 a verification suite failed, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import certify, oracles, qrac
from . import measurements as meas
from .errors import InvalidParams, MubcertError, UnknownSuite
from .serialize import CSV_DIGITS, dumps, fmt_float

log = logging.getLogger("mubcert")

BOUND_COLUMNS = {
    "entropy": "h_s_lower",
    "norms": "norm_sum_lower",
    "incompat": "incompat_upper",
    "uncertainty": "uncertainty_lower",
}


def _write(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


# -- sweep --------------------------------------------------------------------


def _evaluate(bound: str, p_bar: float, d: int) -> float | None:
    try:
        if bound == "entropy":
            return certify.overlap_entropy_lower_bound(p_bar, d)
        if bound == "norms":
            return certify.norm_sum_lower_bound(p_bar, d)
        if bound == "incompat":
            value = certify.incompatibility_bound_from_asp(p_bar, d)
            return value if value < 1 else None
        if bound == "uncertainty":
            return certify.uncertainty_bound_from_asp(p_bar, d)
    except MubcertError:
        return None
    raise ValueError(bound)


def _first_where(pred, lo: float, hi: float) -> float:
    """Smallest p in (lo, hi] with pred(p), assuming pred is monotone in p."""
    for _ in range(200):
        mid = (lo + hi) / 2
        if mid in (lo, hi):
            break
        if pred(mid):
            hi = mid
        else:
            lo = mid
    return hi


def nontrivial_region(bound: str, d: int) -> tuple[float, float]:
    p_q = certify.ideal_asp(d)
    p_0, h_thr = certify.thresholds(d)
    if bound == "entropy":
        return h_thr, p_q
    if bound == "norms":
        return math.nextafter(p_0, 1.0), p_q
    if bound == "incompat":
        lo = _first_where(lambda p: _evaluate("incompat", p, d) is not None, p_0, p_q)
        return lo, p_q
    if bound == "uncertainty":
        lo = _first_where(lambda p: certify.s_range(p, d)[1] < 1, 0.5, p_q)
        return lo, p_q
    if bound == "all":
        return min(nontrivial_region(b, d)[0] for b in BOUND_COLUMNS), p_q
    raise ValueError(bound)


@dataclass(frozen=True)
class SweepSpec:
    dim: int
    bound: str
    points: int
    range: tuple[float, float] | None = None

    def resolved_range(self) -> tuple[float, float]:
        return self.range if self.range is not None else nontrivial_region(self.bound, self.dim)

    def validate(self) -> None:
        if self.bound not in (*BOUND_COLUMNS, "all"):
            raise InvalidParams(f"unknown bound {self.bound!r}")
        if self.points < 2:
            raise InvalidParams("a sweep needs at least 2 points")
        lo, hi = self.resolved_range()
        if not 0.5 <= lo < hi <= certify.ideal_asp(self.dim) + certify.P_BAR_SLACK:
            raise InvalidParams(f"range [{lo}, {hi}] must satisfy 1/2 <= lo < hi <= p_Q")


def sweep_rows(spec: SweepSpec) -> tuple[list[str], list[list[float | None]]]:
    spec.validate()
    bounds = list(BOUND_COLUMNS) if spec.bound == "all" else [spec.bound]
    lo, hi = spec.resolved_range()
    grid = np.linspace(lo, hi, spec.points)
    grid[-1] = hi
    rows = [[float(p)] + [_evaluate(b, float(p), spec.dim) for b in bounds] for p in grid]
    return ["p_bar"] + [BOUND_COLUMNS[b] for b in bounds], rows


def sweep_csv(spec: SweepSpec) -> str:
    header, rows = sweep_rows(spec)
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join("" if v is None else fmt_float(v, CSV_DIGITS) for v in row))
    return "\n".join(lines) + "\n"


# -- commands -----------------------------------------------------------------


def cmd_mub(args) -> int:
    pair = meas.fourier_mub_pair(args.dim)
    _write(dumps(meas.pair_to_dict(pair)) + "\n", args.out)
    return 0


def cmd_certify(args) -> int:
    if args.measurements is not None:
        pair = meas.load_pair(args.measurements)
    elif args.dim is not None:
        pair = meas.fourier_mub_pair(args.dim)
    else:
        raise InvalidParams("give --measurements or --dim")
    if args.noise is not None:
        pair = meas.depolarize_pair(pair, args.noise)
    report = certify.certification_report(pair)
    _write(dumps(report.to_dict()) + "\n", args.out)
    return 0


def cmd_sweep(args) -> int:
    spec = SweepSpec(args.dim, args.bound, args.points, tuple(args.range) if args.range else None)
    if spec.range is not None:
        for b in BOUND_COLUMNS if spec.bound == "all" else [spec.bound]:
            lo, hi = nontrivial_region(b, spec.dim)
            if spec.range[0] < lo or spec.range[1] > hi:
                log.warning("range extends outside the non-trivial region of %s; empty cells emitted", b)
    _write(sweep_csv(spec), args.out)
    return 0


def cmd_optimize(args) -> int:
    result = qrac.seesaw_optimize(args.dim, args.restarts, args.iters, args.seed)
    _write(dumps(result.to_dict()) + "\n", args.out)
    gap = certify.ideal_asp(args.dim) - result.best_asp
    print(f"best_asp {fmt_float(result.best_asp, 17)} gap {fmt_float(gap, 6)}", file=sys.stderr)
    return 0


def cmd_verify(args) -> int:
    names = [n for n in oracles.SUITES] if args.suite == "all" else [args.suite]
    if args.suite != "all" and args.suite not in oracles.SUITES:
        raise UnknownSuite(f"unknown suite {args.suite!r}")
    outcomes = [oracles.run_suite(n, args.trials, args.dim, args.seed) for n in names]
    if args.json:
        print(dumps([o.to_dict() for o in outcomes]))
    else:
        for o in outcomes:
            status = "PASS" if o.passed else "FAIL"
            print(f"{status} {o.suite_name:<14} trials={o.trials} worst_margin={o.worst_margin:.3e}")
    return 0 if all(o.passed for o in outcomes) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mubcert", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mub", help="write the Fourier MUB pair as a measurement file")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_mub)

    p = sub.add_parser("certify", help="certification report for a measurement pair")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--measurements")
    src.add_argument("--dim", type=int)
    p.add_argument("--noise", type=float, help="depolarising visibility eta applied to both POVMs")
    p.add_argument("--out")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("sweep", help="tabulate ASP-derived bounds as CSV")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--bound", choices=[*BOUND_COLUMNS, "all"], default="all")
    p.add_argument("--points", type=int, default=101)
    p.add_argument("--range", type=float, nargs=2, metavar=("P_LO", "P_HI"))
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("optimize", help="seesaw search over POVM pairs")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--restarts", type=int, default=50)
    p.add_argument("--iters", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("verify", help="run randomised inequality suites")
    p.add_argument("--suite", default="all")
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--dim", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (MubcertError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

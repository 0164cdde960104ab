"""Optimal ASP and certified bounds for a depolarized Fourier pair."""

import argparse

import numpy as np

from mubcert import certify, qrac
from mubcert import measurements as meas


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--dim", type=int, default=4)
    parser.add_argument("--points", type=int, default=11)
    args = parser.parse_args()

    fourier = meas.fourier_mub_pair(args.dim)
    print("eta,p_bar,h_s_lower,incompat_upper,uncertainty_lower,incompat_direct")
    for eta in np.linspace(0, 1, args.points):
        pair = meas.depolarize_pair(fourier, float(eta))
        report = certify.certification_report(pair)
        b = report.asp_bounds
        direct = report.direct.incompat_upper_direct
        cells = [eta, report.p_bar, b.h_s_lower, b.incompat_upper, b.uncertainty_lower, direct]
        print(",".join("" if c is None else f"{c:.10g}" for c in cells))


if __name__ == "__main__":
    main()

"""Certification bounds as functions of the observed success probability.

Every entropy is in bits. Functions of ``(p_bar, d)`` are pure evaluators;
:func:`certification_report` combines them with quantities computed directly
from a measurement pair and records how much slack each bound leaves.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import measurements as meas
from . import qrac
from .errors import (
    DegenerateDenominator,
    InvalidDim,
    NontrivialRegionRequired,
    NotADistribution,
    OutOfRange,
    UncertaintyViolation,
)

ALPHA = 2 - math.sqrt(2)
P_BAR_SLACK = 1e-12
# inputs this close to p_Q are evaluated at p_Q itself: near p_Q the s-range
# has a square-root singularity that turns one ulp into ~1e-8
SNAP_TOL = 1e-14
DIST_TOL = 1e-8
NEG_TOL = 1e-12
DENOM_TOL = 1e-12
CONSISTENCY_TOL = 1e-8


def _check_dim(d) -> int:
    if int(d) != d or d < 2:
        raise InvalidDim(f"need an integer d >= 2, got {d}")
    return int(d)


def ideal_asp(d) -> float:
    d = _check_dim(d)
    return 0.5 * (1 + 1 / math.sqrt(d))


def thresholds(d) -> tuple[float, float]:
    """(p_0, entropy threshold): the norm-sum bound needs p_bar > p_0, the
    overlap-entropy bound is positive above the second value."""
    d = _check_dim(d)
    p_0 = 0.5 + math.sqrt((d * d - 1) * d) / (2 * d * d)
    return p_0, 0.5 + 1 / (2 * d * math.sqrt(d))


def _check_p(p_bar: float, d: int, low: float = 0.5, strict_low: bool = False) -> float:
    p_q = ideal_asp(d)
    if p_bar > p_q + P_BAR_SLACK or p_bar < low or (strict_low and p_bar == low):
        raise OutOfRange(f"p_bar = {p_bar!r} outside the admissible range for d = {d}")
    if abs(p_bar - p_q) <= SNAP_TOL:
        return p_q
    return p_bar


# -- entropies ----------------------------------------------------------------


def _as_distribution(dist) -> np.ndarray:
    p = np.asarray(dist, dtype=float).ravel()
    if p.size == 0 or np.any(p < -NEG_TOL) or abs(p.sum() - 1) > DIST_TOL:
        raise NotADistribution("entries must be non-negative and sum to 1")
    return np.clip(p, 0.0, None)


def renyi_half_entropy(dist) -> float:
    p = _as_distribution(dist)
    return 2 * math.log2(float(np.sqrt(p).sum()))


def shannon_entropy(dist) -> float:
    p = _as_distribution(dist)
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def outcome_entropy(povm: meas.Povm, rho) -> float:
    probs = np.einsum("iab,ba->i", povm.operators, np.asarray(rho)).real
    return shannon_entropy(probs)


def overlap_entropy(pair: meas.MeasurementPair) -> float:
    """Order-1/2 Renyi entropy of the overlap distribution {t_ij / d}."""
    t = meas.overlap_matrix(pair)
    return renyi_half_entropy(t / pair.dim)


# -- bounds in (p_bar, d) -----------------------------------------------------


def overlap_entropy_lower_bound(p_bar: float, d) -> float:
    d = _check_dim(d)
    p_bar = _check_p(p_bar, d, strict_low=True)
    arg = d * math.sqrt(d) * (2 * p_bar - 1)
    return max(0.0, 2 * math.log2(arg))


def s_range(p_bar: float, d) -> tuple[float, float]:
    """Interval that every generalised overlap ||sqrt(A_i) sqrt(B_j)|| must lie in."""
    d = _check_dim(d)
    p_bar = _check_p(p_bar, d)
    x = 2 * p_bar - 1
    if p_bar == ideal_asp(d):
        return 1 / math.sqrt(d), 1 / math.sqrt(d)
    radicand = max(0.0, d * (d * d - 1) * (1 - d * x * x))
    r = math.sqrt(radicand) / d
    clamp = lambda v: min(1.0, max(0.0, v))  # noqa: E731
    return clamp(x - r), clamp(x + r)


def norm_sum_lower_bound(p_bar: float, d) -> float:
    d = _check_dim(d)
    p_0, _ = thresholds(d)
    if p_bar <= p_0:
        raise NontrivialRegionRequired(f"p_bar = {p_bar!r} must exceed p_0 = {p_0!r}")
    p_bar = _check_p(p_bar, d)
    x = 2 * p_bar - 1
    root = math.sqrt(max(0.0, d**3 * x * x - (d * d - 1)))
    return d - (2 + math.sqrt(2)) / d * (1 - root)


def trace_square_upper_bound(q: float, d) -> float:
    """Upper bound on sum_i (tr A_i)^2 given sum_i ||A_i|| >= q."""
    d = _check_dim(d)
    if not -1e-9 <= q <= d + 1e-9:
        raise OutOfRange(f"q = {q!r} outside [0, {d}]")
    return d + (d - q) * (d - q + 1)


def incompatibility_bound_from_asp(p_bar: float, d) -> float:
    d = _check_dim(d)
    q = norm_sum_lower_bound(p_bar, d)
    _, s_max = s_range(p_bar, d)
    denom = q * q - d - (d - q) * (d - q + 1)
    if denom <= DENOM_TOL:
        raise DegenerateDenominator(f"denominator {denom!r} not positive at p_bar = {p_bar!r}")
    numer = 0.5 * d * d * (1 + s_max) - q * q / d
    return min(1.0, numer / denom)


def uncertainty_bound_from_asp(p_bar: float, d) -> float:
    _, s_max = s_range(p_bar, d)
    if s_max <= 0:
        raise OutOfRange("s_max vanished")
    return max(0.0, -2 * math.log2(s_max))


# -- direct quantities --------------------------------------------------------


def incompatibility_bound_direct(pair: meas.MeasurementPair) -> float:
    A, B = pair.a.operators, pair.b.operators
    d = pair.dim
    tr_a = np.trace(A, axis1=1, axis2=2).real
    tr_b = np.trace(B, axis1=1, axis2=2).real
    sq_a = np.einsum("iab,iba->", A, A).real
    sq_b = np.einsum("iab,iba->", B, B).real
    tr2 = float((tr_a**2).sum() + (tr_b**2).sum())
    max_norm = float(qrac.sum_norms(pair).max())
    denom = d * (sq_a + sq_b) - tr2
    if denom <= DENOM_TOL:
        raise DegenerateDenominator(f"denominator {denom!r}: both measurements trivial")
    return min(1.0, float((d * d * max_norm - tr2) / denom))


def uncertainty_bound_direct(pair: meas.MeasurementPair, rho=None):
    """-log2 max_ij ||sqrt(A_i) sqrt(B_j)||^2.

    With a state ``rho`` the pair ``(bound, H(A) + H(B))`` is returned instead,
    and :class:`UncertaintyViolation` is raised if the entropies undercut it.
    """
    s = meas.overlap_data(pair).s
    bound = max(0.0, -math.log2(float(s.max()) ** 2))
    if rho is None:
        return bound
    total = outcome_entropy(pair.a, rho) + outcome_entropy(pair.b, rho)
    if total < bound - 1e-9:
        raise UncertaintyViolation(f"H(A) + H(B) = {total!r} below bound {bound!r}")
    return bound, total


# -- report -------------------------------------------------------------------


@dataclass(frozen=True)
class AspBounds:
    d: int
    p_bar: float
    p_q: float
    p_0: float
    entropy_threshold: float
    s_min: float
    s_max: float
    h_s_lower: float
    norm_sum_lower: float | None
    incompat_upper: float | None
    uncertainty_lower: float


def asp_bounds(p_bar: float, d) -> AspBounds:
    """All ASP-derived bounds; fields outside their non-trivial region are
    ``None`` (optional bounds) or the trivial value (entropies 0, s in [0, 1])."""
    d = _check_dim(d)
    p_q = ideal_asp(d)
    p_0, h_thr = thresholds(d)
    if p_bar > p_q + P_BAR_SLACK:
        raise OutOfRange(f"p_bar = {p_bar!r} exceeds p_Q = {p_q!r}")
    if p_bar > 0.5:
        s_min, s_max = s_range(p_bar, d)
        h_s = overlap_entropy_lower_bound(p_bar, d)
        unc = uncertainty_bound_from_asp(p_bar, d)
    else:
        s_min, s_max, h_s, unc = 0.0, 1.0, 0.0, 0.0
    norm_lower = incompat = None
    if p_bar > p_0:
        norm_lower = norm_sum_lower_bound(p_bar, d)
        try:
            value = incompatibility_bound_from_asp(p_bar, d)
            incompat = value if value < 1 else None
        except DegenerateDenominator:
            pass
    return AspBounds(d, p_bar, p_q, p_0, h_thr, s_min, s_max, h_s, norm_lower, incompat, unc)


@dataclass(frozen=True)
class DirectQuantities:
    overlap_entropy: float
    norm_sum_a: float
    norm_sum_b: float
    overlap_data: meas.OverlapData
    incompat_upper_direct: float | None
    uncertainty_lower_direct: float
    mub_flag: bool


@dataclass(frozen=True)
class CertificationReport:
    dim: int
    p_bar: float
    asp_bounds: AspBounds
    direct: DirectQuantities
    degeneracy_flags: np.ndarray
    checks: dict = field(default_factory=dict)

    @property
    def consistent(self) -> bool:
        return all(c["passed"] for c in self.checks.values())

    @property
    def worst_slack(self) -> float:
        return min((c["slack"] for c in self.checks.values()), default=math.inf)

    def to_dict(self) -> dict:
        od = self.direct.overlap_data
        direct = asdict(self.direct)
        direct["overlap_data"] = {"t": od.t.tolist(), "s": od.s.tolist(), "n": od.n.tolist()}
        return {
            "log_base": 2,
            "entropy_unit": "bits",
            "dim": self.dim,
            "p_bar": self.p_bar,
            "asp_bounds": asdict(self.asp_bounds),
            "direct": direct,
            "degeneracy_flags": self.degeneracy_flags.tolist(),
            "checks": self.checks,
        }


def consistency_slacks(bounds: AspBounds, direct: DirectQuantities) -> dict[str, float]:
    """Slack of every direct quantity against its ASP-derived bound (>= 0 when sound)."""
    s = direct.overlap_data.s
    slacks = {
        "overlap_entropy": direct.overlap_entropy - bounds.h_s_lower,
        "s_min": float(s.min()) - bounds.s_min,
        "s_max": bounds.s_max - float(s.max()),
        "uncertainty": direct.uncertainty_lower_direct - bounds.uncertainty_lower,
    }
    if bounds.norm_sum_lower is not None:
        slacks["norm_sum_a"] = direct.norm_sum_a - bounds.norm_sum_lower
        slacks["norm_sum_b"] = direct.norm_sum_b - bounds.norm_sum_lower
    return slacks


def certification_report(pair: meas.MeasurementPair) -> CertificationReport:
    d = qrac._require_qrac_pair(pair)
    p_bar = qrac.optimal_asp(pair)
    bounds = asp_bounds(p_bar, d)
    try:
        incompat = incompatibility_bound_direct(pair)
    except DegenerateDenominator:
        incompat = None
    direct = DirectQuantities(
        overlap_entropy=overlap_entropy(pair),
        norm_sum_a=meas.povm_stats(pair.a).norm_sum,
        norm_sum_b=meas.povm_stats(pair.b).norm_sum,
        overlap_data=meas.overlap_data(pair),
        incompat_upper_direct=incompat,
        uncertainty_lower_direct=uncertainty_bound_direct(pair),
        mub_flag=meas.is_mub_pair(pair, meas.PROJECTIVE_TOL),
    )
    checks = {
        name: {"slack": float(v), "passed": bool(v >= -CONSISTENCY_TOL)}
        for name, v in consistency_slacks(bounds, direct).items()
    }
    return CertificationReport(
        dim=d,
        p_bar=p_bar,
        asp_bounds=bounds,
        direct=direct,
        degeneracy_flags=qrac.optimal_states(pair).degenerate,
        checks=checks,
    )

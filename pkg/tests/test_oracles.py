import math

import numpy as np
import pytest

from mubcert import certify, oracles
from mubcert import measurements as meas
from mubcert.errors import InvalidParams, UnknownSuite


def test_h_function_zeros():
    assert oracles.h_function(0.0, 0.0) == 0
    assert oracles.h_function(1.0, 1.0) == pytest.approx(0, abs=1e-15)


def test_h_lemma_grid():
    outcome = oracles.check_h_lemma(201)
    assert outcome.passed and outcome.trials == 201**2
    assert outcome.worst_margin >= -1e-12


def test_kittaneh_saturating_examples():
    P = np.diag([1.0, 0.0]).astype(complex)
    Q = np.diag([0.0, 1.0]).astype(complex)
    assert oracles.kittaneh_max_margin(P, P) == pytest.approx(0, abs=1e-15)
    assert oracles.kittaneh_max_margin(P, Q) == pytest.approx(0, abs=1e-15)
    assert oracles.kittaneh_quadratic_margin(P, P) == pytest.approx(0, abs=1e-15)


@pytest.mark.parametrize("a1, a2, b1, b2", [(0.3, 0.9, 0.5, 0.1), (1.0, 0.0, 0.2, 0.7), (0.4, 0.4, 0.4, 0.4)])
def test_kittaneh_quadratic_commuting(a1, a2, b1, b2):
    # diagonal case: ||A+B|| = max(a_k + b_k), ||sqrt(A) sqrt(B)|| = max sqrt(a_k b_k)
    A, B = np.diag([a1, a2]).astype(complex), np.diag([b1, b2]).astype(complex)
    na, nb = max(a1, a2), max(b1, b2)
    cross = max(math.sqrt(a1 * b1), math.sqrt(a2 * b2))
    rhs = 0.5 * (na + nb + math.sqrt((na - nb) ** 2 + 4 * cross**2))
    expected = rhs - max(a1 + b1, a2 + b2)
    assert expected >= 0
    assert oracles.kittaneh_quadratic_margin(A, B) == pytest.approx(expected, abs=1e-14)


def test_numerical_radius_margin_examples():
    jordan = np.array([[0, 1], [0, 0]], dtype=complex)
    assert oracles.numerical_radius_margin(jordan[None])[0] == pytest.approx(0.25, abs=1e-12)
    H = np.array([[1, 2j], [-2j, -3]])
    assert oracles.numerical_radius_margin(H[None])[0] == pytest.approx(0, abs=1e-8)


def test_asp_chain_equality_and_trivial():
    d = 3
    fourier = meas.fourier_mub_pair(d)
    links = oracles.asp_chain_margins(fourier.a.operators[None], fourier.b.operators[None])[0]
    np.testing.assert_allclose(links, 0, atol=1e-9)
    trivial = meas.trivial_povm(d).operators[None]
    links = oracles.asp_chain_margins(trivial, trivial)[0]
    # s = 1/d, n = 1 - 1/d: strong bound = 1/2 + (1/2d)(1 - alpha (1 - 1/d)) vs p = 1/d
    strong = 0.5 + (1 - oracles.ALPHA * (1 - 1 / d)) / (2 * d)
    assert links[0] == pytest.approx(strong - 1 / d, abs=1e-12)
    assert links[0] > 0


def test_schur_margin_examples():
    d = 4
    assert oracles.schur_margin(np.full(d * d, 1 / d), d) == pytest.approx(0, abs=1e-12)
    point = np.zeros(d * d)
    point[0] = d
    assert oracles.schur_margin(point, d) == pytest.approx(d * math.sqrt(d) - math.sqrt(d))


def test_trace_square_margin_examples():
    d = 4
    proj = meas.fourier_mub_pair(d).b.operators[None]
    assert oracles.trace_square_margin(proj)[0] == pytest.approx(0, abs=1e-12)
    trivial = meas.trivial_povm(d).operators[None]
    assert oracles.trace_square_margin(trivial)[0] == pytest.approx((d - 1) * d, abs=1e-12)


@pytest.mark.parametrize(
    "check",
    [
        oracles.check_kittaneh_max,
        oracles.check_kittaneh_quadratic,
        oracles.check_numerical_radius,
        oracles.check_asp_chain,
        oracles.check_schur_concavity,
        oracles.check_trace_square,
    ],
)
def test_suites_pass_small(check):
    outcome = check(300, 3, 11)
    assert outcome.passed, outcome
    assert outcome.trials == 300
    assert outcome.worst_random_margin >= -outcome.tolerance


def test_consistency_suite_small():
    outcome = oracles.check_certification_consistency(100, 4, 2)
    assert outcome.passed, outcome


def test_consistency_samples_reach_nontrivial_region():
    p_0, _ = certify.thresholds(4)
    hits = 0
    for k in range(200):
        pair, eta, weight = oracles.consistency_pair(meas.derive_seed(0, k), 4)
        assert 0 <= eta <= 1 and 0 <= weight <= 1
        hits += certify.certification_report(pair).p_bar > p_0
    assert hits >= 10


def test_consistency_endpoints():
    fourier = meas.fourier_mub_pair(4)
    report = certify.certification_report(fourier)
    assert all(abs(c["slack"]) <= 1e-9 for c in report.checks.values())
    assert oracles.consistency_margin(meas.depolarize_pair(fourier, 0.0)) >= -1e-8


def test_suite_determinism_and_replay():
    a = oracles.check_trace_square(200, 4, 5)
    b = oracles.check_trace_square(200, 4, 5)
    assert a == b
    # trial k replays in isolation from (seed, k)
    margins = [
        oracles.trace_square_margin(oracles._random_povms(oracles.trial_rng(5, k), 1, 4))[0]
        for k in range(200)
    ]
    assert min(margins) == a.worst_random_margin


def test_threads_do_not_change_results(monkeypatch):
    monkeypatch.setenv("MUBCERT_THREADS", "1")
    one = oracles.check_kittaneh_max(1200, 3, 4)
    monkeypatch.setenv("MUBCERT_THREADS", "3")
    three = oracles.check_kittaneh_max(1200, 3, 4)
    assert one == three


def test_failing_margin_reports_seed():
    outcome = oracles._outcome("x", [0.1, -1.0, -1.0], [10, 20, 30], 1e-9)
    assert not outcome.passed
    assert outcome.worst_case_seed == 20


def test_run_suite_dispatch():
    assert oracles.run_suite("hlemma", 10_000, 4, 0).trials == 10_000
    with pytest.raises(UnknownSuite):
        oracles.run_suite("nope", 10, 4, 0)
    with pytest.raises(InvalidParams):
        oracles.check_schur_concavity(0, 4, 0)

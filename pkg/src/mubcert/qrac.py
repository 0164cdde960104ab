"""The 2^d -> 1 quantum random access code.

Preparations are indexed by the two dits ``(i, j)``; the receiver measures
``{A_i}`` to guess ``i`` and ``{B_j}`` to guess ``j``. States are stored as an
array of shape ``(d, d, dim, dim)``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import linalg
from .errors import InvalidParams
from .measurements import (
    MeasurementPair,
    Povm,
    derive_seed,
    pair_to_dict,
    random_povm_from_rng,
    validate_povm,
)
from .errors import DegenerateSample

log = logging.getLogger(__name__)

STATE_TOL = 1e-9

INNER_ITERS = 50
INNER_TOL = 1e-10
OUTER_TOL = 1e-9
DECREASE_GUARD = 1e-12
REGULARIZER = 1e-12


def _require_qrac_pair(pair: MeasurementPair) -> int:
    d = pair.dim
    if pair.a.outcomes != d or pair.b.outcomes != d:
        raise InvalidParams(
            f"QRAC needs d = {d} outcomes per POVM, got {pair.a.outcomes} and {pair.b.outcomes}"
        )
    return d


@dataclass(frozen=True)
class QracConfiguration:
    pair: MeasurementPair
    states: np.ndarray

    def __post_init__(self):
        d = _require_qrac_pair(self.pair)
        states = np.asarray(self.states, dtype=np.complex128)
        if states.shape != (d, d, d, d):
            raise InvalidParams(f"states must have shape {(d, d, d, d)}, got {states.shape}")
        flat = states.reshape(d * d, d, d)
        if np.any(np.abs(flat - linalg.dagger(flat)) > STATE_TOL):
            raise InvalidParams("states must be Hermitian")
        if np.any(np.linalg.eigvalsh(flat)[:, 0] < -STATE_TOL):
            raise InvalidParams("states must be positive semidefinite")
        if np.any(np.abs(np.trace(flat, axis1=1, axis2=2) - 1) > STATE_TOL):
            raise InvalidParams("states must have unit trace")
        object.__setattr__(self, "states", states)


def asp(config: QracConfiguration) -> float:
    """Average success probability (1/2d^2) sum_ij tr[rho_ij (A_i + B_j)]."""
    A, B = config.pair.a.operators, config.pair.b.operators
    d = A.shape[0]
    total = np.einsum("ijab,iba->", config.states, A) + np.einsum("ijab,jba->", config.states, B)
    return float(total.real) / (2 * d * d)


class OptimalStates(NamedTuple):
    states: np.ndarray
    degenerate: np.ndarray


def optimal_states(pair: MeasurementPair) -> OptimalStates:
    """Top eigenprojector of A_i + B_j for every (i, j).

    ``degenerate[i, j]`` is set where the top eigenvalue was not separated
    from the next one by more than 1e-10; the eigensolver's choice is kept.
    """
    d = _require_qrac_pair(pair)
    states = np.empty((d, d, d, d), dtype=np.complex128)
    degenerate = np.zeros((d, d), dtype=bool)
    for i, A in enumerate(pair.a):
        for j, B in enumerate(pair.b):
            top = linalg.top_eigenpair(A + B)
            states[i, j] = np.outer(top.vector, top.vector.conj())
            degenerate[i, j] = top.degenerate
    return OptimalStates(states, degenerate)


def sum_norms(pair: MeasurementPair) -> np.ndarray:
    """Matrix of ||A_i + B_j||, from the top eigenvalue of each PSD sum."""
    sums = pair.a.operators[:, None] + pair.b.operators[None, :]
    return np.linalg.eigvalsh(sums)[..., -1]


def optimal_asp(pair: MeasurementPair) -> float:
    d = _require_qrac_pair(pair)
    return float(sum_norms(pair).sum()) / (2 * d * d)


def optimal_configuration(pair: MeasurementPair) -> QracConfiguration:
    return QracConfiguration(pair, optimal_states(pair).states)


# -- seesaw -------------------------------------------------------------------


def _inv_sqrt(L: np.ndarray) -> np.ndarray:
    L = (L + L.conj().T) / 2
    w, V = np.linalg.eigh(L)
    if w[0] < REGULARIZER:
        L = L + REGULARIZER * np.eye(L.shape[0])
        w, V = np.linalg.eigh(L)
    return (V / np.sqrt(w)) @ V.conj().T


def improve_measurement(ops: np.ndarray, R: np.ndarray) -> np.ndarray:
    """Increase sum_i tr(R_i A_i) over POVMs by the fixed-point iteration
    A_i <- L^{-1/2} R_i A_i R_i L^{-1/2}, L = sum_i R_i A_i R_i.

    An iterate that lowers the objective by more than 1e-12 is discarded and
    the iteration stops there.
    """
    objective = float(np.einsum("iab,iba->", R, ops).real)
    for _ in range(INNER_ITERS):
        X = R @ ops @ R
        Linv = _inv_sqrt(X.sum(axis=0))
        new = Linv @ X @ Linv
        new = (new + linalg.dagger(new)) / 2
        new_objective = float(np.einsum("iab,iba->", R, new).real)
        if new_objective < objective - DECREASE_GUARD:
            break
        change = float(np.max(np.abs(new - ops)))
        ops, objective = new, new_objective
        if change < INNER_TOL:
            break
    return ops


@dataclass
class _Restart:
    asp: float
    config: QracConfiguration
    iterations: int
    converged: bool


def _run_restart(a: Povm, b: Povm, max_outer_iters: int) -> _Restart:
    A, B = a.operators, b.operators
    d = A.shape[1]
    pair = MeasurementPair(a, b)
    states = optimal_states(pair).states
    value = asp(QracConfiguration(pair, states))
    iterations, converged = 0, False
    for iterations in range(1, max_outer_iters + 1):
        A = improve_measurement(A, states.sum(axis=1))
        B = improve_measurement(B, states.sum(axis=0))
        candidate = MeasurementPair(
            Povm(d, _readonly(A)), Povm(d, _readonly(B))
        )
        new_states = optimal_states(candidate).states
        new_value = asp(QracConfiguration(candidate, new_states))
        if new_value < value - DECREASE_GUARD:
            break
        gain = new_value - value
        pair, states, value = candidate, new_states, new_value
        if gain < OUTER_TOL:
            converged = True
            break
    # final iterates are re-validated so the reported pair is a checked POVM pair
    pair = MeasurementPair(validate_povm(pair.a.operators), validate_povm(pair.b.operators))
    config = QracConfiguration(pair, optimal_states(pair).states)
    return _Restart(asp(config), config, iterations, converged)


def _readonly(ops: np.ndarray) -> np.ndarray:
    ops = np.array(ops)
    ops.setflags(write=False)
    return ops


@dataclass(frozen=True)
class SeesawResult:
    best_asp: float
    best_configuration: QracConfiguration
    restarts_run: int
    iterations_per_restart: list[int]
    converged: bool
    restart_asps: list[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        states = self.best_configuration.states
        return {
            "best_asp": self.best_asp,
            "restarts_run": self.restarts_run,
            "iterations_per_restart": list(self.iterations_per_restart),
            "converged": self.converged,
            "restart_asps": list(self.restart_asps),
            "best_configuration": {
                "pair": pair_to_dict(self.best_configuration.pair),
                "states": [
                    [[[[z.real, z.imag] for z in row] for row in rho] for rho in line]
                    for line in states
                ],
            },
        }


def _initial_pair(d: int, seed: int) -> tuple[Povm, Povm]:
    for attempt in range(100):
        rng = np.random.default_rng(derive_seed(seed, attempt))
        try:
            return random_povm_from_rng(rng, d, d), random_povm_from_rng(rng, d, d)
        except DegenerateSample:
            continue
    raise DegenerateSample("could not draw a non-degenerate starting pair")


def seesaw_optimize(
    d: int,
    restarts: int,
    max_outer_iters: int,
    seed: int,
    initial_pair: MeasurementPair | None = None,
) -> SeesawResult:
    """Alternate optimal preparations with measurement updates.

    Each restart starts from a random POVM pair drawn with a seed derived from
    ``(seed, restart index)``, or from ``initial_pair`` when given.
    """
    if d < 2 or restarts < 1 or max_outer_iters < 1:
        raise InvalidParams(f"need d >= 2, restarts >= 1, max_outer_iters >= 1; got {d}, {restarts}, {max_outer_iters}")
    if initial_pair is not None:
        if initial_pair.dim != d:
            raise InvalidParams("initial pair has the wrong dimension")
        _require_qrac_pair(initial_pair)
    runs = []
    for r in range(restarts):
        if initial_pair is not None:
            a, b = initial_pair.a, initial_pair.b
        else:
            a, b = _initial_pair(d, derive_seed(seed, r))
        runs.append(_run_restart(a, b, max_outer_iters))
        log.debug("restart %d: asp=%.12f after %d iterations", r, runs[-1].asp, runs[-1].iterations)
    # ties resolve to the lowest restart index
    best = max(range(restarts), key=lambda k: (runs[k].asp, -k))
    return SeesawResult(
        best_asp=runs[best].asp,
        best_configuration=runs[best].config,
        restarts_run=restarts,
        iterations_per_restart=[run.iterations for run in runs],
        converged=runs[best].converged,
        restart_asps=[run.asp for run in runs],
    )

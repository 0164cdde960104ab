"""POVMs, the Fourier MUB pair, depolarising noise and pairwise overlaps."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import linalg
from .errors import (
    DegenerateSample,
    DimMismatch,
    EtaOutOfRange,
    InvalidDim,
    NotComplete,
    NotHermitian,
    NotPsd,
    ParseError,
)

COMPLETENESS_TOL = 1e-9
PROJECTIVE_TOL = 1e-9
SAMPLE_EIG_FLOOR = 1e-12


@dataclass(frozen=True)
class Povm:
    dim: int
    operators: np.ndarray  # shape (outcomes, dim, dim)

    @property
    def outcomes(self) -> int:
        return self.operators.shape[0]

    def __iter__(self):
        return iter(self.operators)

    def __getitem__(self, i) -> np.ndarray:
        return self.operators[i]


@dataclass(frozen=True)
class MeasurementPair:
    a: Povm
    b: Povm

    def __post_init__(self):
        if self.a.dim != self.b.dim:
            raise DimMismatch(f"POVM dimensions differ: {self.a.dim} vs {self.b.dim}")

    @property
    def dim(self) -> int:
        return self.a.dim


@dataclass(frozen=True)
class OverlapData:
    t: np.ndarray
    s: np.ndarray
    n: np.ndarray


def _freeze(ops: np.ndarray) -> np.ndarray:
    ops = np.array(ops, dtype=np.complex128)
    ops.setflags(write=False)
    return ops


def validate_povm(candidate) -> Povm:
    """Check positivity and completeness; never repairs its input."""
    ops = [linalg.as_matrix(op) for op in candidate]
    if not ops:
        raise ValueError("a POVM needs at least one operator")
    d = ops[0].shape[0]
    for k, op in enumerate(ops):
        if op.shape != (d, d):
            raise DimMismatch(f"operator {k} has shape {op.shape}, expected {(d, d)}")
        if not linalg.is_hermitian(op):
            raise NotHermitian(f"operator {k} is not Hermitian")
        low = np.linalg.eigvalsh((op + op.conj().T) / 2)[0]
        if low < -linalg.PSD_TOL:
            raise NotPsd(f"operator {k} has eigenvalue {low:.3e}")
    defect = np.linalg.norm(sum(ops) - np.eye(d))
    if defect > COMPLETENESS_TOL:
        raise NotComplete(f"operators sum to identity only within {defect:.3e}")
    return Povm(dim=d, operators=_freeze(np.stack(ops)))


def _projectors(vectors: np.ndarray) -> np.ndarray:
    # columns of `vectors` -> stack of rank-1 projectors
    return np.einsum("ik,jk->kij", vectors, vectors.conj())


def fourier_mub_pair(d: int) -> MeasurementPair:
    """Computational basis paired with the Fourier basis in dimension d."""
    if d < 2:
        raise InvalidDim(f"need d >= 2, got {d}")
    k = np.arange(d)
    fourier = np.exp(2j * np.pi * np.outer(k, k) / d) / np.sqrt(d)
    a = validate_povm(_projectors(np.eye(d, dtype=np.complex128)))
    b = validate_povm(_projectors(fourier))
    return MeasurementPair(a, b)


def trivial_povm(d: int, outcomes: int | None = None) -> Povm:
    outcomes = d if outcomes is None else outcomes
    return validate_povm([np.eye(d) / outcomes] * outcomes)


def is_rank1_projective(povm: Povm, tol: float = PROJECTIVE_TOL) -> bool:
    for op in povm:
        if np.linalg.norm(op @ op - op) > tol or abs(np.trace(op).real - 1) > tol:
            return False
    return True


def is_mub_pair(pair: MeasurementPair, tol: float) -> bool:
    if not (is_rank1_projective(pair.a, tol) and is_rank1_projective(pair.b, tol)):
        return False
    t = overlap_matrix(pair)
    return bool(np.all(np.abs(t - 1 / pair.dim) <= tol))


def depolarize(povm: Povm, eta: float) -> Povm:
    if not 0.0 <= eta <= 1.0:
        raise EtaOutOfRange(f"eta must lie in [0, 1], got {eta}")
    d = povm.dim
    traces = np.trace(povm.operators, axis1=1, axis2=2).real
    noisy = eta * povm.operators + (1 - eta) * traces[:, None, None] * np.eye(d) / d
    return validate_povm(noisy)


def depolarize_pair(pair: MeasurementPair, eta: float) -> MeasurementPair:
    return MeasurementPair(depolarize(pair.a, eta), depolarize(pair.b, eta))


def mix_povms(p: Povm, q: Povm, weight: float) -> Povm:
    """Convex combination ``weight * p + (1 - weight) * q`` (same outcome count)."""
    return validate_povm(weight * p.operators + (1 - weight) * q.operators)


def overlap_matrix(pair: MeasurementPair) -> np.ndarray:
    return np.einsum("iab,jba->ij", pair.a.operators, pair.b.operators).real


def overlap_data(pair: MeasurementPair) -> OverlapData:
    A, B = pair.a.operators, pair.b.operators
    t = overlap_matrix(pair)
    sa, sb = linalg.batch_psd_sqrt(A), linalg.batch_psd_sqrt(B)
    products = sa[:, None] @ sb[None, :]
    s = linalg.batch_operator_norm(products)
    na, nb = linalg.batch_operator_norm(A), linalg.batch_operator_norm(B)
    n = 1 - (na[:, None] + nb[None, :]) / 2
    return OverlapData(t=t, s=s, n=n)


@dataclass(frozen=True)
class PovmStats:
    norm_sum: float
    traces: list[float]
    norms: list[float]
    rank1_projective: bool


def povm_stats(povm: Povm) -> PovmStats:
    norms = linalg.batch_operator_norm(povm.operators)
    traces = np.trace(povm.operators, axis1=1, axis2=2).real
    return PovmStats(
        norm_sum=float(norms.sum()),
        traces=[float(x) for x in traces],
        norms=[float(x) for x in norms],
        rank1_projective=is_rank1_projective(povm),
    )


def derive_seed(seed: int, index: int) -> int:
    """Per-sample seed as a pure function of (master seed, index)."""
    state = np.random.SeedSequence([int(seed) & (2**64 - 1), int(index)]).generate_state(2, np.uint32)
    return int(state[0]) | (int(state[1]) << 32)


def ginibre(rng: np.random.Generator, shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def random_povm_from_rng(rng: np.random.Generator, d: int, outcomes: int) -> Povm:
    M = ginibre(rng, (outcomes, d, d))
    G = M @ linalg.dagger(M)
    S = G.sum(axis=0)
    w, V = np.linalg.eigh(S)
    if w[0] < SAMPLE_EIG_FLOOR:
        raise DegenerateSample(f"frame operator has eigenvalue {w[0]:.3e}")
    S_inv_half = (V / np.sqrt(w)) @ V.conj().T
    A = S_inv_half @ G @ S_inv_half
    return validate_povm((A + linalg.dagger(A)) / 2)


def random_povm(d: int, outcomes: int, seed: int) -> Povm:
    """Ginibre POVM: A_i = S^{-1/2} M_i M_i^dag S^{-1/2}, S = sum_i M_i M_i^dag."""
    if d < 1 or outcomes < 1:
        raise InvalidDim(f"need d >= 1 and outcomes >= 1, got {d}, {outcomes}")
    return random_povm_from_rng(np.random.default_rng(seed), d, outcomes)


def random_pair(d: int, seed: int) -> MeasurementPair:
    rng = np.random.default_rng(seed)
    return MeasurementPair(random_povm_from_rng(rng, d, d), random_povm_from_rng(rng, d, d))


# -- file format ------------------------------------------------------------


def _encode_op(op: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in op]


def _decode_op(raw, d: int, where: str) -> np.ndarray:
    try:
        arr = np.asarray(raw, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{where}: entries must be [re, im] pairs") from exc
    if arr.shape != (d, d, 2):
        raise ParseError(f"{where}: expected shape ({d}, {d}, 2), got {arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]


def pair_to_dict(pair: MeasurementPair) -> dict:
    return {
        "dim": pair.dim,
        "A": [_encode_op(op) for op in pair.a],
        "B": [_encode_op(op) for op in pair.b],
    }


def pair_from_dict(doc) -> MeasurementPair:
    if not isinstance(doc, dict) or not {"dim", "A", "B"} <= doc.keys():
        raise ParseError("measurement document needs keys 'dim', 'A', 'B'")
    d = doc["dim"]
    if not isinstance(d, int) or isinstance(d, bool) or d < 1:
        raise ParseError(f"'dim' must be a positive integer, got {d!r}")
    povms = []
    for key in ("A", "B"):
        ops = doc[key]
        if not isinstance(ops, list) or not ops:
            raise ParseError(f"'{key}' must be a non-empty list of operators")
        povms.append(validate_povm([_decode_op(op, d, f"{key}[{k}]") for k, op in enumerate(ops)]))
    return MeasurementPair(*povms)


def save_pair(pair: MeasurementPair, path) -> None:
    Path(path).write_text(json.dumps(pair_to_dict(pair), indent=1) + "\n")


def load_pair(path) -> MeasurementPair:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    try:
        return pair_from_dict(doc)
    except Exception as exc:
        raise type(exc)(f"{path}: {exc}") from exc

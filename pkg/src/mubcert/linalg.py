"""Dense complex matrix primitives.

Matrices are plain ``numpy`` arrays of dtype ``complex128``; :func:`as_matrix`
is the single entry point that enforces the square/finite contract. The
eigensolver is LAPACK's ``zheevd`` via :func:`numpy.linalg.eigh`, followed by
a phase normalisation so that eigenvectors are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import NotHermitian, NotPsd

HERMITIAN_TOL = 1e-9
PSD_TOL = 1e-9
DEGENERACY_TOL = 1e-10
PHASE_TOL = 1e-10

RADIUS_GRID = 720
RADIUS_THETA_TOL = 1e-10

_INV_PHI = (np.sqrt(5.0) - 1.0) / 2.0


def as_matrix(M) -> np.ndarray:
    """Coerce ``M`` to a finite square complex128 array."""
    arr = np.asarray(M, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
        raise ValueError(f"expected a non-empty square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("matrix has non-finite entries")
    return arr


def dagger(M: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(M, -1, -2))


def frobenius_norm(M) -> float:
    M = as_matrix(M)
    return float(np.sqrt(np.sum(np.abs(M) ** 2)))


def operator_norm(M) -> float:
    """Largest singular value, as sqrt of the top eigenvalue of M^dagger M."""
    M = as_matrix(M)
    top = np.linalg.eigvalsh(dagger(M) @ M)[-1]
    return float(np.sqrt(max(top, 0.0)))


def is_hermitian(M: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    scale = max(1.0, float(np.linalg.norm(M)))
    return float(np.linalg.norm(M - dagger(M))) <= tol * scale


def _check_hermitian(M: np.ndarray) -> np.ndarray:
    if not is_hermitian(M):
        raise NotHermitian("matrix is not Hermitian within tolerance")
    return (M + dagger(M)) / 2


def _fix_phases(V: np.ndarray) -> np.ndarray:
    # first component above PHASE_TOL of every column made real positive
    V = V.copy()
    for k in range(V.shape[1]):
        col = V[:, k]
        idx = int(np.argmax(np.abs(col) > PHASE_TOL))
        z = col[idx]
        if abs(z) > 0:
            V[:, k] = col * (abs(z) / z)
            V[idx, k] = abs(z)
    return V


@dataclass(frozen=True)
class HermitianEigen:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        V = self.eigenvectors
        return (V * self.eigenvalues) @ dagger(V)


def hermitian_eigen(M) -> HermitianEigen:
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending.

    Raises :class:`NotHermitian` if ``M`` deviates from its adjoint by more
    than ``1e-9 * max(1, ||M||_F)``.
    """
    H = _check_hermitian(as_matrix(M))
    w, V = np.linalg.eigh(H)
    return HermitianEigen(eigenvalues=w, eigenvectors=_fix_phases(V))


class TopEigenpair(NamedTuple):
    value: float
    vector: np.ndarray
    degenerate: bool


def top_eigenpair(M) -> TopEigenpair:
    eig = hermitian_eigen(M)
    w = eig.eigenvalues
    degenerate = len(w) > 1 and (w[-1] - w[-2]) <= DEGENERACY_TOL
    return TopEigenpair(float(w[-1]), eig.eigenvectors[:, -1], bool(degenerate))


def psd_sqrt(M) -> np.ndarray:
    """Principal square root of a PSD matrix.

    Eigenvalues in ``[-1e-9, 0)`` are treated as rounding noise and clamped to
    zero; anything more negative raises :class:`NotPsd`.
    """
    eig = hermitian_eigen(M)
    w = eig.eigenvalues
    if w[0] < -PSD_TOL:
        raise NotPsd(f"smallest eigenvalue {w[0]:.3e} below -{PSD_TOL}")
    V = eig.eigenvectors
    return (V * np.sqrt(np.clip(w, 0.0, None))) @ dagger(V)


def batch_psd_sqrt(Ms: np.ndarray) -> np.ndarray:
    """Square roots of a stack of PSD matrices (no validation)."""
    w, V = np.linalg.eigh((Ms + dagger(Ms)) / 2)
    return (V * np.sqrt(np.clip(w, 0.0, None))[..., None, :]) @ dagger(V)


def batch_operator_norm(Ms: np.ndarray) -> np.ndarray:
    top = np.linalg.eigvalsh(dagger(Ms) @ Ms)[..., -1]
    return np.sqrt(np.clip(top, 0.0, None))


def _rotated_top(O: np.ndarray, theta) -> np.ndarray:
    phase = np.exp(1j * np.asarray(theta))[..., None, None]
    H = (phase * O + np.conj(phase) * dagger(O)) / 2
    return np.linalg.eigvalsh(H)[..., -1]


def batch_numerical_radius(Os: np.ndarray, chunk: int = 256) -> np.ndarray:
    """Numerical radius of each matrix in a stack of shape ``(T, n, n)``.

    A 720-point grid over theta locates the maximiser of the top eigenvalue of
    (e^{i theta} O + e^{-i theta} O^dag) / 2; golden-section search on the two
    neighbouring grid cells refines it to 1e-10 in theta.
    """
    Os = np.asarray(Os, dtype=np.complex128)
    T = Os.shape[0]
    thetas = np.linspace(0.0, 2 * np.pi, RADIUS_GRID, endpoint=False)
    k = np.empty(T, dtype=int)
    best = np.empty(T)
    for start in range(0, T, chunk):
        block = _rotated_top(Os[start : start + chunk, None], thetas)
        k[start : start + chunk] = np.argmax(block, axis=1)
        best[start : start + chunk] = block.max(axis=1)
    step = 2 * np.pi / RADIUS_GRID
    lo, hi = thetas[k] - step, thetas[k] + step
    x1 = hi - _INV_PHI * (hi - lo)
    x2 = lo + _INV_PHI * (hi - lo)
    f1, f2 = _rotated_top(Os, x1), _rotated_top(Os, x2)
    while np.max(hi - lo) > RADIUS_THETA_TOL:
        left = f1 < f2
        # maximum lies in [x1, hi] where f1 < f2, else in [lo, x2]
        lo = np.where(left, x1, lo)
        hi = np.where(left, hi, x2)
        new_x = np.where(left, lo + _INV_PHI * (hi - lo), hi - _INV_PHI * (hi - lo))
        f_new = _rotated_top(Os, new_x)
        x1, f1, x2, f2 = (
            np.where(left, x2, new_x),
            np.where(left, f2, f_new),
            np.where(left, new_x, x1),
            np.where(left, f_new, f1),
        )
        best = np.maximum(best, np.maximum(f1, f2))
    return best


def numerical_radius(O) -> float:
    """w(O) = max over unit x of |<x, O x>|."""
    return float(batch_numerical_radius(as_matrix(O)[None])[0])

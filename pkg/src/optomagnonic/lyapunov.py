"""Steady-state covariance from ``A V + V A^T = -D``."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from .dynamics import ORDERING, stability


class UnstableSystemError(ValueError):
    def __init__(self, max_real_eig: float):
        super().__init__(f"drift matrix is not stable (max Re(eig) = {max_real_eig:.6e} rad/s)")
        self.max_real_eig = max_real_eig


class LyapunovError(RuntimeError):
    pass


@dataclass(frozen=True)
class CovarianceMatrix:
    """Real symmetric covariance matrix, vacuum variance 1/2.

    ``ordering`` lists the quadratures as ``(X_1, Y_1, ..., X_n, Y_n)``.
    """

    V: np.ndarray
    ordering: tuple = ORDERING
    warning: Optional[str] = None

    @property
    def n(self) -> int:
        return self.V.shape[0] // 2


def symplectic_form(n: int) -> np.ndarray:
    return np.kron(np.eye(n), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def is_physical(V: np.ndarray, tol: float = 1e-9) -> bool:
    """Uncertainty principle ``V + (i/2) Omega >= 0`` (within ``tol``)."""
    V = np.asarray(V)
    n = V.shape[0] // 2
    H = V + 0.5j * symplectic_form(n)
    return bool(np.linalg.eigvalsh(H).min() >= -tol)


def residual(A: np.ndarray, D: np.ndarray, V: np.ndarray) -> float:
    """``||A V + V A^T + D||_F / max(1, ||D||_F)``."""
    R = A @ V + V @ A.T + D
    return float(np.linalg.norm(R) / max(1.0, np.linalg.norm(D)))


def _solve_kronecker(A: np.ndarray, D: np.ndarray) -> np.ndarray:
    n = A.shape[0]
    eye = np.eye(n)
    # column-major vec: vec(A V) = (I kron A) vec V, vec(V A^T) = (A kron I) vec V
    K = np.kron(eye, A) + np.kron(A, eye)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
            lu, piv = scipy.linalg.lu_factor(K, check_finite=False)
    except (ValueError, np.linalg.LinAlgError) as exc:
        raise LyapunovError(f"Lyapunov operator factorisation failed: {exc}") from exc
    if np.any(np.diag(lu) == 0):
        raise LyapunovError("Lyapunov operator is singular")
    vec = scipy.linalg.lu_solve((lu, piv), -D.reshape(-1, order="F"), check_finite=False)
    return vec.reshape((n, n), order="F")


def solve_lyapunov(A: np.ndarray, D: np.ndarray, method: str = "kronecker", check_stability: bool = True) -> CovarianceMatrix:
    """Solve ``A V + V A^T = -D`` for a stable ``A``.

    ``method`` is ``"kronecker"`` (dense solve of the vectorised equation)
    or ``"schur"`` (Bartels-Stewart via scipy).
    """
    A = np.asarray(A, dtype=float)
    D = np.asarray(D, dtype=float)
    warning = None
    if check_stability:
        report = stability(A)
        if not report.stable:
            raise UnstableSystemError(report.max_real_eig)
        if report.marginal:
            warning = (
                f"near-marginal stability (max Re(eig) = {report.max_real_eig:.3e} rad/s); "
                "covariance may be ill-conditioned"
            )

    if method == "kronecker":
        V = _solve_kronecker(A, D)
    elif method == "schur":
        V = scipy.linalg.solve_continuous_lyapunov(A, -D)
    else:
        raise ValueError(f"unknown Lyapunov method {method!r}")

    if not np.all(np.isfinite(V)):
        raise LyapunovError("Lyapunov solve produced non-finite entries")
    scale = max(np.max(np.abs(V)), np.finfo(float).tiny)
    asym = np.max(np.abs(V - V.T)) / scale
    if asym > 1e-9:
        raise LyapunovError(f"solution asymmetric beyond tolerance ({asym:.2e}); A is ill-conditioned")
    V = 0.5 * (V + V.T)
    ordering = ORDERING if A.shape[0] == len(ORDERING) else tuple(
        f"{q}_{k + 1}" for k in range(A.shape[0] // 2) for q in ("X", "Y")
    )
    return CovarianceMatrix(V, ordering, warning)

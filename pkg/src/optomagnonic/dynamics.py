"""Drift and diffusion matrices of the linearised fluctuations, and stability.

Quadrature order is ``(X_a, Y_a, X_c, Y_c, X_m, Y_m, q, p)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.linalg

from .model import EffectiveParams

ORDERING = ("X_a", "Y_a", "X_c", "Y_c", "X_m", "Y_m", "q", "p")
CONVENTIONS = ("paper", "symmetric")

# Below this |max Re(lambda)| in rad/s a stable point is flagged as marginal.
MARGINAL_RATE = 1e3

# Sign of each mode's radiation-pressure / magnetostrictive coupling.
_COUPLING_SIGN = {"a": 1.0, "c": -1.0, "m": -1.0}
_MODE_INDEX = {"a": 0, "c": 2, "m": 4}
_Q, _P = 6, 7


@dataclass(frozen=True)
class DriftDiffusion:
    A: np.ndarray
    D: np.ndarray
    ordering: tuple = ORDERING


@dataclass(frozen=True)
class StabilityReport:
    stable: bool
    max_real_eig: float
    eigenvalues: np.ndarray
    marginal: bool = False


def build_drift(p: EffectiveParams, convention: str = "paper") -> np.ndarray:
    """8x8 drift matrix.

    ``paper`` couples ``q`` into the X rows and reads the Y quadratures in
    the ``p`` row. ``symmetric`` is the same dynamics in quadratures rotated
    by 90 degrees per optical/magnon mode: ``q`` drives the Y rows and the
    ``p`` row reads X. Both have the same spectrum and the same
    entanglement.
    """
    if convention not in CONVENTIONS:
        raise ValueError(f"unknown drift convention {convention!r}")
    A = np.zeros((8, 8))
    modes = (
        ("a", p.Delta_a, p.kappa_a, p.G_a),
        ("c", p.Delta_c, p.kappa_c, p.G_c),
        ("m", p.Delta_m, p.kappa_m, p.G_m),
    )
    for label, delta, kappa, coupling in modes:
        x = _MODE_INDEX[label]
        y = x + 1
        s = _COUPLING_SIGN[label]
        A[x, x] = -kappa
        A[x, y] = delta
        A[y, x] = -delta
        A[y, y] = -kappa
        if convention == "paper":
            A[x, _Q] = s * coupling
            A[_P, y] = -s * coupling
        else:
            A[y, _Q] = s * coupling
            A[_P, x] = s * coupling
    A[_Q, _P] = p.omega_b
    A[_P, _Q] = -p.omega_b
    A[_P, _P] = -p.gamma_b
    return A


def build_diffusion(p: EffectiveParams) -> np.ndarray:
    magnon = p.kappa_m * (2.0 * p.n_m + 1.0)
    return np.diag([
        p.kappa_a, p.kappa_a,
        p.kappa_c, p.kappa_c,
        magnon, magnon,
        0.0, p.gamma_b * (2.0 * p.n_b + 1.0),
    ])


def build(p: EffectiveParams, convention: str = "paper") -> DriftDiffusion:
    return DriftDiffusion(build_drift(p, convention), build_diffusion(p))


def stability(A: np.ndarray) -> StabilityReport:
    """Eigenvalue stability test: stable iff every real part is negative."""
    A = np.asarray(A, dtype=float)
    if not np.all(np.isfinite(A)):
        raise ValueError("drift matrix has non-finite entries")
    balanced, _ = scipy.linalg.matrix_balance(A, permute=False)
    try:
        eigenvalues = scipy.linalg.eigvals(balanced, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(f"eigenvalue solver failed: {exc}") from exc
    if not np.all(np.isfinite(eigenvalues)):
        raise np.linalg.LinAlgError("eigenvalue solver returned non-finite values")
    max_real = float(np.max(eigenvalues.real))
    stable = max_real < 0
    return StabilityReport(
        stable=stable,
        max_real_eig=max_real,
        eigenvalues=eigenvalues,
        marginal=stable and max_real > -MARGINAL_RATE,
    )


def characteristic_polynomial(A: np.ndarray) -> list[Fraction]:
    """Exact coefficients of ``det(lambda I - A)``, highest power first.

    Faddeev-LeVerrier recursion carried out in rational arithmetic on the
    binary values of ``A``, so no eigenvalue solver is involved.
    """
    n = A.shape[0]
    M = [[Fraction(float(v)) for v in row] for row in np.asarray(A)]
    coeffs = [Fraction(1)]
    N = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]  # M_1 = I
    for k in range(1, n + 1):
        AN = [[sum(M[i][l] * N[l][j] for l in range(n)) for j in range(n)] for i in range(n)]
        c = -sum(AN[i][i] for i in range(n)) / k
        coeffs.append(c)
        for i in range(n):
            AN[i][i] += c
        N = AN
    return coeffs


def hurwitz_determinants(coeffs: list[Fraction]) -> list[Fraction]:
    """Leading principal minors of the Hurwitz matrix of a monic polynomial."""
    n = len(coeffs) - 1

    def a(k):
        return coeffs[k] if 0 <= k <= n else Fraction(0)

    H = [[a(2 * (j + 1) - (i + 1)) for j in range(n)] for i in range(n)]
    return [_det([row[:k] for row in H[:k]]) for k in range(1, n + 1)]


def _det(M: list[list[Fraction]]) -> Fraction:
    M = [row[:] for row in M]
    n = len(M)
    det = Fraction(1)
    for col in range(n):
        pivot = next((r for r in range(col, n) if M[r][col] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            M[col], M[pivot] = M[pivot], M[col]
            det = -det
        det *= M[col][col]
        for r in range(col + 1, n):
            f = M[r][col] / M[col][col]
            if f:
                for c in range(col, n):
                    M[r][c] -= f * M[col][c]
    return det


def hurwitz_stable(A: np.ndarray, scale: float | None = None) -> bool:
    """Routh-Hurwitz verdict: all Hurwitz determinants strictly positive.

    ``A`` is divided by ``scale`` (default: its largest entry) before the
    exact computation; this keeps the rationals small and does not change
    the sign of any eigenvalue's real part.
    """
    A = np.asarray(A, dtype=float)
    if scale is None:
        scale = float(np.max(np.abs(A))) or 1.0
    coeffs = characteristic_polynomial(A / scale)
    return all(d > 0 for d in hurwitz_determinants(coeffs))

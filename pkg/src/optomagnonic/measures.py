"""Gaussian-state correlation measures.

Covariance matrices coming out of the Lyapunov solve use vacuum variance
1/2, which is the convention of the logarithmic negativity
``max(0, -ln 2 nu)``. The coherence formulas are written for vacuum
variance 1 (``F(1) = 0`` only there), so :func:`coherence_difference`
rescales ``V -> 2 V`` before evaluating them. :func:`coherence_single_mode`
takes its inputs already in the vacuum-1 convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .lyapunov import CovarianceMatrix, symplectic_form

MODE_LABELS = ("a", "c", "m", "b")
MONOGAMY_TOL = 1e-6
_SNAP = 1e-9


class UnphysicalStateError(ValueError):
    pass


@dataclass(frozen=True)
class SymplecticSpectrum:
    values: np.ndarray

    @property
    def min(self) -> float:
        return float(self.values[0])


@dataclass(frozen=True)
class EntanglementReport:
    E_am: float
    E_cm: float
    E_ac: float
    R_min: float
    residuals: dict = field(default_factory=dict)
    dC_am: float = 0.0
    dC_cm: float = 0.0

    @property
    def monogamy_violation(self) -> bool:
        return any(r < -MONOGAMY_TOL for r in self.residuals.values())


def _as_array(V) -> np.ndarray:
    return V.V if isinstance(V, CovarianceMatrix) else np.asarray(V, dtype=float)


def _quadrature_indices(positions: Sequence[int]) -> list[int]:
    return [k for pos in positions for k in (2 * pos, 2 * pos + 1)]


def partial_trace(V, modes: Sequence[str], labels: Sequence[str] = MODE_LABELS) -> CovarianceMatrix:
    """Reduced covariance matrix of ``modes``, kept in the order of ``labels``."""
    V = _as_array(V)
    modes = list(modes)
    if not modes:
        raise ValueError("select at least one mode")
    if len(set(modes)) != len(modes):
        raise ValueError(f"duplicate modes in selection {modes}")
    unknown = [m for m in modes if m not in labels]
    if unknown:
        raise ValueError(f"unknown modes {unknown}; available {list(labels)}")
    if V.shape != (2 * len(labels), 2 * len(labels)):
        raise ValueError(f"expected a {2 * len(labels)}x{2 * len(labels)} matrix, got {V.shape}")
    positions = sorted(labels.index(m) for m in modes)
    idx = _quadrature_indices(positions)
    ordering = tuple(f"{q}_{labels[p]}" for p in positions for q in ("X", "Y"))
    return CovarianceMatrix(V[np.ix_(idx, idx)].copy(), ordering)


def partial_transpose(V, transposed: Sequence[int]) -> np.ndarray:
    """Flip the sign of the Y row and column of each mode index in ``transposed``."""
    V = _as_array(V).copy()
    for k in transposed:
        V[2 * k + 1, :] *= -1.0
        V[:, 2 * k + 1] *= -1.0
    return V


def symplectic_spectrum(V) -> SymplecticSpectrum:
    """Symplectic eigenvalues (ascending): moduli of the spectrum of ``i Omega V``."""
    V = _as_array(V)
    n = V.shape[0] // 2
    if V.shape != (2 * n, 2 * n) or n < 1:
        raise ValueError(f"covariance matrix must be 2n x 2n, got {V.shape}")
    try:
        eig = np.linalg.eigvals(1j * symplectic_form(n) @ V)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(f"symplectic spectrum failed: {exc}") from exc
    moduli = np.sort(np.abs(eig))
    # eigenvalues come in +/- nu pairs
    return SymplecticSpectrum(moduli[::2].copy())


def two_mode_symplectic_closed_form(V) -> tuple[float, float]:
    """``(nu_minus, nu_plus)`` of a two-mode matrix from its block invariants."""
    V = _as_array(V)
    A, B, C = V[:2, :2], V[2:, 2:], V[:2, 2:]
    delta = np.linalg.det(A) + np.linalg.det(B) + 2.0 * np.linalg.det(C)
    det_v = np.linalg.det(V)
    disc = max(delta * delta - 4.0 * det_v, 0.0)
    nu_plus_sq = (delta + math.sqrt(disc)) / 2.0
    # det V = nu_-^2 nu_+^2 avoids the cancellation in (delta - root) / 2
    nu_minus_sq = det_v / nu_plus_sq if nu_plus_sq > 0 else 0.0
    return math.sqrt(max(nu_minus_sq, 0.0)), math.sqrt(nu_plus_sq)


def _negativity_from_nu(nu: float) -> float:
    return max(0.0, -math.log(2.0 * nu))


def log_negativity(V) -> float:
    """Two-mode logarithmic negativity (natural log), transposing mode 2."""
    V = _as_array(V)
    if V.shape != (4, 4):
        raise ValueError(f"expected a two-mode 4x4 matrix, got {V.shape}")
    return _negativity_from_nu(symplectic_spectrum(partial_transpose(V, [1])).min)


def one_vs_two_log_negativity(V, singled: int) -> float:
    """Logarithmic negativity of the split ``singled | rest`` of a three-mode state."""
    V = _as_array(V)
    if V.shape != (6, 6):
        raise ValueError(f"expected a three-mode 6x6 matrix, got {V.shape}")
    if singled not in (0, 1, 2):
        raise ValueError("singled mode index must be 0, 1 or 2")
    return _negativity_from_nu(symplectic_spectrum(partial_transpose(V, [singled])).min)


def _pair(V6: np.ndarray, i: int, j: int) -> np.ndarray:
    # mode i first, mode j second (the transposed one)
    idx = _quadrature_indices([i, j])
    return V6[np.ix_(idx, idx)]


def residual_contangle(V, singled: int) -> float:
    """``C_{i|jk} - C_{i|j} - C_{i|k}`` with contangle = squared log negativity."""
    V = _as_array(V)
    j, k = (x for x in range(3) if x != singled)
    whole = one_vs_two_log_negativity(V, singled) ** 2
    return whole - log_negativity(_pair(V, singled, j)) ** 2 - log_negativity(_pair(V, singled, k)) ** 2


def min_residual_contangle(V, labels: Sequence[str] = ("a", "c", "m")) -> tuple[float, dict]:
    """Minimum residual contangle and the three residuals, keyed ``"a|cm"`` etc.

    Negative residuals are returned as they are.
    """
    V = _as_array(V)
    residuals = {}
    for i, label in enumerate(labels):
        rest = "".join(l for l in labels if l != label)
        residuals[f"{label}|{rest}"] = residual_contangle(V, i)
    return min(residuals.values()), residuals


def coherence_function(x: float) -> float:
    """``F(x)``, the entropy function of a mode with symplectic eigenvalue ``x``.

    Vacuum-1 convention; ``F(1) = 0`` as a limit.
    """
    if x < 1.0 - _SNAP:
        raise UnphysicalStateError(f"symplectic eigenvalue {x!r} < 1 in the vacuum-1 convention")
    if x <= 1.0:
        return 0.0
    plus, minus = (x + 1.0) / 2.0, (x - 1.0) / 2.0
    return plus * math.log2(plus) - minus * math.log2(minus)


def coherence_single_mode(V, mean=(0.0, 0.0)) -> float:
    """Relative-entropy coherence (bits) of a one-mode Gaussian state.

    ``V`` and ``mean`` are in the vacuum-1 convention.
    """
    V = _as_array(V)
    if V.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got {V.shape}")
    nu = math.sqrt(max(np.linalg.det(V), 0.0))
    nbar = (V[0, 0] + V[1, 1] + mean[0] ** 2 + mean[1] ** 2 - 2.0) / 4.0
    return coherence_function(2.0 * nbar + 1.0) - coherence_function(nu)


def coherence_difference(V, mean=None) -> float:
    """Coherence difference (bits) of a two-mode state given with vacuum variance 1/2.

    First moments cancel between the joint and marginal coherences, so
    ``mean`` is accepted but unused.
    """
    V = 2.0 * _as_array(V)
    if V.shape != (4, 4):
        raise ValueError(f"expected a two-mode 4x4 matrix, got {V.shape}")
    nu_1 = math.sqrt(max(np.linalg.det(V[:2, :2]), 0.0))
    nu_2 = math.sqrt(max(np.linalg.det(V[2:, 2:]), 0.0))
    nu_minus, nu_plus = symplectic_spectrum(V).values
    F = coherence_function
    return F(nu_1) + F(nu_2) - F(nu_minus) - F(nu_plus)


def bogoliubov_diagnostics(G_a: float, G_m: float) -> tuple[float, float]:
    """Squeezing parameter ``arctanh(G_m / G_a)`` and Bogoliubov-mode coupling ``sqrt(G_a^2 - G_m^2)``."""
    if not G_a > 0:
        raise ValueError("G_a must be > 0")
    if G_m < 0:
        raise ValueError("G_m must be >= 0")
    if G_m >= G_a:
        raise ValueError(
            f"Bogoliubov picture needs G_m < G_a (got G_m/G_a = {G_m / G_a:.3f})"
        )
    return math.atanh(G_m / G_a), math.sqrt(G_a * G_a - G_m * G_m)


def entanglement_report(V) -> EntanglementReport:
    """All bipartite, tripartite and coherence measures of the a, c, m modes."""
    V = _as_array(V)
    am = partial_trace(V, ["a", "m"]).V
    cm = partial_trace(V, ["c", "m"]).V
    ac = partial_trace(V, ["a", "c"]).V
    r_min, residuals = min_residual_contangle(partial_trace(V, ["a", "c", "m"]).V)
    return EntanglementReport(
        E_am=log_negativity(am),
        E_cm=log_negativity(cm),
        E_ac=log_negativity(ac),
        R_min=r_min,
        residuals=residuals,
        dC_am=coherence_difference(am),
        dC_cm=coherence_difference(cm),
    )

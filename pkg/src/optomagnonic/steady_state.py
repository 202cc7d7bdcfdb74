"""Classical operating point of the driven system.

The mean fields follow from the mechanical displacement ``q``, which shifts
the detunings; ``q`` in turn follows from the radiation and magnetostrictive
forces. A damped fixed-point iteration on ``q`` starting from ``q = 0``
selects the branch connected to the undriven state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .model import EffectiveParams, PhysicalDriveParams


class SteadyStateError(RuntimeError):
    pass


@dataclass(frozen=True)
class SteadyState:
    a_s: complex
    c_s: complex
    m_s: complex
    q_s: float
    Delta_a: float
    Delta_c: float
    Delta_m: float
    G_a: float
    G_c: float
    G_m: float
    converged: bool
    iterations: int
    residual: float


@dataclass(frozen=True)
class _Drive:
    eta_a: float
    eta_c: float
    rabi: float
    g_a: float
    g_c: float
    g_m: float
    Delta_a0: float
    Delta_c0: float
    Delta_m0: float
    kappa_a: float
    kappa_c: float
    kappa_m: float
    omega_b: float

    def detunings(self, q):
        return (
            self.Delta_a0 - self.g_a * q,
            self.Delta_c0 + self.g_c * q,
            self.Delta_m0 + self.g_m * q,
        )

    def amplitudes(self, q):
        d_a, d_c, d_m = self.detunings(q)
        return (
            self.eta_a / complex(self.kappa_a, d_a) if self.eta_a else 0j,
            self.eta_c / complex(self.kappa_c, d_c) if self.eta_c else 0j,
            self.rabi / complex(self.kappa_m, d_m) if self.rabi else 0j,
        )

    def displacement(self, a_s, c_s, m_s):
        return (
            -self.g_a * abs(a_s) ** 2 + self.g_c * abs(c_s) ** 2 + self.g_m * abs(m_s) ** 2
        ) / self.omega_b

    def q_map(self, q):
        return self.displacement(*self.amplitudes(q))


def _drive(phys: PhysicalDriveParams, eff: EffectiveParams) -> _Drive:
    eta_a, eta_c, rabi = phys.drive_amplitudes(eff)
    return _Drive(
        eta_a, eta_c, rabi,
        phys.g_a, phys.g_c, phys.g_m,
        phys.Delta_a0, phys.Delta_c0, phys.Delta_m0,
        eff.kappa_a, eff.kappa_c, eff.kappa_m, eff.omega_b,
    )


def displacement_map(phys: PhysicalDriveParams, eff: EffectiveParams):
    """Return ``q -> q(a_s(q), c_s(q), m_s(q))``, the map whose fixed point is sought."""
    return _drive(phys, eff).q_map


def solve_steady_state(
    phys: PhysicalDriveParams,
    eff: EffectiveParams,
    damping: float = 0.5,
    tol: float = 1e-12,
    max_iter: int = 10_000,
    history: list | None = None,
) -> SteadyState:
    """Solve the nonlinear steady state for the drives in ``phys``.

    ``eff`` supplies the decays and the mechanical frequency; its detunings
    and couplings are ignored. A result with ``converged=False`` signals a
    possible bistability and must not be used downstream.
    """
    if not eff.omega_b > 0:
        raise ValueError("omega_b must be > 0")
    if not 0 < damping <= 1:
        raise ValueError("damping must lie in (0, 1]")
    drive = _drive(phys, eff)

    q = 0.0
    residual = math.inf
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        q_new = drive.q_map(q)
        residual = abs(q - q_new) / max(1.0, abs(q))
        if history is not None:
            history.append(residual)
        if not math.isfinite(q_new):
            break
        if residual <= tol:
            q = q_new
            converged = True
            break
        q = (1.0 - damping) * q + damping * q_new

    a_s, c_s, m_s = drive.amplitudes(q)
    d_a, d_c, d_m = drive.detunings(q)
    if converged:
        residual = abs(q - drive.displacement(a_s, c_s, m_s)) / max(1.0, abs(q))
    sqrt2 = math.sqrt(2.0)
    return SteadyState(
        a_s=a_s, c_s=c_s, m_s=m_s, q_s=q,
        Delta_a=d_a, Delta_c=d_c, Delta_m=d_m,
        G_a=sqrt2 * phys.g_a * abs(a_s),
        G_c=sqrt2 * phys.g_c * abs(c_s),
        G_m=sqrt2 * phys.g_m * abs(m_s),
        converged=converged, iterations=it, residual=residual,
    )


def effective_from_steady(ss: SteadyState, base: EffectiveParams) -> EffectiveParams:
    """Effective parameters at the operating point ``ss``.

    Couplings use the moduli of the mean fields, so they are real and
    non-negative as the drift matrix assumes.
    """
    if not ss.converged:
        raise SteadyStateError(
            f"steady state did not converge after {ss.iterations} iterations "
            f"(residual {ss.residual:.3e}); the drive may be in a bistable regime"
        )
    return replace(
        base,
        Delta_a=ss.Delta_a, Delta_c=ss.Delta_c, Delta_m=ss.Delta_m,
        G_a=ss.G_a, G_c=ss.G_c, G_m=ss.G_m,
    )

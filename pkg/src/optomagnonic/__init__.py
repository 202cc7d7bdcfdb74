"""Steady-state quantum correlations of a double-cavity optomagnomechanical system."""

from .model import (
    CONSTANTS,
    EffectiveParams,
    ModeParams,
    PhysicalConstants,
    PhysicalDriveParams,
    SchemePreset,
    drive_amplitude_cavity,
    drive_amplitude_magnon,
    load_preset,
    thermal_occupation,
)
from .steady_state import SteadyState, effective_from_steady, solve_steady_state
from .dynamics import DriftDiffusion, StabilityReport, build_diffusion, build_drift, stability
from .lyapunov import CovarianceMatrix, residual, solve_lyapunov
from .measures import (
    EntanglementReport,
    SymplecticSpectrum,
    coherence_difference,
    coherence_single_mode,
    entanglement_report,
    log_negativity,
    min_residual_contangle,
    partial_trace,
    partial_transpose,
    symplectic_spectrum,
)

__version__ = "0.1.0"

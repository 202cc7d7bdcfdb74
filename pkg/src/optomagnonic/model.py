"""Parameter records, physical constants and scheme presets.

Internal frequencies are angular (rad/s). Anything that crosses a file or
command-line boundary is an ordinary frequency ``f = omega / 2pi`` in Hz.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from typing import Optional

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class PhysicalConstants:
    hbar: float = 1.054571817e-34  # J s
    k_B: float = 1.380649e-23  # J / K
    gyromagnetic_ratio: float = 1.76085963023e11  # rad / (s T), electron


CONSTANTS = PhysicalConstants()


@dataclass(frozen=True)
class ModeParams:
    """Frequency and decay of one of the modes ``a``, ``c``, ``m``, ``b``."""

    label: str
    decay: float
    frequency: Optional[float] = None

    def __post_init__(self):
        if self.label not in ("a", "c", "m", "b"):
            raise ValueError(f"unknown mode label {self.label!r}")
        if self.decay < 0:
            raise ValueError(f"decay of mode {self.label} must be >= 0")
        if self.frequency is None:
            if self.label in ("m", "b"):
                raise ValueError(f"mode {self.label} requires a frequency")
        elif self.frequency <= 0:
            raise ValueError(f"frequency of mode {self.label} must be > 0")


@dataclass(frozen=True)
class EffectiveParams:
    """Linearised-model parameters, all rates in rad/s and ``T`` in kelvin.

    ``n_m_override`` / ``n_b_override`` replace the computed thermal
    occupations; they exist for degenerate test cases only.
    """

    Delta_a: float
    Delta_c: float
    Delta_m: float
    G_a: float
    G_c: float
    G_m: float
    omega_b: float
    kappa_a: float
    kappa_c: float
    kappa_m: float
    gamma_b: float
    T: float
    omega_m: float = TWO_PI * 10e9
    n_m_override: Optional[float] = None
    n_b_override: Optional[float] = None

    def __post_init__(self):
        for name in ("kappa_a", "kappa_c", "kappa_m", "gamma_b", "G_a", "G_c", "G_m", "T"):
            value = getattr(self, name)
            if not value >= 0:
                raise ValueError(f"{name} must be >= 0, got {value!r}")
        for name in ("omega_b", "omega_m"):
            value = getattr(self, name)
            if not value > 0:
                raise ValueError(f"{name} must be > 0, got {value!r}")

    @property
    def n_m(self) -> float:
        if self.n_m_override is not None:
            return self.n_m_override
        return thermal_occupation(self.omega_m, self.T)

    @property
    def n_b(self) -> float:
        if self.n_b_override is not None:
            return self.n_b_override
        return thermal_occupation(self.omega_b, self.T)

    def modes(self) -> tuple[ModeParams, ...]:
        return (
            ModeParams("a", self.kappa_a),
            ModeParams("c", self.kappa_c),
            ModeParams("m", self.kappa_m, self.omega_m),
            ModeParams("b", self.gamma_b, self.omega_b),
        )

    def replace(self, **changes) -> "EffectiveParams":
        return replace(self, **changes)


@dataclass(frozen=True)
class PhysicalDriveParams:
    """Drive and single-quantum coupling parameters (rad/s, W, T).

    ``omega_L`` is the laser frequency; the cavity frequencies entering the
    drive amplitudes are ``omega_L + Delta_j0``.
    """

    P_a: float = 0.0
    P_c: float = 0.0
    omega_L: float = TWO_PI * 299792458.0 / 1550e-9
    omega_0: float = TWO_PI * 10e9
    B_d: float = 0.0
    N_d: float = 1.0
    g_a: float = 0.0
    g_c: float = 0.0
    g_m: float = 0.0
    Delta_a0: float = 0.0
    Delta_c0: float = 0.0
    Delta_m0: float = 0.0
    gyromagnetic_ratio: float = CONSTANTS.gyromagnetic_ratio

    def __post_init__(self):
        if self.P_a < 0 or self.P_c < 0:
            raise ValueError("laser power must be >= 0")
        if self.N_d < 1:
            raise ValueError("N_d must be >= 1")
        if self.B_d < 0:
            raise ValueError("B_d must be >= 0")
        if not self.omega_L > 0:
            raise ValueError("omega_L must be > 0")

    def drive_amplitudes(self, eff: EffectiveParams) -> tuple[float, float, float]:
        """Return ``(eta_a, eta_c, Omega)`` using the decays in ``eff``."""
        eta_a = drive_amplitude_cavity(self.P_a, eff.kappa_a, self.omega_L + self.Delta_a0)
        eta_c = drive_amplitude_cavity(self.P_c, eff.kappa_c, self.omega_L + self.Delta_c0)
        rabi = drive_amplitude_magnon(self.B_d, self.N_d, self.gyromagnetic_ratio)
        return eta_a, eta_c, rabi


@dataclass(frozen=True)
class SchemePreset:
    name: str
    params: EffectiveParams


def thermal_occupation(omega: float, T: float) -> float:
    """Bose-Einstein occupation ``1 / (exp(hbar omega / k_B T) - 1)``.

    ``T = 0`` is the zero-temperature limit and returns exactly 0.
    """
    if not omega > 0:
        raise ValueError(f"omega must be > 0, got {omega!r}")
    if T < 0:
        raise ValueError(f"T must be >= 0, got {T!r}")
    if T == 0:
        return 0.0
    x = CONSTANTS.hbar * omega / (CONSTANTS.k_B * T)
    if x > 700:
        return math.exp(-x)
    return 1.0 / math.expm1(x)


def drive_amplitude_cavity(P: float, kappa: float, omega_drive: float) -> float:
    """Cavity drive amplitude ``sqrt(2 P kappa / (hbar omega))`` in rad/s."""
    if P < 0 or kappa < 0:
        raise ValueError("P and kappa must be >= 0")
    if not omega_drive > 0:
        raise ValueError("omega_drive must be > 0")
    return math.sqrt(2.0 * P * kappa / (CONSTANTS.hbar * omega_drive))


def drive_amplitude_magnon(B_d: float, N_d: float, gamma: float = CONSTANTS.gyromagnetic_ratio) -> float:
    """Magnon Rabi frequency ``(sqrt(5)/4) gamma sqrt(N_d) B_d`` in rad/s."""
    if B_d < 0 or N_d < 0 or gamma < 0:
        raise ValueError("B_d, N_d and gamma must be >= 0")
    return math.sqrt(5.0) / 4.0 * gamma * math.sqrt(N_d) * B_d


def _shared_hz() -> dict[str, float]:
    return dict(
        omega_b=25e6,
        kappa_a=1e6,
        kappa_c=2e6,
        kappa_m=1e6,
        gamma_b=100.0,
        G_a=1.5e6,
        G_c=8e6,
    )


def _build_preset(name: str) -> EffectiveParams:
    hz = _shared_hz()
    if name == "scheme_i":
        hz.update(G_m=6e6, Delta_m=hz["omega_b"])
    elif name == "scheme_ii":
        hz.update(G_m=1.5e6, Delta_m=-hz["omega_b"])
    else:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(PRESET_NAMES)}")
    hz.update(Delta_a=-hz["omega_b"], Delta_c=hz["omega_b"])
    return EffectiveParams(T=10e-3, **{k: TWO_PI * v for k, v in hz.items()})


PRESET_NAMES = ("scheme_i", "scheme_ii")


def load_preset(name: str) -> EffectiveParams:
    """Return the effective parameters of ``scheme_i`` or ``scheme_ii``."""
    return _build_preset(name)


def presets() -> dict[str, SchemePreset]:
    return {name: SchemePreset(name, load_preset(name)) for name in PRESET_NAMES}


# Config key <-> record field. Frequencies are stored as f = omega / 2pi.
EFFECTIVE_KEYS = {
    "omega_b_hz": "omega_b",
    "kappa_a_hz": "kappa_a",
    "kappa_c_hz": "kappa_c",
    "kappa_m_hz": "kappa_m",
    "gamma_b_hz": "gamma_b",
    "T_K": "T",
    "G_a_hz": "G_a",
    "G_c_hz": "G_c",
    "G_m_hz": "G_m",
    "Delta_a_hz": "Delta_a",
    "Delta_c_hz": "Delta_c",
    "Delta_m_hz": "Delta_m",
    "omega_m_hz": "omega_m",
}

PHYSICAL_KEYS = {
    "P_a_W": "P_a",
    "P_c_W": "P_c",
    "lambda_L_m": "omega_L",
    "omega_0_hz": "omega_0",
    "B_d_T": "B_d",
    "N_d": "N_d",
    "g_a_hz": "g_a",
    "g_c_hz": "g_c",
    "g_m_hz": "g_m",
    "Delta_a0_hz": "Delta_a0",
    "Delta_c0_hz": "Delta_c0",
    "Delta_m0_hz": "Delta_m0",
}

_SPEED_OF_LIGHT = 299792458.0


def _is_frequency_key(key: str) -> bool:
    return key.endswith("_hz")


def effective_to_config(p: EffectiveParams) -> dict[str, float]:
    out = {}
    for key, field in EFFECTIVE_KEYS.items():
        value = getattr(p, field)
        out[key] = value / TWO_PI if _is_frequency_key(key) else value
    return out


def effective_from_config(values: dict[str, float], base: Optional[EffectiveParams] = None) -> EffectiveParams:
    """Build effective parameters from config values, on top of ``base``."""
    changes = {}
    for key, value in values.items():
        field = EFFECTIVE_KEYS[key]
        changes[field] = value * TWO_PI if _is_frequency_key(key) else value
    if base is None:
        missing = set(EFFECTIVE_KEYS) - set(values) - {"omega_m_hz"}
        if missing:
            raise ValueError(f"missing parameters: {', '.join(sorted(missing))}")
        return EffectiveParams(**changes)
    return replace(base, **changes)


def physical_to_config(p: PhysicalDriveParams) -> dict[str, float]:
    out = {}
    for key, field in PHYSICAL_KEYS.items():
        value = getattr(p, field)
        if key == "lambda_L_m":
            value = TWO_PI * _SPEED_OF_LIGHT / value
        elif _is_frequency_key(key):
            value = value / TWO_PI
        out[key] = value
    return out


def physical_from_config(values: dict[str, float], base: Optional[PhysicalDriveParams] = None) -> PhysicalDriveParams:
    changes = {}
    for key, value in values.items():
        field = PHYSICAL_KEYS[key]
        if key == "lambda_L_m":
            value = TWO_PI * _SPEED_OF_LIGHT / value
        elif _is_frequency_key(key):
            value = value * TWO_PI
        changes[field] = value
    return replace(base or PhysicalDriveParams(), **changes)


def field_names(record_type) -> tuple[str, ...]:
    return tuple(f.name for f in fields(record_type))

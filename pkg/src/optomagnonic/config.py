"""Text configuration files: ``key = value`` lines with optional ``[section]`` headers.

Frequencies are given as ``f = omega / 2pi`` in Hz. Detuning values may use
the token ``omega_b`` (``Delta_m_hz = -omega_b``, ``Delta_a_hz = -1.5 omega_b``).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

from .model import (
    EFFECTIVE_KEYS,
    PHYSICAL_KEYS,
    TWO_PI,
    EffectiveParams,
    PhysicalDriveParams,
    effective_from_config,
    effective_to_config,
    load_preset,
    physical_from_config,
    physical_to_config,
)
from .dynamics import CONVENTIONS

CONTROL_KEYS = {
    "preset": "scheme_i | scheme_ii; loaded before the other keys",
    "drift_convention": "paper (default) | symmetric",
    "physical": "true to derive detunings and couplings from the physical drive keys",
    "n_m_override": "fixed magnon thermal occupation (testing only)",
    "n_b_override": "fixed phonon thermal occupation (testing only)",
}

KEY_HELP = {
    "omega_b_hz": "mechanical frequency",
    "kappa_a_hz": "decay of cavity a",
    "kappa_c_hz": "decay of cavity c",
    "kappa_m_hz": "magnon decay",
    "gamma_b_hz": "mechanical damping",
    "T_K": "bath temperature in kelvin",
    "G_a_hz": "effective optomechanical coupling of cavity a",
    "G_c_hz": "effective optomechanical coupling of cavity c",
    "G_m_hz": "effective magnomechanical coupling",
    "Delta_a_hz": "effective detuning of cavity a (accepts omega_b token)",
    "Delta_c_hz": "effective detuning of cavity c (accepts omega_b token)",
    "Delta_m_hz": "effective magnon detuning (accepts omega_b token)",
    "omega_m_hz": "magnon frequency, only enters the thermal occupation (default 10 GHz)",
    "P_a_W": "laser power on cavity a",
    "P_c_W": "laser power on cavity c",
    "lambda_L_m": "laser wavelength (default 1550 nm)",
    "omega_0_hz": "microwave drive frequency",
    "B_d_T": "microwave drive field amplitude",
    "N_d": "number of spins",
    "g_a_hz": "single-photon optomechanical coupling of cavity a",
    "g_c_hz": "single-photon optomechanical coupling of cavity c",
    "g_m_hz": "single-magnon magnomechanical coupling",
    "Delta_a0_hz": "bare detuning of cavity a (accepts omega_b token)",
    "Delta_c0_hz": "bare detuning of cavity c (accepts omega_b token)",
    "Delta_m0_hz": "bare magnon detuning (accepts omega_b token)",
}


class ConfigError(ValueError):
    def __init__(self, message: str, source: str = "<config>", line: Optional[int] = None):
        location = f"{source}:{line}" if line is not None else source
        super().__init__(f"{location}: {message}")
        self.source = source
        self.line = line


@dataclass(frozen=True)
class Entry:
    key: str
    value: str
    line: Optional[int] = None


@dataclass
class ParsedConfig:
    source: str
    entries: list = field(default_factory=list)
    sections: dict = field(default_factory=dict)


@dataclass(frozen=True)
class RunConfig:
    """Everything needed to evaluate one parameter point."""

    params: EffectiveParams
    physical: Optional[PhysicalDriveParams] = None
    convention: str = "paper"

    def dump(self) -> dict:
        out = {"drift_convention": self.convention}
        out.update(effective_to_config(self.params))
        if self.params.n_m_override is not None:
            out["n_m_override"] = self.params.n_m_override
        if self.params.n_b_override is not None:
            out["n_b_override"] = self.params.n_b_override
        if self.physical is not None:
            out["physical"] = True
            out.update(physical_to_config(self.physical))
        return out


_SECTION = re.compile(r"^\[\s*([^\]]+?)\s*\]$")


def parse_text(text: str, source: str = "<config>") -> ParsedConfig:
    parsed = ParsedConfig(source)
    current = parsed.entries
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _SECTION.match(line)
        if m:
            name = m.group(1)
            if name in parsed.sections:
                raise ConfigError(f"duplicate section [{name}]", source, lineno)
            current = parsed.sections[name] = []
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", source, lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError("empty key", source, lineno)
        current.append(Entry(key, value, lineno))
    return parsed


def parse_file(path) -> ParsedConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", str(path)) from exc
    return parse_text(text, str(path))


def parse_number(text: str, omega_b_hz: Optional[float] = None, source: str = "<config>", line=None) -> float:
    """Parse a float, or a multiple of ``omega_b`` (result in Hz)."""
    s = text.strip().replace("*", " ")
    if "omega_b" in s:
        if omega_b_hz is None:
            raise ConfigError("omega_b token not allowed here", source, line)
        coeff = s.replace("omega_b", "").strip()
        if coeff in ("", "+"):
            factor = 1.0
        elif coeff == "-":
            factor = -1.0
        else:
            factor = _float(coeff, source, line)
        return factor * omega_b_hz
    return _float(s, source, line)


def _float(s, source, line):
    try:
        return float(s)
    except ValueError:
        raise ConfigError(f"not a number: {s!r}", source, line) from None


def _parse_bool(text, source, line):
    v = text.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}", source, line)


def apply_entries(entries, base: Optional[RunConfig] = None, source: str = "<config>") -> RunConfig:
    """Apply ``key = value`` entries on top of ``base``.

    A ``preset`` entry replaces the base first. Unknown keys are errors.
    """
    entries = list(entries)
    for e in entries:
        if e.key not in EFFECTIVE_KEYS and e.key not in PHYSICAL_KEYS and e.key not in CONTROL_KEYS:
            raise ConfigError(f"unknown key {e.key!r}", source, e.line)

    params = base.params if base else None
    physical = base.physical if base else None
    convention = base.convention if base else "paper"
    use_physical = physical is not None

    for e in entries:
        if e.key == "preset":
            try:
                params = load_preset(e.value)
            except KeyError as exc:
                raise ConfigError(str(exc.args[0]), source, e.line) from None

    omega_b_hz = params.omega_b / TWO_PI if params else None
    for e in entries:
        if e.key == "omega_b_hz":
            omega_b_hz = parse_number(e.value, None, source, e.line)

    effective, phys_values, overrides = {}, {}, {}
    for e in entries:
        if e.key == "preset":
            continue
        if e.key == "drift_convention":
            if e.value not in CONVENTIONS:
                raise ConfigError(f"drift_convention must be one of {CONVENTIONS}", source, e.line)
            convention = e.value
        elif e.key == "physical":
            use_physical = _parse_bool(e.value, source, e.line)
        elif e.key in ("n_m_override", "n_b_override"):
            overrides[e.key] = None if e.value.lower() == "none" else parse_number(e.value, None, source, e.line)
        elif e.key in EFFECTIVE_KEYS:
            effective[e.key] = parse_number(e.value, omega_b_hz, source, e.line)
        else:
            phys_values[e.key] = parse_number(e.value, omega_b_hz, source, e.line)

    try:
        params = effective_from_config(effective, params)
        if overrides:
            params = replace(params, **overrides)
        if phys_values or use_physical:
            physical = physical_from_config(phys_values, physical or _default_physical(params))
    except ValueError as exc:
        raise ConfigError(str(exc), source) from None
    if not use_physical:
        physical = None
    return RunConfig(params, physical, convention)


def _default_physical(params: EffectiveParams) -> PhysicalDriveParams:
    # bare detunings default to the effective ones
    return PhysicalDriveParams(Delta_a0=params.Delta_a, Delta_c0=params.Delta_c, Delta_m0=params.Delta_m)


def parse_overrides(items, source: str = "--set") -> list:
    out = []
    for item in items or ():
        if "=" not in item:
            raise ConfigError(f"expected KEY=VALUE, got {item!r}", source)
        key, value = (s.strip() for s in item.split("=", 1))
        out.append(Entry(key, value, None))
    return out


def load_run_config(preset: Optional[str] = None, config_path=None, overrides=()) -> tuple[RunConfig, ParsedConfig]:
    """Preset, then config file, then ``--set`` overrides."""
    base = None
    if preset is not None:
        try:
            base = RunConfig(load_preset(preset))
        except KeyError as exc:
            raise ConfigError(str(exc.args[0]), "--preset") from None
    parsed = parse_file(config_path) if config_path else ParsedConfig("<none>")
    if parsed.entries or base is None:
        base = apply_entries(parsed.entries, base, parsed.source)
    if overrides:
        base = apply_entries(parse_overrides(overrides), base, "--set")
    return base, parsed


def schema_help() -> str:
    lines = ["config keys (frequencies are f = omega/2pi in Hz):"]
    for key, text in KEY_HELP.items():
        lines.append(f"  {key:<17} {text}")
    for key, text in CONTROL_KEYS.items():
        lines.append(f"  {key:<17} {text}")
    lines.append("[sweep] section: axis = NAME, MIN, MAX, POINTS[, linear|log[, UNIT]] (one or two lines)")
    lines.append("                 measures = E_am, E_cm, E_ac, R_min, dC_am, dC_cm, stability")
    lines.append("  UNIT: hz (default), omega_b, or another parameter name for ratio axes")
    return "\n".join(lines)

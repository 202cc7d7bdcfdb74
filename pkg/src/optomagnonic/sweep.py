"""Grid evaluation of the full pipeline, CSV output and gnuplot scripts."""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import dynamics, lyapunov, measures
from .config import ConfigError, Entry, RunConfig, parse_number
from .model import EFFECTIVE_KEYS, PHYSICAL_KEYS, TWO_PI, EffectiveParams, PhysicalDriveParams
from .steady_state import effective_from_steady, solve_steady_state

MEASURES = ("E_am", "E_cm", "E_ac", "R_min", "dC_am", "dC_cm", "stability")
THREADS_ENV = "OPTOMAGNONIC_THREADS"
_SERIAL_BELOW = 64

_FIELD_TO_KEY = {v: k for k, v in EFFECTIVE_KEYS.items()}
_PHYS_FIELD_TO_KEY = {v: k for k, v in PHYSICAL_KEYS.items() if k != "lambda_L_m"}


@dataclass(frozen=True)
class Axis:
    """One grid axis.

    ``min``/``max`` are in the unit named by ``unit``: ``hz`` (kelvin for
    ``T``, SI for physical drive keys), ``omega_b``, or the name of another
    effective parameter, which makes the axis a ratio to that parameter's
    base value.
    """

    name: str
    min: float
    max: float
    points: int
    scale: str = "linear"
    unit: str = "hz"

    def __post_init__(self):
        _resolve_field(self.name)
        if self.points < 2:
            raise ValueError(f"axis {self.name}: need at least 2 points")
        if not self.min < self.max:
            raise ValueError(f"axis {self.name}: min must be < max")
        if self.scale not in ("linear", "log"):
            raise ValueError(f"axis {self.name}: scale must be linear or log")
        if self.scale == "log" and self.min <= 0:
            raise ValueError(f"axis {self.name}: log scale requires min > 0")
        if self.unit not in ("hz", "omega_b") and self.unit not in EffectiveParams.__dataclass_fields__:
            raise ValueError(f"axis {self.name}: unknown unit {self.unit!r}")

    @property
    def field(self) -> str:
        return _resolve_field(self.name)[0]

    @property
    def physical(self) -> bool:
        return _resolve_field(self.name)[1]

    @property
    def column(self) -> str:
        if self.physical:
            return _PHYS_FIELD_TO_KEY[self.field]
        return _FIELD_TO_KEY[self.field]

    def raw_values(self) -> np.ndarray:
        if self.scale == "log":
            return np.geomspace(self.min, self.max, self.points)
        return np.linspace(self.min, self.max, self.points)

    def unit_factor(self, base: RunConfig) -> float:
        """Internal value per axis unit."""
        if self.unit == "omega_b":
            return base.params.omega_b
        if self.unit != "hz":
            return getattr(base.params, self.unit)
        return TWO_PI if self.column.endswith("_hz") else 1.0

    def values(self, base: RunConfig) -> np.ndarray:
        return self.raw_values() * self.unit_factor(base)

    def to_column(self, value: float) -> float:
        """Internal value -> CSV column value (Hz, K or SI)."""
        return value / TWO_PI if self.column.endswith("_hz") else value


def _resolve_field(name: str) -> tuple[str, bool]:
    if name in EFFECTIVE_KEYS:
        return EFFECTIVE_KEYS[name], False
    if name in PHYSICAL_KEYS and name != "lambda_L_m":
        return PHYSICAL_KEYS[name], True
    if name in _FIELD_TO_KEY:
        return name, False
    if name in _PHYS_FIELD_TO_KEY:
        return name, True
    raise ValueError(f"unknown sweep parameter {name!r}")


@dataclass(frozen=True)
class SweepSpec:
    base: RunConfig
    axes: tuple
    measures: tuple = ("E_am", "E_cm")

    def __post_init__(self):
        if len(self.axes) not in (1, 2):
            raise ValueError("a sweep has one or two axes")
        unknown = [m for m in self.measures if m not in MEASURES]
        if unknown:
            raise ValueError(f"unknown measures {unknown}; choose from {MEASURES}")
        if any(ax.physical for ax in self.axes) and self.base.physical is None:
            raise ValueError("physical-drive axes need a physical base configuration")

    @property
    def value_measures(self) -> tuple:
        return tuple(m for m in self.measures if m != "stability")

    @property
    def shape(self) -> tuple:
        return tuple(ax.points for ax in self.axes)


@dataclass(frozen=True)
class PointRecord:
    stable: bool
    max_real_eig: float
    values: dict = field(default_factory=dict)
    error: Optional[str] = None
    lyapunov_residual: float = math.nan
    warning: Optional[str] = None


@dataclass(frozen=True)
class SweepResult:
    spec: SweepSpec
    coords: list  # internal-unit tuples, row-major over the axes
    records: list
    provenance: dict

    @property
    def axes(self) -> tuple:
        return self.spec.axes

    def column(self, measure: str) -> np.ndarray:
        return np.array([r.values.get(measure, math.nan) for r in self.records])

    def grid(self, measure: str) -> np.ndarray:
        return self.column(measure).reshape(self.spec.shape)

    @property
    def stable(self) -> np.ndarray:
        return np.array([r.stable for r in self.records])


def point_config(base: RunConfig, changes: dict) -> RunConfig:
    eff = {k: v for k, v in changes.items() if k in EffectiveParams.__dataclass_fields__ and not k.startswith("_phys_")}
    phys = {k[len("_phys_"):]: v for k, v in changes.items() if k.startswith("_phys_")}
    params = replace(base.params, **eff) if eff else base.params
    physical = replace(base.physical, **phys) if phys else base.physical
    return RunConfig(params, physical, base.convention)


def evaluate(run: RunConfig, wanted: Sequence[str] = MEASURES) -> PointRecord:
    """Run the pipeline at one point; solver failures land in ``error``."""
    try:
        params = run.params
        if run.physical is not None:
            ss = solve_steady_state(run.physical, params)
            params = effective_from_steady(ss, params)
        A = dynamics.build_drift(params, run.convention)
        D = dynamics.build_diffusion(params)
        report = dynamics.stability(A)
        if not report.stable:
            return PointRecord(False, report.max_real_eig)
        cm = lyapunov.solve_lyapunov(A, D, check_stability=False)
        if report.marginal:
            cm = replace(cm, warning="near-marginal stability; covariance may be ill-conditioned")
        values = _measures(cm.V, wanted)
        return PointRecord(True, report.max_real_eig, values,
                           lyapunov_residual=lyapunov.residual(A, D, cm.V), warning=cm.warning)
    except (ValueError, RuntimeError, np.linalg.LinAlgError) as exc:
        return PointRecord(False, math.nan, error=f"{type(exc).__name__}: {exc}")


def _measures(V: np.ndarray, wanted) -> dict:
    out = {}
    pairs = {"am": ("a", "m"), "cm": ("c", "m"), "ac": ("a", "c")}
    for name in wanted:
        if name == "stability":
            continue
        if name.startswith("E_"):
            out[name] = measures.log_negativity(measures.partial_trace(V, pairs[name[2:]]).V)
        elif name.startswith("dC_"):
            out[name] = measures.coherence_difference(measures.partial_trace(V, pairs[name[3:]]).V)
        elif name == "R_min":
            out[name] = measures.min_residual_contangle(measures.partial_trace(V, ["a", "c", "m"]).V)[0]
    return out


def _changes(spec: SweepSpec, coord: tuple) -> dict:
    out = {}
    for ax, value in zip(spec.axes, coord):
        out[("_phys_" + ax.field) if ax.physical else ax.field] = float(value)
    return out


def _evaluate_chunk(args):
    spec, coords = args
    wanted = spec.value_measures
    out = []
    for c in coords:
        try:
            run = point_config(spec.base, _changes(spec, c))
        except ValueError as exc:
            out.append(PointRecord(False, math.nan, error=f"{type(exc).__name__}: {exc}"))
            continue
        out.append(evaluate(run, wanted))
    return out


def default_workers() -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def grid_coords(spec: SweepSpec) -> list:
    values = [ax.values(spec.base) for ax in spec.axes]
    if len(values) == 1:
        return [(float(v),) for v in values[0]]
    return [(float(x), float(y)) for x in values[0] for y in values[1]]


def run_sweep(spec: SweepSpec, workers: Optional[int] = None) -> SweepResult:
    """Evaluate every grid point; output order is row-major over the axes."""
    coords = grid_coords(spec)
    workers = default_workers() if workers is None else max(1, int(workers))
    if workers == 1 or len(coords) < _SERIAL_BELOW:
        records = _evaluate_chunk((spec, coords))
    else:
        n_chunks = min(len(coords), 4 * workers)
        bounds = np.linspace(0, len(coords), n_chunks + 1).astype(int)
        chunks = [(spec, coords[lo:hi]) for lo, hi in zip(bounds[:-1], bounds[1:])]
        records = []
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for part in pool.map(_evaluate_chunk, chunks):
                records.extend(part)
    return SweepResult(spec, coords, records, spec.base.dump())


def stability_map(spec: SweepSpec, workers: Optional[int] = None) -> SweepResult:
    if len(spec.axes) != 2:
        raise ValueError("a stability map needs two axes")
    if "stability" not in spec.measures:
        spec = replace(spec, measures=("stability",) + tuple(spec.measures))
    return run_sweep(spec, workers)


# ---------------------------------------------------------------- parsing

def parse_axis(text: str, source: str = "<config>", line=None) -> Axis:
    parts = [p.strip() for p in text.split(",")]
    if not 4 <= len(parts) <= 6:
        raise ConfigError("axis = NAME, MIN, MAX, POINTS[, SCALE[, UNIT]]", source, line)
    name = parts[0]
    unit = parts[5] if len(parts) == 6 else "hz"
    scale = parts[4] if len(parts) >= 5 else "linear"
    try:
        lo = parse_number(parts[1], None, source, line)
        hi = parse_number(parts[2], None, source, line)
        points = int(parts[3])
        return Axis(name, lo, hi, points, scale, unit)
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc), source, line) from None


def spec_from_section(base: RunConfig, entries: Sequence[Entry], source: str = "<config>") -> SweepSpec:
    axes, wanted = [], None
    for e in entries:
        if e.key == "axis":
            axes.append(parse_axis(e.value, source, e.line))
        elif e.key == "measures":
            wanted = tuple(m.strip() for m in e.value.split(",") if m.strip())
        else:
            raise ConfigError(f"unknown sweep key {e.key!r}", source, e.line)
    try:
        return SweepSpec(base, tuple(axes), wanted or ("E_am", "E_cm"))
    except ValueError as exc:
        raise ConfigError(str(exc), source) from None


# ---------------------------------------------------------------- output

def _fmt(x: float) -> str:
    return "" if x is None or not math.isfinite(x) else f"{x:.16e}"


def _table(series):
    """Header lines and rows for one result or several results on the same grid."""
    if isinstance(series, SweepResult):
        series = [(None, series)]
    first = series[0][1]
    for _, res in series[1:]:
        if res.spec.axes != first.spec.axes or res.coords != first.coords:
            raise ValueError("series in one table must share the grid")
    axes = first.axes
    header = [ax.column for ax in axes]
    for label, res in series:
        prefix = f"{label}:" if label else ""
        header += [prefix + c for c in ("stable", "max_real_eig", *res.spec.value_measures)]
    rows = []
    for i, coord in enumerate(first.coords):
        row = [_fmt(ax.to_column(v)) for ax, v in zip(axes, coord)]
        for _, res in series:
            rec = res.records[i]
            row += ["1" if rec.stable else "0", _fmt(rec.max_real_eig)]
            row += [_fmt(rec.values.get(m)) if rec.stable else "" for m in res.spec.value_measures]
        rows.append(row)
    comments = []
    if len(axes) == 2:
        comments.append(
            f"# grid row-major over ({axes[0].column}, {axes[1].column}), "
            f"{axes[0].points} x {axes[1].points}"
        )
    return comments, header, rows


def emit_csv(result, path) -> Path:
    """Write a result (or a list of ``(label, result)`` on one grid) as CSV."""
    path = Path(path)
    comments, header, rows = _table(result)
    try:
        with path.open("w", newline="") as fh:
            for c in comments:
                fh.write(c + "\n")
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
    except OSError as exc:
        raise OSError(f"cannot write CSV {path}: {exc.strerror}") from exc
    return path


def read_csv(path) -> dict:
    """Parse an emitted CSV into ``{column: array}``; empty cells become NaN."""
    with Path(path).open() as fh:
        lines = [l for l in fh if not l.startswith("#")]
    reader = csv.reader(lines)
    header = next(reader)
    cols = {h: [] for h in header}
    for row in reader:
        for h, cell in zip(header, row):
            cols[h].append(float(cell) if cell else math.nan)
    return {h: np.array(v) for h, v in cols.items()}


def _axis_expr(ax: Axis, base: RunConfig, col: int) -> tuple[str, str]:
    """gnuplot ``using`` expression and label for an axis column."""
    if ax.unit == "omega_b":
        ref = base.params.omega_b / TWO_PI
        return f"(${col}/{ref:.12g})", f"{ax.field} / omega_b"
    if ax.unit != "hz":
        ref = ax.to_column(getattr(base.params, ax.unit))
        return f"(${col}/{ref:.12g})", f"{ax.field} / {ax.unit}"
    if ax.column.endswith("_hz"):
        return f"(${col}/1e6)", f"{ax.field} / 2pi (MHz)"
    if ax.column == "T_K":
        return f"(${col}*1e3)", "T (mK)"
    return f"(${col})", ax.column


def emit_plot_script(result, path, csv_name: str) -> Path:
    """Write a gnuplot script rendering the CSV ``csv_name`` next to it."""
    path = Path(path)
    series = [(None, result)] if isinstance(result, SweepResult) else list(result)
    first = series[0][1]
    comments, header, _ = _table(series)
    skip = len(comments) + 1
    stem = Path(csv_name).stem
    base = first.spec.base
    axes = first.axes
    out = [
        f"# gnuplot script for {csv_name}",
        'set datafile separator ","',
        'set terminal pngcairo size 900,700',
        f'set output "{stem}.png"',
    ]
    for ax, which in zip(axes, "xy"):
        if ax.scale == "log":
            out.append(f"set logscale {which}")
    x_expr, x_label = _axis_expr(axes[0], base, 1)
    out.append(f'set xlabel "{x_label}"')

    if len(axes) == 1:
        curves = [(label, m) for label, res in series for m in res.spec.value_measures]
        out.append(f"set multiplot layout {max(1, len(curves))},1")
        for label, m in curves:
            col = header.index(f"{label}:{m}" if label else m) + 1
            title = f"{m} ({label})" if label else m
            out.append(f'set ylabel "{m}"')
            out.append(f'plot "{csv_name}" skip {skip} using {x_expr}:{col} with lines title "{title}"')
        out.append("unset multiplot")
    else:
        y_expr, y_label = _axis_expr(axes[1], base, 2)
        out.append(f'set ylabel "{y_label}"')
        out.append("set view map")
        panels = []
        for label, res in series:
            if "stability" in res.spec.measures:
                panels.append((label, "stable"))
            panels.extend((label, m) for m in res.spec.value_measures)
        out.append(f"set multiplot layout {max(1, len(panels))},1")
        for label, m in panels:
            col = header.index(f"{label}:{m}" if label else m) + 1
            if m == "stable":
                out.append("set cbrange [0:1]")
                out.append('set palette maxcolors 2')
                out.append('set palette defined (0 "#d62728", 1 "#2ca02c")')
            else:
                out.append("set autoscale cb")
                out.append("set palette maxcolors 0")
                out.append("set palette rgbformulae 33,13,10")
            title = f"{m} ({label})" if label else m
            out.append(f'set title "{title}"')
            out.append(f'plot "{csv_name}" skip {skip} using {x_expr}:{y_expr}:{col} with image notitle')
        out.append("unset multiplot")
    try:
        path.write_text("\n".join(out) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write plot script {path}: {exc.strerror}") from exc
    return path

"""Figure-analogue sweeps shipped as ``figures/figN.cfg``.

Each ``[panel X]`` section holds one or two ``axis`` lines and a
``series`` line such as ``scheme_i: E_am; scheme_ii: E_cm``. A panel with
several series writes one CSV whose columns are prefixed by the series
label. ``kind = stability`` adds the stability column and renders maps.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional

from .config import ConfigError, RunConfig, apply_entries, parse_overrides, parse_text
from .model import load_preset
from .sweep import SweepSpec, emit_csv, emit_plot_script, parse_axis, run_sweep

FIGURES = tuple(f"fig{k}" for k in range(2, 11))


@dataclass(frozen=True)
class Panel:
    figure: str
    name: str
    series: tuple  # ((label, SweepSpec), ...)
    title: str = ""

    @property
    def stem(self) -> str:
        return f"{self.figure}{self.name}"


def figure_text(name: str) -> str:
    if name not in FIGURES:
        raise KeyError(f"unknown figure {name!r}; choose from {', '.join(FIGURES)} or all")
    return resources.files("optomagnonic").joinpath("figures", f"{name}.cfg").read_text()


def load_figure(name: str, text: Optional[str] = None) -> list[Panel]:
    source = f"{name}.cfg"
    parsed = parse_text(figure_text(name) if text is None else text, source)
    if parsed.entries:
        raise ConfigError("figure files contain only [panel X] sections", source, parsed.entries[0].line)
    panels = []
    for section, entries in parsed.sections.items():
        kind_word, _, panel_name = section.partition(" ")
        if kind_word != "panel" or not panel_name:
            raise ConfigError(f"unexpected section [{section}]", source)
        axes, series_text, title, kind, overrides = [], None, "", "curve", []
        for e in entries:
            if e.key == "axis":
                axes.append(parse_axis(e.value, source, e.line))
            elif e.key == "series":
                series_text = (e.value, e.line)
            elif e.key == "title":
                title = e.value
            elif e.key == "kind":
                if e.value not in ("curve", "stability"):
                    raise ConfigError("kind must be curve or stability", source, e.line)
                kind = e.value
            elif e.key == "set":
                overrides.extend(parse_overrides([s for s in e.value.split(";") if s.strip()], source))
            else:
                raise ConfigError(f"unknown panel key {e.key!r}", source, e.line)
        if series_text is None:
            raise ConfigError(f"panel {panel_name} has no series", source)
        series = []
        for item in series_text[0].split(";"):
            preset, _, wanted = item.partition(":")
            preset = preset.strip()
            try:
                base = RunConfig(load_preset(preset))
            except KeyError as exc:
                raise ConfigError(str(exc.args[0]), source, series_text[1]) from None
            if overrides:
                base = apply_entries(overrides, base, source)
            measures = tuple(m.strip() for m in wanted.split(",") if m.strip())
            if kind == "stability":
                measures = ("stability",) + measures
            try:
                spec = SweepSpec(base, tuple(axes), measures)
            except ValueError as exc:
                raise ConfigError(f"panel {panel_name}: {exc}", source) from None
            series.append((preset, spec))
        panels.append(Panel(name, panel_name, tuple(series), title))
    return panels


def run_figure(name: str, outdir, workers: Optional[int] = None) -> list[Path]:
    """Run every panel of ``name``; returns the written files (CSV, script per panel)."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    for panel in load_figure(name):
        results = [(label, run_sweep(spec, workers)) for label, spec in panel.series]
        table = results[0][1] if len(results) == 1 else results
        csv_path = emit_csv(table, outdir / f"{panel.stem}.csv")
        gp_path = emit_plot_script(table, outdir / f"{panel.stem}.gp", csv_path.name)
        written += [csv_path, gp_path]
    return written

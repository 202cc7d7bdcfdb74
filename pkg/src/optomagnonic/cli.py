"""Command-line front end.

Exit codes: 0 stable, 2 unstable, 1 error.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import dynamics, lyapunov, measures
from .config import ConfigError, RunConfig, load_run_config, schema_help
from .figures import FIGURES, run_figure
from .model import TWO_PI, presets
from .steady_state import SteadyStateError, effective_from_steady, solve_steady_state
from .sweep import THREADS_ENV, emit_csv, emit_plot_script, run_sweep, spec_from_section, stability_map

EXIT_STABLE, EXIT_ERROR, EXIT_UNSTABLE = 0, 1, 2


def _eng_mhz(omega: float) -> str:
    return f"{omega / TWO_PI / 1e6:+.4g} MHz"


def _line(out, label, value, extra=""):
    text = f"{value:.16e}" if isinstance(value, float) else str(value)
    out.append(f"  {label:<22} {text}{('   ' + extra) if extra else ''}")


def point_report(run: RunConfig) -> tuple[list[str], int]:
    out = []
    params = run.params
    steady = None
    if run.physical is not None:
        steady = solve_steady_state(run.physical, params)
        out.append("steady state:")
        _line(out, "converged", steady.converged)
        _line(out, "iterations", steady.iterations)
        _line(out, "residual", steady.residual)
        for name in ("a_s", "c_s", "m_s"):
            v = getattr(steady, name)
            out.append(f"  {name:<22} {v.real:.16e} {v.imag:+.16e}j")
        _line(out, "q_s", steady.q_s)
        params = effective_from_steady(steady, params)

    out.append("parameters (internal rad/s; f = omega/2pi in MHz):")
    for name in ("omega_b", "kappa_a", "kappa_c", "kappa_m", "gamma_b",
                 "G_a", "G_c", "G_m", "Delta_a", "Delta_c", "Delta_m", "omega_m"):
        value = getattr(params, name)
        _line(out, name, float(value), _eng_mhz(value))
    _line(out, "T", float(params.T), f"{params.T * 1e3:.4g} mK")
    _line(out, "n_m", float(params.n_m))
    _line(out, "n_b", float(params.n_b))
    _line(out, "drift_convention", run.convention)

    A = dynamics.build_drift(params, run.convention)
    D = dynamics.build_diffusion(params)
    report = dynamics.stability(A)
    out.append("stability:")
    _line(out, "stable", report.stable)
    _line(out, "max_real_eig", report.max_real_eig, "rad/s")
    if report.marginal:
        out.append("  warning: near-marginal stability")
    if not report.stable:
        return out, EXIT_UNSTABLE

    cm = lyapunov.solve_lyapunov(A, D)
    ent = measures.entanglement_report(cm.V)
    out.append("measures:")
    for name in ("E_am", "E_cm", "E_ac"):
        _line(out, name, getattr(ent, name))
    for key, value in ent.residuals.items():
        _line(out, f"R_{key}", value)
    _line(out, "R_min", ent.R_min)
    if ent.monogamy_violation:
        out.append("  warning: negative residual contangle (monogamy violation)")
    _line(out, "dC_am", ent.dC_am, "bits")
    _line(out, "dC_cm", ent.dC_cm, "bits")
    if steady is not None:
        for label, amp in (("a", steady.a_s), ("c", steady.c_s), ("m", steady.m_s)):
            block = 2.0 * measures.partial_trace(cm.V, [label]).V
            mean = (2.0 * amp.real, 2.0 * amp.imag)
            _line(out, f"C_Q_{label}", measures.coherence_single_mode(block, mean), "bits")
    _line(out, "lyapunov_residual", lyapunov.residual(A, D, cm.V))
    return out, EXIT_STABLE


class _Parser(argparse.ArgumentParser):
    # usage errors exit 1 so that 2 keeps meaning "unstable"
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _config_options(p: argparse.ArgumentParser, config_required=False):
    p.add_argument("--preset", choices=sorted(presets()), help="start from a parameter preset")
    p.add_argument("--config", required=config_required, help="config file (key = value)")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="override a config key (repeatable)")


def _threads_option(p):
    p.add_argument("--threads", type=int, default=None,
                   help=f"worker processes (default: ${THREADS_ENV} or CPU count)")


def build_parser() -> argparse.ArgumentParser:
    schema = schema_help()
    fmt = argparse.RawDescriptionHelpFormatter
    parser = _Parser(
        prog="optomagnonic",
        description="Steady-state entanglement, coherence and stability of a "
                    "double-cavity optomagnomechanical system.",
        epilog=schema, formatter_class=fmt,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("point", help="evaluate one parameter point", epilog=schema, formatter_class=fmt)
    _config_options(p)
    p.add_argument("--physical", action="store_true",
                   help="derive detunings and couplings from the physical drive keys")

    for name, text in (("sweep", "1D/2D parameter sweep from a config [sweep] section"),
                       ("stability-map", "2D stability map from a config [sweep] section")):
        p = sub.add_parser(name, help=text, epilog=schema, formatter_class=fmt)
        _config_options(p, config_required=True)
        p.add_argument("--out", default=".", help="output directory")
        _threads_option(p)

    p = sub.add_parser("presets", help="list parameter presets", epilog=schema, formatter_class=fmt)

    p = sub.add_parser("figures", help="run the shipped figure-analogue sweeps", epilog=schema,
                       formatter_class=fmt)
    p.add_argument("name", choices=FIGURES + ("all",))
    p.add_argument("outdir", nargs="?", default=None)
    p.add_argument("--out", default=None, help="output directory (alternative to OUTDIR)")
    _threads_option(p)
    return parser


def _cmd_point(args) -> int:
    overrides = list(args.overrides)
    if args.physical:
        overrides.append("physical=true")
    run, _ = load_run_config(args.preset, args.config, overrides)
    lines, code = point_report(run)
    print("\n".join(lines))
    return code


def _cmd_sweep(args, map_only=False) -> int:
    run, parsed = load_run_config(args.preset, args.config, args.overrides)
    if "sweep" not in parsed.sections:
        raise ConfigError("missing [sweep] section", parsed.source)
    spec = spec_from_section(run, parsed.sections["sweep"], parsed.source)
    if map_only:
        result = stability_map(spec, args.threads)
    else:
        result = run_sweep(spec, args.threads)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    stem = Path(args.config).stem
    csv_path = emit_csv(result, outdir / f"{stem}.csv")
    emit_plot_script(result, outdir / f"{stem}.gp", csv_path.name)
    n_stable = int(np.sum(result.stable))
    errors = sum(r.error is not None for r in result.records)
    print(f"{len(result.records)} points, {n_stable} stable, {errors} errors -> {csv_path}")
    return EXIT_STABLE


def _cmd_presets(args) -> int:
    for name, preset in presets().items():
        print(f"{name}:")
        p = preset.params
        for field in ("omega_b", "kappa_a", "kappa_c", "kappa_m", "gamma_b",
                      "G_a", "G_c", "G_m", "Delta_a", "Delta_c", "Delta_m"):
            print(f"  {field:<10} {getattr(p, field) / TWO_PI:.16e} Hz")
        print(f"  {'T':<10} {p.T:.16e} K")
    return EXIT_STABLE


def _cmd_figures(args) -> int:
    outdir = args.out or args.outdir or "figures_out"
    names = FIGURES if args.name == "all" else (args.name,)
    for name in names:
        files = run_figure(name, outdir, args.threads)
        print(f"{name}: {len(files) // 2} panels -> {outdir}")
    return EXIT_STABLE


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "point":
            return _cmd_point(args)
        if args.command == "sweep":
            return _cmd_sweep(args)
        if args.command == "stability-map":
            return _cmd_sweep(args, map_only=True)
        if args.command == "presets":
            return _cmd_presets(args)
        return _cmd_figures(args)
    except (ConfigError, SteadyStateError, lyapunov.LyapunovError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())

"""``splitring`` command-line front end.

Each subcommand reads one JSON config, runs the corresponding library
operation, writes a CSV artifact (plus an optional SVG rendered from that
CSV), and prints a one-line summary.  Exit codes: 0 success, 1 usage error,
2 config error, 3 numerical failure, 4 fit did not converge.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .analysis import MeasuredSpectrum, fit_spectrum, optimize_coupling, sweep_engine
from .config import RunConfig, parse_config
from .errors import (
    BranchAmbiguityError,
    ConfigError,
    InvalidParamError,
    NoConvergenceError,
    NoResonanceFoundError,
    NotUnitaryError,
    SingularSystemError,
)
from .herald import herald_arrays, heralding_report, peak_herald_wavelength
from .plotting import render_fit_plot, render_table_plot
from .response import default_lambda_grid, spectrum_sweep, sweep_arrays
from .tableio import Table

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_NOT_CONVERGED = 4

_NUMERICAL_ERRORS = (
    SingularSystemError,
    NoConvergenceError,
    BranchAmbiguityError,
    NotUnitaryError,
    NoResonanceFoundError,
    ZeroDivisionError,
    FloatingPointError,
)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """Argument parser that reports usage problems via exception (exit 1)."""

    def error(self, message: str) -> None:  # noqa: D401 - argparse hook
        raise _UsageError(message)


def _lambda_grid(cfg: RunConfig):
    return default_lambda_grid(cfg.ring, cfg.window.points, cfg.window.span_fsr,
                               cfg.window.center)


def _write(table: Table, out_dir: Path, name: str, plot: bool, logy: bool = False) -> Path:
    csv_path = out_dir / f"{name}.csv"
    table.write_csv(csv_path)
    if plot:
        render_table_plot(csv_path, out_dir / f"{name}.svg", logy=logy)
    return csv_path


def _cmd_spectrum(cfg: RunConfig, out_dir: Path, plot: bool) -> int:
    grid = _lambda_grid(cfg)
    table = spectrum_sweep(cfg.ring, grid, cfg.bus, cfg.ordering)
    csv_path = _write(table, out_dir, "spectrum", plot)
    t_fwd = table.column("T_fwd")
    idx = int(np.nanargmin(t_fwd))
    print(f"spectrum: {len(grid)} points, min T_fwd {t_fwd[idx]:.6g} "
          f"at {table.column('lambda_m')[idx]:.10g} m -> {csv_path}")
    return EXIT_OK


def _cmd_fields(cfg: RunConfig, out_dir: Path, plot: bool) -> int:
    grid = _lambda_grid(cfg)
    arrays = herald_arrays(cfg.ring, grid, cfg.bus, cfg.ordering)
    rows = np.column_stack([arrays["lambda_m"], arrays["p_fwd"],
                            arrays["p_bwd"], arrays["q"]])
    comments = []
    n_bad = int((~arrays["ok"]).sum())
    if n_bad:
        comments.append(f"{n_bad} wavelength(s) had no steady state")
    table = Table(columns=["lambda_m", "P_fwd", "P_bwd", "q"], rows=rows,
                  comments=comments)
    csv_path = _write(table, out_dir, "fields", plot, logy=True)
    idx = int(np.nanargmax(arrays["p_fwd"]))
    print(f"fields: peak P_fwd {arrays['p_fwd'][idx]:.6g} "
          f"at {grid[idx]:.10g} m -> {csv_path}")
    return EXIT_OK


def _cmd_herald(cfg: RunConfig, out_dir: Path, plot: bool) -> int:
    grid = _lambda_grid(cfg)
    lam = peak_herald_wavelength(cfg.ring, cfg.bus, cfg.ordering, window=grid)
    rep = heralding_report(cfg.ring, lam, cfg.bus, cfg.sfwm, cfg.ordering)
    rows = np.array([[lam, rep.eta, rep.q, rep.j_herald, rep.j_hm,
                      rep.m_param, rep.beta]])
    table = Table(columns=["lambda_m", "eta", "q", "j_herald", "j_hm",
                           "m_param", "beta"], rows=rows)
    csv_path = _write(table, out_dir, "herald", plot)
    print(f"herald: lambda* {lam:.10g} m, eta {rep.eta:.6g}, "
          f"J_Herald {rep.j_herald:.6g}, J_HM {rep.j_hm:.6g} -> {csv_path}")
    return EXIT_OK


def _cmd_sweep(cfg: RunConfig, out_dir: Path, plot: bool) -> int:
    if cfg.sweep is None:
        raise ConfigError("the sweep command needs a 'sweep' section")
    spec = cfg.sweep
    table = sweep_engine(cfg.ring, spec.axis, np.array(spec.grid), spec.metrics,
                         cfg.ordering, cfg.sfwm, cfg.bus)
    csv_path = _write(table, out_dir, "sweep", plot)
    summary = f"sweep: axis {spec.axis}, {len(spec.grid)} rows"
    if spec.metrics:
        first = spec.metrics[0]
        vals = table.column(first)
        if np.isfinite(vals).any():
            idx = int(np.nanargmax(vals))
            summary += (f", peak {first} {vals[idx]:.6g} "
                        f"at {spec.axis}={table.rows[idx, 0]:.10g}")
    print(f"{summary} -> {csv_path}")
    return EXIT_OK


def _cmd_optimize(cfg: RunConfig, out_dir: Path, plot: bool) -> int:
    if cfg.optimize is None:
        raise ConfigError("the optimize command needs an 'optimize' section")
    spec = cfg.optimize
    t_star, value = optimize_coupling(cfg.ring, spec.objective, spec.t_range,
                                      cfg.ordering, cfg.sfwm, cfg.bus,
                                      spec.coarse_points)
    table = Table(columns=["t_star", "value"], rows=np.array([[t_star, value]]))
    csv_path = _write(table, out_dir, "optimize", plot)
    print(f"optimize: objective {spec.objective.value}, t* {t_star:.6f}, "
          f"value {value:.6g} -> {csv_path}")
    return EXIT_OK


def _cmd_fit(cfg: RunConfig, out_dir: Path, plot: bool) -> int:
    if cfg.fit is None:
        raise ConfigError("the fit command needs a 'fit' section")
    spec = cfg.fit
    data = MeasuredSpectrum.from_csv(spec.data)
    result = fit_spectrum(data, cfg.ring, spec.free, cfg.ordering,
                          spec.max_iterations)
    (out_dir / "fit.txt").write_text(result.as_text())
    model = sweep_arrays(result.params, data.lambdas, cfg.bus, cfg.ordering)["T_fwd"]
    peak = np.nanmax(model)
    if np.isfinite(peak) and peak > 0:
        model = model / peak
    rows = np.column_stack([data.lambdas, data.powers / data.powers.max(), model])
    table = Table(columns=["lambda_m", "power", "model"], rows=rows)
    csv_path = out_dir / "fit.csv"
    table.write_csv(csv_path)
    if plot:
        render_fit_plot(csv_path, out_dir / "fit.svg")
    p = result.params
    print(f"fit: residual {result.residual:.6g}, converged "
          f"{str(result.converged).lower()}, t {p.t:.6f}, alpha {p.alpha:.6f}, "
          f"xi {p.xi:.6f}, zeta {p.zeta:.6f} -> {csv_path}")
    if not result.converged:
        print(f"error: fit: not converged after {result.iterations} iterations "
              f"(best residual {result.residual:.6g}; artifacts written)",
              file=sys.stderr)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


_HANDLERS = {
    "spectrum": _cmd_spectrum,
    "fields": _cmd_fields,
    "herald": _cmd_herald,
    "sweep": _cmd_sweep,
    "optimize": _cmd_optimize,
    "fit": _cmd_fit,
}

_HELP = {
    "spectrum": "transmission spectrum over a wavelength window",
    "fields": "circulating in-ring pump powers over a wavelength window",
    "herald": "heralding report at the rate-optimal wavelength",
    "sweep": "generic one-axis metric sweep",
    "optimize": "maximize a pair-generation objective over the coupling",
    "fit": "fit model parameters to a measured spectrum",
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="splitring",
                     description="Backscatter-aware ring resonator model: "
                                 "spectra, in-ring fields, heralded pair rates.")
    sub = parser.add_subparsers(dest="command", metavar="command")
    for name, handler in _HANDLERS.items():
        p = sub.add_parser(name, help=_HELP[name])
        p.add_argument("--config", required=True, help="JSON run configuration")
        p.add_argument("--plot", action="store_true",
                       help="also render an SVG from the written CSV")
        p.add_argument("--out", default=None, help="output directory "
                       "(default: output.dir from the config, else '.')")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override a config entry, e.g. ring.t=0.97")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: usage: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.command is None:
        print("error: usage: a command is required "
              f"({'|'.join(_HANDLERS)})", file=sys.stderr)
        return EXIT_USAGE
    try:
        cfg = parse_config(args.config, args.set)
        out_dir = Path(args.out) if args.out is not None else cfg.out_dir
        out_dir.mkdir(parents=True, exist_ok=True)
        return _HANDLERS[args.command](cfg, out_dir, args.plot)
    except ConfigError as exc:
        print(f"error: config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InvalidParamError as exc:
        print(f"error: config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except _NUMERICAL_ERRORS as exc:
        print(f"error: numerical: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())

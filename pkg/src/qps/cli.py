"""Command-line interface: ``qps <subcommand> [options]``.

Exit codes: 0 ok, 1 configuration error, 2 runtime error, 3 IO error.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

from qps import __version__
from qps.analytic import classify_model_point, model_edge_offset
from qps.cocycle import lyapunov_phase_averaged
from qps.errors import ConfigError, QPSError
from qps.localization import Thresholds, ipr, state_table
from qps.potentials import PotentialModel
from qps.spectrum import build_truncation, eigenpairs, eigenvalues
from qps.sweep import (
    IN_SPECTRUM_TOL,
    Axis,
    SweepConfig,
    Table,
    emit_outputs,
    run_acceleration_scan,
    run_le_comparison,
    run_phase_diagram,
    to_csv,
    to_json,
)

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME, EXIT_IO = 0, 1, 2, 3

DEFAULT_DIAGRAM_AXES = ("alpha:-0.95:0.95:64", "E:-4:4:64")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _eps_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"--eps expects a comma-separated list of numbers, got {text!r}")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", default="gps", choices=["gps", "amo", "shifted", "tan2"])
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--E", dest="energy", type=float, default=0.0, help="energy for single-point commands")
    p.add_argument("--freq", default="golden", help="golden, silver or a number in (0, 1)")
    p.add_argument("--theta", type=float, default=0.0)
    p.add_argument("--N", dest="N", type=int, default=500, help="truncation size")
    p.add_argument("--steps", type=int, default=None, help="orbit length for numeric Lyapunov exponents")
    p.add_argument("--phases", type=int, default=1)
    p.add_argument("--eps", type=_eps_list, default=(0.0,), help="comma-separated imaginary phase offsets")
    p.add_argument("--h", type=float, default=0.01, help="finite-difference step for the acceleration")
    p.add_argument("--grid", action="append", default=[], metavar="axis:min:max:count")
    p.add_argument("--format", dest="fmt", default="csv", choices=["csv", "json"])
    p.add_argument("--out", default=None, help="output path; stdout if omitted")
    p.add_argument("--threads", type=int, default=None, help="worker threads (fallback: $QPS_THREADS)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qps", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"qps {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "le": "closed-form and numeric Lyapunov exponent at one energy",
        "spectrum": "eigenvalues (and IPR) of an N-site truncation",
        "phase-diagram": "regime/IPR grid over (alpha, E) or other axes",
        "le-scan": "formula vs numeric exponent along an E axis",
        "acceleration": "L(eps) and quantized acceleration along an E axis",
        "localization": "per-eigenstate IPR, decay fit and labels",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text, description=text)
        _common(p)
        if name == "le-scan":
            p.add_argument("--spectrum-tol", type=float, default=IN_SPECTRUM_TOL,
                           help="distance to a truncation eigenvalue that counts as in-spectrum")
        if name == "spectrum":
            p.add_argument("--vectors", action="store_true", help="also compute eigenvectors and report IPR")
        if name == "localization":
            p.add_argument("--c-loc", type=float, default=Thresholds.c_loc)
            p.add_argument("--c-ext", type=float, default=Thresholds.c_ext)
            p.add_argument("--r2-min", type=float, default=Thresholds.r2_min)
    return parser


def _config(args, default_steps: int, default_axes: Sequence[str] = ()) -> SweepConfig:
    grid = args.grid or list(default_axes)
    cfg = SweepConfig(
        model=args.model, lam=args.lam, alpha=args.alpha, E=args.energy, theta=args.theta, freq=args.freq,
        axes=tuple(Axis.parse(g) for g in grid), N=args.N,
        le_steps=default_steps if args.steps is None else args.steps, phases=args.phases,
        eps_values=tuple(args.eps), h=args.h, in_spectrum_tol=getattr(args, "spectrum_tol", IN_SPECTRUM_TOL),
        output=args.out, fmt=args.fmt, threads=args.threads,
    )
    return cfg.validate()


def _model(cfg: SweepConfig) -> PotentialModel:
    try:
        return PotentialModel.from_name(cfg.model, cfg.lam, cfg.alpha)
    except QPSError as exc:
        raise ConfigError(str(exc)) from exc


def _cmd_le(args) -> Table:
    cfg = _config(args, 100_000)
    model = _model(cfg)
    setup = cfg.setup()
    point = classify_model_point(model, cfg.E)
    row = {"E": cfg.E, "le_formula": point.le_value, "regime": point.classification.value,
           "edge_distance": model_edge_offset(model, cfg.E), "le_numeric": None, "tail_variation": None}
    if cfg.le_steps:
        est = lyapunov_phase_averaged(model, setup.frequency_b, cfg.E, 0.0, cfg.le_steps, cfg.phases,
                                      setup.phase_theta)
        row["le_numeric"], row["tail_variation"] = est.value, est.tail_variation
    return Table("le", tuple(row), [row], cfg.to_dict())


def _truncation(cfg):
    if cfg.N < 2:
        raise ConfigError("N must be >= 2")
    return build_truncation(_model(cfg), cfg.setup(), 0, cfg.N - 1)


def _cmd_spectrum(args) -> Table:
    cfg = _config(args, 0)
    op = _truncation(cfg)
    if args.vectors:
        sd = eigenpairs(op)
        rows = [{"index": int(k), "E": float(E), "ipr": ipr(u)}
                for k, E, u in zip(sd.indices, sd.eigenvalues, sd.eigenvectors)]
        return Table("spectrum", ("index", "E", "ipr"), rows, cfg.to_dict())
    rows = [{"index": k, "E": float(E)} for k, E in enumerate(eigenvalues(op))]
    return Table("spectrum", ("index", "E"), rows, cfg.to_dict())


def _cmd_localization(args) -> Table:
    cfg = _config(args, 0)
    op = _truncation(cfg)
    th = Thresholds(c_loc=args.c_loc, c_ext=args.c_ext, r2_min=args.r2_min)
    rows = state_table(eigenpairs(op), _model(cfg), th)
    cols = ("E", "ipr", "decay_rate", "fit_r2", "state", "regime", "le_formula", "edge_offset")
    return Table("localization", cols, rows, cfg.to_dict())


def _cmd_phase_diagram(args) -> Table:
    return run_phase_diagram(_config(args, 0, DEFAULT_DIAGRAM_AXES))


def _cmd_le_scan(args) -> Table:
    return run_le_comparison(_config(args, 100_000))


def _cmd_acceleration(args) -> Table:
    return run_acceleration_scan(_config(args, 100_000))


COMMANDS = {
    "le": _cmd_le, "spectrum": _cmd_spectrum, "phase-diagram": _cmd_phase_diagram,
    "le-scan": _cmd_le_scan, "acceleration": _cmd_acceleration, "localization": _cmd_localization,
}
SWEEPS = {"phase-diagram", "le-scan", "acceleration"}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        table = COMMANDS[args.command](args)
    except (ConfigError, ValueError) as exc:
        # QPS parameter errors subclass ValueError
        print(f"qps: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (QPSError, ArithmeticError, RuntimeError) as exc:
        print(f"qps: runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    try:
        if args.out is None:
            sys.stdout.write(to_csv(table) if args.fmt == "csv" else to_json(table))
        elif args.command in SWEEPS:
            for path in emit_outputs(table, args.fmt, args.out):
                print(path, file=sys.stderr)
        else:
            Path(args.out).write_text(to_csv(table) if args.fmt == "csv" else to_json(table))
    except OSError as exc:
        print(f"qps: IO error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

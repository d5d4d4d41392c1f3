"""Configuration-driven parameter sweeps and their serialisation."""
from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

import numpy as np

from qps import __version__
from qps.analytic import classify_model_point, model_edge_offset, model_lyapunov_formula, mobility_edge_energy
from qps.cocycle import ComplexifiedPhase, lyapunov_phase_averaged
from qps.errors import ConfigError, QPSError
from qps.localization import ipr
from qps.potentials import Kind, PotentialModel
from qps.spectrum import QuasiPeriodicSetup, approximate_spectrum, build_truncation, eigenpairs

AXIS_NAMES = ("alpha", "lambda", "E", "theta")
GRID_COLUMNS = ("alpha", "lambda", "E", "le_formula", "le_numeric", "regime", "ipr", "edge_distance", "status")
THREADS_ENV = "QPS_THREADS"
#: Default distance to a pooled eigenvalue for an energy to count as in the spectrum.
IN_SPECTRUM_TOL = 0.05
INTEGER_TOL = 0.1


@dataclass(frozen=True)
class Axis:
    name: str
    min: float
    max: float
    steps: int

    @classmethod
    def parse(cls, text: str) -> "Axis":
        parts = text.split(":")
        if len(parts) != 4:
            raise ConfigError(f"grid axis must look like name:min:max:count, got {text!r}")
        try:
            return cls(parts[0], float(parts[1]), float(parts[2]), int(parts[3]))
        except ValueError:
            raise ConfigError(f"bad numbers in grid axis {text!r}") from None

    @property
    def values(self) -> np.ndarray:
        return np.linspace(self.min, self.max, self.steps)


@dataclass(frozen=True)
class SweepConfig:
    model: str = "gps"
    lam: float = 1.0
    alpha: float = 0.0
    E: float = 0.0
    theta: float = 0.0
    freq: str = "golden"
    axes: tuple[Axis, ...] = ()
    N: int = 500
    le_steps: int = 0
    phases: int = 1
    eps_values: tuple[float, ...] = (0.0,)
    h: float = 0.01
    in_spectrum_tol: float = IN_SPECTRUM_TOL
    output: Optional[str] = None
    fmt: str = "csv"
    threads: Optional[int] = None

    def validate(self) -> "SweepConfig":
        names = [a.name for a in self.axes]
        if len(self.axes) > 2:
            raise ConfigError("at most two swept axes")
        if len(set(names)) != len(names):
            raise ConfigError(f"duplicate axis in {names}")
        for a in self.axes:
            if a.name not in AXIS_NAMES:
                raise ConfigError(f"unknown axis {a.name!r}; choose from {AXIS_NAMES}")
            if a.steps < 2:
                raise ConfigError(f"axis {a.name} needs at least 2 steps")
        if self.fmt not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {self.fmt!r}")
        if self.N < 0 or self.N == 1:
            raise ConfigError("N must be 0 (no spectrum) or >= 2")
        if self.le_steps and self.le_steps < 1000:
            raise ConfigError("le_steps must be 0 or >= 1000")
        if self.phases < 1:
            raise ConfigError("phases must be >= 1")
        if self.threads is not None and self.threads < 1:
            raise ConfigError("threads must be >= 1")
        if self.h <= 0.0 or self.in_spectrum_tol <= 0.0:
            raise ConfigError("h and in_spectrum_tol must be positive")
        try:
            Kind(self.model)
            self.setup()
            fixed = self.base_params()
            if "alpha" not in names and "lambda" not in names:
                PotentialModel.from_name(self.model, fixed["lambda"], fixed["alpha"])
        except (QPSError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
        return self

    def base_params(self) -> dict:
        return {"alpha": float(self.alpha), "lambda": float(self.lam), "E": float(self.E), "theta": float(self.theta)}

    def setup(self, theta: Optional[float] = None) -> QuasiPeriodicSetup:
        return QuasiPeriodicSetup.parse(self.freq, self.theta if theta is None else theta)

    def worker_count(self) -> int:
        if self.threads is not None:
            return self.threads
        env = os.environ.get(THREADS_ENV)
        if env:
            try:
                n = int(env)
            except ValueError:
                raise ConfigError(f"{THREADS_ENV} must be an integer, got {env!r}") from None
            if n < 1:
                raise ConfigError(f"{THREADS_ENV} must be >= 1")
            return n
        return os.cpu_count() or 1

    def to_dict(self) -> dict:
        """Config echo for manifests; execution-only fields are left out so the
        data files do not depend on the schedule."""
        d = dataclasses.asdict(self)
        del d["threads"], d["output"]
        d["axes"] = [dataclasses.asdict(a) for a in self.axes]
        d["eps_values"] = list(self.eps_values)
        return d


@dataclass
class Table:
    kind: str
    columns: tuple[str, ...]
    rows: list[dict]
    config: dict = field(default_factory=dict)


@dataclass
class PhaseDiagramGrid(Table):
    axes: tuple[Axis, ...] = ()
    edge_curve: list[tuple[float, float]] = field(default_factory=list)


def _model_for(config: SweepConfig, params: dict) -> PotentialModel:
    return PotentialModel.from_name(config.model, params["lambda"], params["alpha"])


def _error_status(exc: Exception) -> str:
    return f"error:{type(exc).__name__}"


def _map(config: SweepConfig, fn, items):
    workers = config.worker_count()
    if workers == 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _point_record(config: SweepConfig, model: PotentialModel, params: dict) -> dict:
    E = params["E"]
    rec = {"alpha": params["alpha"], "lambda": params["lambda"], "E": E, "le_formula": None,
           "le_numeric": None, "regime": None, "ipr": None, "edge_distance": None, "status": "ok"}
    point = classify_model_point(model, E)
    rec["le_formula"] = float(point.le_value)
    rec["regime"] = point.classification.value
    rec["edge_distance"] = model_edge_offset(model, E)
    if config.le_steps:
        setup = config.setup(params["theta"])
        rec["le_numeric"] = lyapunov_phase_averaged(model, setup.frequency_b, E, 0.0, config.le_steps,
                                                    config.phases, setup.phase_theta).value
    return rec


def _failed_record(params: dict, exc: Exception) -> dict:
    rec = dict.fromkeys(GRID_COLUMNS)
    rec.update({"alpha": params["alpha"], "lambda": params["lambda"], "E": params["E"],
                "status": _error_status(exc)})
    return rec


def _column_task(config: SweepConfig, column: list[tuple[int, dict]], e_axis: Optional[Axis]) -> list[tuple[int, dict]]:
    """Fill every cell that shares the non-energy coordinates of ``column``."""
    params0 = column[0][1]
    out = []
    try:
        model = _model_for(config, params0)
    except QPSError as exc:
        return [(i, _failed_record(p, exc)) for i, p in column]
    bins: dict[int, list[float]] = {}
    spectral_status = None
    if e_axis is not None and config.N >= 2:
        try:
            op = build_truncation(model, config.setup(params0["theta"]), 0, config.N - 1)
            sd = eigenpairs(op)
            values = e_axis.values
            width = values[1] - values[0]
            for E, u in zip(sd.eigenvalues, sd.eigenvectors):
                j = int(np.rint((E - values[0]) / width))
                if 0 <= j < e_axis.steps:
                    bins.setdefault(j, []).append(ipr(u))
        except QPSError as exc:
            spectral_status = _error_status(exc)
    for j, (i, params) in enumerate(column):
        try:
            rec = _point_record(config, model, params)
        except QPSError as exc:
            out.append((i, _failed_record(params, exc)))
            continue
        if spectral_status is not None:
            rec["status"] = spectral_status
        elif j in bins:
            rec["ipr"] = float(np.mean(bins[j]))
        out.append((i, rec))
    return out


def _cell_params(config: SweepConfig):
    """All cells in row-major axis order as ``(index, params)``."""
    base = config.base_params()
    shape = tuple(a.steps for a in config.axes)
    cells = []
    for flat, idx in enumerate(np.ndindex(*shape)):
        p = dict(base)
        for axis, k in zip(config.axes, idx):
            p[axis.name] = float(axis.values[k])
        cells.append((flat, idx, p))
    return cells


def run_phase_diagram(config: SweepConfig) -> PhaseDiagramGrid:
    """Phase-diagram grid with the analytic regime of every cell and the mean
    IPR of the truncation eigenstates falling in its energy bin.

    Cells sharing all non-energy coordinates are computed as one task so that
    each spectrum is diagonalised once. Layout is row-major in ``config.axes``.
    """
    config.validate()
    names = [a.name for a in config.axes]
    e_axis = config.axes[names.index("E")] if "E" in names else None
    cells = _cell_params(config)
    columns: dict[tuple, list] = {}
    for flat, idx, p in cells:
        key = tuple(k for k, n in zip(idx, names) if n != "E")
        columns.setdefault(key, []).append((flat, p))
    tasks = list(columns.values())
    slots: list[Optional[dict]] = [None] * len(cells)
    for result in _map(config, lambda col: _column_task(config, col, e_axis), tasks):
        for i, rec in result:
            slots[i] = rec
    return PhaseDiagramGrid("phase-diagram", GRID_COLUMNS, slots, config.to_dict(), tuple(config.axes),
                            edge_curve(config))


def edge_curve(config: SweepConfig) -> list[tuple[float, float]]:
    """Analytic mobility edge ``(alpha, E*)`` along a swept alpha axis."""
    axes = {a.name: a for a in config.axes}
    if "alpha" not in axes or "lambda" in axes or config.lam == 0.0:
        return []
    if Kind(config.model) not in (Kind.GPS,):
        return []
    return [(float(a), mobility_edge_energy(float(a), config.lam)) for a in axes["alpha"].values if a != 0.0]


def _energy_values(config: SweepConfig) -> np.ndarray:
    axes = {a.name: a for a in config.axes}
    if set(axes) - {"E"}:
        raise ConfigError("this sweep only accepts an E axis")
    return axes["E"].values if "E" in axes else np.array([config.E])


def run_le_comparison(config: SweepConfig) -> Table:
    """Analytic vs numeric exponent along an energy axis.

    ``in_spectrum`` marks energies within ``config.in_spectrum_tol`` of a pooled
    bulk eigenvalue of the ``N``-site truncations (boundary states dropped).
    The spectrum has many small gaps where the exponent exceeds the formula,
    so the default 0.05 also flags energies just outside it.
    """
    config.validate()
    energies = _energy_values(config)
    if not config.le_steps:
        raise ConfigError("le comparison needs le_steps >= 1000")
    params = config.base_params()
    try:
        model = _model_for(config, params)
    except QPSError as exc:
        raise ConfigError(str(exc)) from exc
    setup = config.setup()
    pooled = (approximate_spectrum(model, setup, config.N, config.phases, drop_boundary_states=True)
              if config.N >= 2 else None)

    def row(E):
        rec = {"E": float(E), "le_formula": None, "le_numeric": None, "abs_gap": None,
               "in_spectrum": None, "status": "ok"}
        try:
            rec["le_formula"] = float(model_lyapunov_formula(model, float(E)))
            rec["le_numeric"] = lyapunov_phase_averaged(model, setup.frequency_b, float(E), 0.0, config.le_steps,
                                                        config.phases, setup.phase_theta).value
            rec["abs_gap"] = abs(rec["le_numeric"] - rec["le_formula"])
        except QPSError as exc:
            rec["status"] = _error_status(exc)
        if pooled is not None:
            rec["in_spectrum"] = bool(np.min(np.abs(pooled - E)) < config.in_spectrum_tol)
        return rec

    rows = _map(config, row, list(energies))
    return Table("le-comparison", ("E", "le_formula", "le_numeric", "abs_gap", "in_spectrum", "status"),
                 rows, config.to_dict())


def run_acceleration_scan(config: SweepConfig) -> Table:
    """``L(eps)`` and the finite-difference acceleration at ``h`` and ``h/2``."""
    config.validate()
    energies = _energy_values(config)
    steps = config.le_steps or 100_000
    try:
        model = _model_for(config, config.base_params())
    except QPSError as exc:
        raise ConfigError(str(exc)) from exc
    setup = config.setup()
    h = config.h
    cells = [(float(E), float(eps)) for E in energies for eps in config.eps_values]

    def le(E, eps):
        return lyapunov_phase_averaged(model, setup.frequency_b, E, eps, steps, config.phases,
                                       setup.phase_theta).value

    def row(cell):
        E, eps = cell
        rec = {"E": E, "eps": eps, "L": None, "omega": None, "omega_half": None, "nearest_integer": None,
               "near_integer": None, "status": "ok"}
        try:
            ComplexifiedPhase(eps + h).check(model)
            base = le(E, eps)
            rec["L"] = base
            rec["omega"] = (le(E, eps + h) - base) / (2.0 * math.pi * h)
            rec["omega_half"] = (le(E, eps + h / 2) - base) / (math.pi * h)
            k = round(rec["omega"])
            rec["nearest_integer"] = int(k)
            rec["near_integer"] = abs(rec["omega"] - k) <= INTEGER_TOL
        except QPSError as exc:
            rec["status"] = _error_status(exc)
        return rec

    rows = _map(config, row, cells)
    return Table("acceleration", ("E", "eps", "L", "omega", "omega_half", "nearest_integer", "near_integer",
                                  "status"), rows, config.to_dict())


# -- serialisation -------------------------------------------------------------

def _csv_value(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return "" if math.isnan(x) else repr(x)
    return str(x)


def _json_value(x):
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return None if math.isnan(x) or math.isinf(x) else x
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def to_csv(table: Table) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table.columns)
    for rec in table.rows:
        w.writerow([_csv_value(rec.get(c)) for c in table.columns])
    return buf.getvalue()


def to_json(table: Table, timestamp: Optional[str] = None) -> str:
    manifest = {
        "kind": table.kind,
        "tool_version": __version__,
        "timestamp": timestamp or datetime.now(timezone.utc).isoformat(),
        "config": table.config,
        "columns": list(table.columns),
        "cells": [{c: _json_value(rec.get(c)) for c in table.columns} for rec in table.rows],
    }
    if isinstance(table, PhaseDiagramGrid):
        manifest["edge_curve"] = [[a, e] for a, e in table.edge_curve]
    return json.dumps(manifest, indent=1, allow_nan=False) + "\n"


_GRID_PLOT = '''"""Heatmap of {data} with the analytic mobility edge overlaid."""
import csv
from pathlib import Path

import matplotlib.pyplot as plt
import numpy as np

here = Path(__file__).resolve().parent
x_name, y_name, value = {x!r}, {y!r}, "ipr"
rows = list(csv.DictReader(open(here / {data!r})))
xs = sorted({{float(r[x_name]) for r in rows}})
ys = sorted({{float(r[y_name]) for r in rows}})
z = np.full((len(ys), len(xs)), np.nan)
for r in rows:
    if r[value]:
        z[ys.index(float(r[y_name])), xs.index(float(r[x_name]))] = float(r[value])
plt.pcolormesh(xs, ys, z, shading="nearest", cmap="Blues", vmin=0, vmax=1)
plt.colorbar(label=value)
edge = here / {edge!r}
if edge.exists():
    pts = [(float(r["alpha"]), float(r["E_edge"])) for r in csv.DictReader(open(edge))]
    for sign in (-1, 1):
        seg = [(a, e) for a, e in pts if a * sign > 0]
        if seg:
            plt.plot(*zip(*seg), "r-", lw=1.5)
plt.xlabel(x_name)
plt.ylabel(y_name)
plt.ylim(min(ys), max(ys))
plt.savefig(here / {png!r}, dpi=150)
'''

_TABLE_PLOT = '''"""Line plot of {data}."""
import csv
from pathlib import Path

import matplotlib.pyplot as plt

here = Path(__file__).resolve().parent
rows = [r for r in csv.DictReader(open(here / {data!r})) if r["status"] == "ok"]
x = [float(r[{x!r}]) for r in rows]
for col in {ys!r}:
    plt.plot(x, [float(r[col]) if r[col] else float("nan") for r in rows], ".-", label=col)
plt.xlabel({x!r})
plt.legend()
plt.savefig(here / {png!r}, dpi=150)
'''


def emit_outputs(table: Table, fmt: str, path) -> list[Path]:
    """Write the data file, a plot script and (for grids) the edge-curve file."""
    if fmt not in ("csv", "json"):
        raise ConfigError(f"format must be csv or json, got {fmt!r}")
    path = Path(path)
    written = []
    if isinstance(table, PhaseDiagramGrid):
        edge_path = path.with_name(path.stem + "_edge.csv")
        lines = ["alpha,E_edge\n"] + [f"{a!r},{e!r}\n" for a, e in table.edge_curve]
        edge_path.write_text("".join(lines))
        written.append(edge_path)
    path.write_text(to_csv(table) if fmt == "csv" else to_json(table))
    written.insert(0, path)
    csv_name = path.name
    if fmt == "json":
        # the plot scripts read CSV; keep a sibling copy next to the manifest
        csv_path = path.with_suffix(".csv")
        csv_path.write_text(to_csv(table))
        written.append(csv_path)
        csv_name = csv_path.name
    script = path.with_name(path.stem + "_plot.py")
    png = path.stem + ".png"
    if isinstance(table, PhaseDiagramGrid):
        names = [a.name for a in table.axes] or ["alpha", "E"]
        x, y = (names + ["E"])[:2]
        body = _GRID_PLOT.format(data=csv_name, x=x, y=y, edge=path.stem + "_edge.csv", png=png)
    else:
        x = table.columns[0]
        ys = [c for c in table.columns if c in ("le_formula", "le_numeric", "L", "omega")]
        body = _TABLE_PLOT.format(data=csv_name, x=x, ys=ys, png=png)
    script.write_text(body)
    written.append(script)
    return written

"""Eigenstate diagnostics: IPR, exponential envelope fits, localized/extended labels."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from qps.analytic import PointClass, classify_model_point, model_edge_offset
from qps.errors import FitFailure, InvalidParameter, NoResolvedStates, NotNormalized
from qps.potentials import PotentialModel
from qps.spectrum import SpectralData

CORE_HALFWIDTH = 5
AMPLITUDE_FLOOR = 1e-14
MIN_FIT_SITES = 10


class StateClass(str, enum.Enum):
    LOCALIZED = "Localized"
    EXTENDED = "Extended"
    UNRESOLVED = "Unresolved"


@dataclass(frozen=True)
class Thresholds:
    """Finite-size classification cut-offs.

    Localized needs ``ipr > c_loc`` and an exponential fit with ``r2 >= r2_min``;
    Extended needs ``ipr < c_ext / N**ext_exponent``.
    """

    c_loc: float = 0.05
    c_ext: float = 10.0
    ext_exponent: float = 0.8
    r2_min: float = 0.8
    r2_report: float = 0.5


DEFAULT_THRESHOLDS = Thresholds()


@dataclass(frozen=True)
class StateDiagnostics:
    energy: float
    ipr: float
    decay_rate: Optional[float]
    fit_r2: Optional[float]
    classification: StateClass


def ipr(vector) -> float:
    """Inverse participation ratio ``sum u_n^4`` of a unit vector."""
    u = np.asarray(vector, dtype=float)
    if abs(float(np.dot(u, u)) - 1.0) > 1e-8:
        raise NotNormalized(f"vector norm^2 = {float(np.dot(u, u))!r}, expected 1")
    return float(np.sum(u ** 4))


def _fit_sites(u, peak):
    n = np.arange(u.size)
    dist = np.abs(n - peak)
    amp = np.abs(u)
    keep = (dist >= CORE_HALFWIDTH) & (amp > AMPLITUDE_FLOOR)
    return dist[keep].astype(float), np.log(amp[keep])


def decay_rate_fit(vector, center_policy: str = "argmax") -> tuple[float, float]:
    """Least-squares slope of ``log|u_n|`` against ``|n - n_peak|``.

    Sites closer than :data:`CORE_HALFWIDTH` to the peak and amplitudes below
    :data:`AMPLITUDE_FLOOR` are excluded. Returns ``(rate, r2)``.
    """
    u = np.asarray(vector, dtype=float)
    if u.size < 50:
        raise InvalidParameter("decay fit needs at least 50 sites")
    if center_policy != "argmax":
        raise InvalidParameter(f"unknown center policy {center_policy!r}")
    x, y = _fit_sites(u, int(np.argmax(np.abs(u))))
    if x.size < MIN_FIT_SITES:
        raise FitFailure(f"only {x.size} usable sites for the decay fit")
    xm, ym = x.mean(), y.mean()
    sxx = float(np.sum((x - xm) ** 2))
    if sxx == 0.0:
        raise FitFailure("all usable sites sit at the same distance from the peak")
    slope = float(np.sum((x - xm) * (y - ym))) / sxx
    resid = y - (ym + slope * (x - xm))
    ss_tot = float(np.sum((y - ym) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0.0 else 0.0
    return abs(slope), min(max(r2, 0.0), 1.0)


def classify_state(energy: float, vector, thresholds: Thresholds = DEFAULT_THRESHOLDS) -> StateDiagnostics:
    u = np.asarray(vector, dtype=float)
    N = u.size
    p = ipr(u)
    rate = r2 = None
    fit_ok = False
    try:
        rate, r2 = decay_rate_fit(u)
        fit_ok = r2 >= thresholds.r2_min
    except (FitFailure, InvalidParameter):
        pass
    if p > thresholds.c_loc and fit_ok:
        cls = StateClass.LOCALIZED
    elif p < thresholds.c_ext / N ** thresholds.ext_exponent:
        cls = StateClass.EXTENDED
    else:
        cls = StateClass.UNRESOLVED
    if r2 is None or r2 < thresholds.r2_report:
        rate = None
    return StateDiagnostics(float(energy), p, rate, r2, cls)


_EXPECTED = {PointClass.POSITIVE: StateClass.LOCALIZED, PointClass.ZERO: StateClass.EXTENDED}


def state_table(spectral: SpectralData, model: PotentialModel,
                thresholds: Thresholds = DEFAULT_THRESHOLDS) -> list[dict]:
    """Per-eigenstate diagnostics alongside the analytic regime label."""
    rows = []
    for E, u in zip(spectral.eigenvalues, spectral.eigenvectors):
        diag = classify_state(E, u, thresholds)
        point = classify_model_point(model, float(E))
        rows.append({
            "E": float(E), "ipr": diag.ipr, "decay_rate": diag.decay_rate, "fit_r2": diag.fit_r2,
            "state": diag.classification.value, "regime": point.classification.value,
            "le_formula": point.le_value, "edge_offset": model_edge_offset(model, float(E)),
        })
    return rows


def edge_agreement(spectral: SpectralData, model: PotentialModel, margin: float = 0.1,
                   thresholds: Thresholds = DEFAULT_THRESHOLDS) -> float:
    """Fraction of resolved states whose label matches the analytic regime.

    States within ``margin`` (in ``alpha E`` units) of the mobility edge and
    Unresolved states are left out.
    """
    if spectral.eigenvectors is None:
        raise InvalidParameter("edge agreement needs eigenvectors")
    agree = total = 0
    for row in state_table(spectral, model, thresholds):
        off = row["edge_offset"]
        if not math.isnan(off) and abs(off) < margin:
            continue
        expected = _EXPECTED.get(PointClass(row["regime"]))
        if expected is None or row["state"] == StateClass.UNRESOLVED.value:
            continue
        total += 1
        agree += row["state"] == expected.value
    if total == 0:
        raise NoResolvedStates("no resolved states outside the edge margin")
    return agree / total

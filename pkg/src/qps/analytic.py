"""Closed-form Lyapunov exponent, its lower bound, and regime classifiers.

All formulas share the quadratic ``r^2 - s r + alpha^2 = 0`` with
``s = alpha E + 2 lam``; the exponent is the log of the larger root modulus
normalised by ``1 + sqrt(1 - alpha^2)``, floored at zero.
"""
from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass

import numpy as np

from qps.errors import DegenerateEdge, InvalidParameter, NotLocalized
from qps.potentials import Kind, PotentialModel, canonicalize

#: Tolerance on ``alpha E - 2 sgn(lam) (1 - |lam|)`` for edge classification.
EDGE_TOL = 1e-12


class PointClass(str, enum.Enum):
    POSITIVE = "PositiveLE"
    ZERO = "ZeroLE"
    EDGE = "Edge"


class ParameterRegime(str, enum.Enum):
    COEXISTENCE = "Coexistence"
    ALL_POSITIVE = "AllPositive"
    ALL_ZERO = "AllZero"
    INDETERMINATE = "Indeterminate"


@dataclass(frozen=True)
class RegimePoint:
    classification: PointClass
    le_value: float


def _check_alpha(alpha):
    if not abs(alpha) < 1.0:
        raise InvalidParameter(f"|alpha| must be < 1, got {alpha}")


def _scalar_or_array(x):
    return float(x) if np.ndim(x) == 0 else x


def _larger_root_modulus(alpha, s):
    s = np.asarray(s)
    sq = np.sqrt((s * s - 4.0 * alpha * alpha).astype(complex))
    return np.maximum(np.abs((s + sq) / 2.0), np.abs((s - sq) / 2.0))


def root_moduli(alpha: float, lam: float, E):
    """Moduli of both roots of ``r^2 - (alpha E + 2 lam) r + alpha^2``."""
    s = np.asarray(alpha * np.asarray(E, dtype=complex) + 2.0 * lam)
    sq = np.sqrt(s * s - 4.0 * alpha * alpha)
    return np.abs((s + sq) / 2.0), np.abs((s - sq) / 2.0)


def lyapunov_formula(alpha: float, lam: float, E):
    """Lyapunov exponent on the spectrum; vectorised over ``E``."""
    _check_alpha(alpha)
    s = alpha * np.asarray(E, dtype=float) + 2.0 * lam
    ratio = _larger_root_modulus(alpha, s) / (1.0 + math.sqrt(1.0 - alpha * alpha))
    # ratio = 0 only at alpha = s = 0, where the exponent is 0
    return _scalar_or_array(np.log(np.maximum(ratio, 1.0)))


def lyapunov_formula_shifted(alpha: float, lam: float, E: float) -> float:
    """Exponent for ``2 lam (1 - c)/(1 - alpha c)``; valid for ``|alpha| <= 1``.

    At ``alpha = -1`` this is the tan^2 potential.
    """
    if abs(alpha) > 1.0:
        raise InvalidParameter(f"|alpha| must be <= 1, got {alpha}")
    s = alpha * E - 2.0 * lam
    root = cmath.sqrt(s * s - 4.0 * alpha * alpha)
    den = 2.0 * (1.0 + math.sqrt(1.0 - alpha * alpha))
    return math.log(max(abs((s + root) / den), abs((s - root) / den), 1.0))


def herman_lower_bound(alpha: float, lam: float, z: complex) -> float:
    """Subharmonic lower bound on the exponent, valid at every complex energy."""
    _check_alpha(alpha)
    s = alpha * complex(z) + 2.0 * lam
    root = cmath.sqrt(s * s - 4.0 * alpha * alpha)
    m = max(abs(s + root), abs(s - root)) / 2.0
    return math.log(max(m / (1.0 + math.sqrt(1.0 - alpha * alpha)), 1.0))


def model_lyapunov_formula(model: PotentialModel, E: float) -> float:
    """Closed-form exponent for any supported family at energy ``E``."""
    if model.kind in (Kind.GPS, Kind.ALMOST_MATHIEU):
        return lyapunov_formula(model.alpha, model.lam, E)
    return lyapunov_formula_shifted(model.alpha, model.lam, E)


def edge_offset(alpha: float, lam: float, E: float) -> float:
    """Signed ``alpha E - 2 sgn(lam) (1 - |lam|)``; NaN when ``lam = 0``."""
    if lam == 0.0:
        return math.nan
    return float(alpha * E - math.copysign(2.0, lam) * (1.0 - abs(lam)))


def _classify(alpha, lam, E, le_value) -> RegimePoint:
    if lam == 0.0:
        return RegimePoint(PointClass.ZERO, le_value)
    t = edge_offset(alpha, lam, E)
    if abs(t) <= EDGE_TOL:
        return RegimePoint(PointClass.EDGE, 0.0)
    if (t > 0.0) == (lam > 0.0):
        return RegimePoint(PointClass.POSITIVE, le_value)
    return RegimePoint(PointClass.ZERO, le_value)


def classify_regime_point(alpha: float, lam: float, E: float) -> RegimePoint:
    _check_alpha(alpha)
    return _classify(alpha, lam, E, lyapunov_formula(alpha, lam, E))


def classify_model_point(model: PotentialModel, E: float) -> RegimePoint:
    """Classify ``E`` for any family through its canonical GPS coordinates."""
    cf = canonicalize(model)
    return _classify(cf.alpha_eff, cf.lambda_eff, E - cf.energy_shift, model_lyapunov_formula(model, E))


def model_edge_offset(model: PotentialModel, E: float) -> float:
    cf = canonicalize(model)
    return edge_offset(cf.alpha_eff, cf.lambda_eff, E - cf.energy_shift)


def mobility_edge_energy(alpha: float, lam: float) -> float:
    """``E* = 2 sgn(lam) (1 - |lam|) / alpha``."""
    if alpha == 0.0 or lam == 0.0:
        raise DegenerateEdge("no finite mobility edge for alpha = 0 or lam = 0")
    return math.copysign(2.0, lam) * (1.0 - abs(lam)) / alpha


def classify_parameter_regime(alpha: float, lam: float) -> ParameterRegime:
    _check_alpha(alpha)
    a, l = abs(alpha), abs(lam)
    if 1.0 - a < l < 1.0 + a:
        return ParameterRegime.COEXISTENCE
    if l > (1.0 + a) ** 2:
        return ParameterRegime.ALL_POSITIVE
    if l <= (1.0 - a) ** 2:
        return ParameterRegime.ALL_ZERO
    return ParameterRegime.INDETERMINATE


def localization_length(alpha: float, lam: float, E: float) -> float:
    point = classify_regime_point(alpha, lam, E)
    if point.classification is not PointClass.POSITIVE or not point.le_value > 0.0:
        raise NotLocalized(f"no positive Lyapunov exponent at alpha={alpha}, lam={lam}, E={E}")
    return 1.0 / point.le_value

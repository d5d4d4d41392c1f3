"""Potential families and their reduction to the rational cosine form.

Every family handled here can be written as

    v(theta) = (a0 + a1 * c) / (1 - alpha * c),    c = cos(2 pi theta)

which is what the transfer-matrix kernels consume (see :meth:`PotentialModel.coefficients`).
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np

from qps.errors import InvalidModel, SingularPhase

#: Half-width of the rejected band around the tan^2 pole at theta = 1/2.
SINGULAR_GUARD = 1e-12
#: Magnitude at which potential values are clamped.
CLAMP = 1e300


class Kind(str, enum.Enum):
    GPS = "gps"
    ALMOST_MATHIEU = "amo"
    SHIFTED_GPS = "shifted"
    TAN_SQUARED = "tan2"


@dataclass(frozen=True)
class PotentialModel:
    """Tagged parameter set for one of the supported potential families.

    ``alpha`` is the denominator parameter: it is forced to 0 for the almost
    Mathieu operator and to -1 for the tan^2 potential, where
    ``2 lam tan^2(pi theta) = 2 lam (1 - c) / (1 + c)``.
    """

    kind: Kind
    lam: float
    alpha: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        object.__setattr__(self, "lam", float(self.lam))
        object.__setattr__(self, "alpha", float(self.alpha))
        if not math.isfinite(self.lam):
            raise InvalidModel(f"coupling must be finite, got {self.lam}")
        if self.kind in (Kind.GPS, Kind.SHIFTED_GPS):
            if not abs(self.alpha) < 1.0:
                raise InvalidModel(f"|alpha| must be < 1 for {self.kind.value}, got {self.alpha}")
        elif self.kind is Kind.ALMOST_MATHIEU:
            if self.alpha != 0.0:
                raise InvalidModel("almost Mathieu model has alpha = 0")
        elif self.kind is Kind.TAN_SQUARED:
            object.__setattr__(self, "alpha", -1.0)

    @classmethod
    def gps(cls, lam, alpha):
        return cls(Kind.GPS, lam, alpha)

    @classmethod
    def almost_mathieu(cls, lam):
        return cls(Kind.ALMOST_MATHIEU, lam, 0.0)

    @classmethod
    def shifted(cls, lam, alpha):
        return cls(Kind.SHIFTED_GPS, lam, alpha)

    @classmethod
    def tan_squared(cls, lam):
        return cls(Kind.TAN_SQUARED, lam, -1.0)

    @classmethod
    def from_name(cls, name: str, lam: float, alpha: float = 0.0) -> "PotentialModel":
        kind = Kind(name)
        if kind is Kind.ALMOST_MATHIEU:
            return cls.almost_mathieu(lam)
        if kind is Kind.TAN_SQUARED:
            return cls.tan_squared(lam)
        return cls(kind, lam, alpha)

    @property
    def singular(self) -> bool:
        """True if the potential has a pole on the real circle."""
        return self.kind is Kind.TAN_SQUARED

    def coefficients(self) -> tuple[float, float, float]:
        """Return ``(a0, a1, alpha)`` of the rational cosine form."""
        lam = self.lam
        if self.kind in (Kind.GPS, Kind.ALMOST_MATHIEU):
            return 0.0, 2.0 * lam, self.alpha
        return 2.0 * lam, -2.0 * lam, self.alpha


@dataclass(frozen=True)
class CanonicalForm:
    """GPS-form coordinates ``v = energy_shift + 2 lambda_eff c / (1 - alpha_eff c)``."""

    lambda_eff: float
    alpha_eff: float
    energy_shift: float

    def potential(self, theta):
        # no |alpha| < 1 check: the tan^2 family lands on alpha_eff = -1
        c = np.cos(2.0 * np.pi * np.asarray(theta, dtype=float))
        return self.energy_shift + 2.0 * self.lambda_eff * c / (1.0 - self.alpha_eff * c)


def _distance_to_half(theta):
    x = np.mod(theta, 1.0)
    return np.abs(x - 0.5)


def eval_potential(model: PotentialModel, theta):
    """Evaluate ``v(theta)``; accepts scalars or arrays, period 1 in theta.

    Raises :class:`SingularPhase` for the tan^2 family within
    :data:`SINGULAR_GUARD` of theta = 1/2 (mod 1).
    """
    th = np.asarray(theta, dtype=float)
    lam = model.lam
    if model.kind is Kind.TAN_SQUARED:
        if np.any(_distance_to_half(th) < SINGULAR_GUARD):
            raise SingularPhase("tan^2 potential evaluated inside the guard band around 1/2")
        v = 2.0 * lam * np.tan(np.pi * np.mod(th, 1.0)) ** 2
    else:
        c = np.cos(2.0 * np.pi * th)
        a0, a1, alpha = model.coefficients()
        v = (a0 + a1 * c) / (1.0 - alpha * c)
    clamped = np.abs(v) > CLAMP
    if np.any(clamped):
        warnings.warn(f"{int(np.count_nonzero(clamped))} potential value(s) clamped to +-{CLAMP:g}",
                      RuntimeWarning, stacklevel=2)
        v = np.clip(v, -CLAMP, CLAMP)
    if np.ndim(v) == 0:
        return float(v)
    return v


def potential_bounds(model: PotentialModel) -> tuple[float, float]:
    """Exact infimum and supremum of v over the circle.

    The rational form is monotone in ``c``, so the extrema sit at ``c = -1`` and
    ``c = 1``. The tan^2 potential is unbounded on the side of sgn(lam).
    """
    lam = model.lam
    if lam == 0.0:
        return 0.0, 0.0
    if model.kind is Kind.TAN_SQUARED:
        return (0.0, math.inf) if lam > 0 else (-math.inf, 0.0)
    a0, a1, alpha = model.coefficients()
    at_minus = (a0 - a1) / (1.0 + alpha)
    at_plus = (a0 + a1) / (1.0 - alpha)
    return min(at_minus, at_plus), max(at_minus, at_plus)


def canonicalize(model: PotentialModel) -> CanonicalForm:
    """Rewrite the model as a shifted GPS potential.

    ``2 lam (1-c)/(1-alpha c) = 2 lam + 2 lam (alpha-1) c/(1-alpha c)`` covers the
    shifted family, and the tan^2 potential is its ``alpha = -1`` member.
    """
    lam = model.lam
    if model.kind in (Kind.GPS, Kind.ALMOST_MATHIEU):
        return CanonicalForm(lam, model.alpha, 0.0)
    if model.kind is Kind.SHIFTED_GPS:
        return CanonicalForm(lam * (model.alpha - 1.0), model.alpha, 2.0 * lam)
    return CanonicalForm(-2.0 * lam, -1.0, 2.0 * lam)

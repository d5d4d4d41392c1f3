"""Transfer-matrix cocycle, numerical Lyapunov exponents and finite-volume Green functions."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from qps import _kernels
from qps.errors import InvalidParameter, ResolventSingular, SingularPhase, StripViolation
from qps.potentials import SINGULAR_GUARD, Kind, PotentialModel, eval_potential
from qps.spectrum import QuasiPeriodicSetup

#: Maximum tolerated fraction of orbit sites skipped by the pole guard.
MAX_SKIP_RATE = 1e-6
#: Relative determinant size below which a finite-volume resolvent is singular.
RESOLVENT_RTOL = 1e-12


@dataclass(frozen=True)
class TransferMatrix:
    entries: np.ndarray  # 2x2 complex

    @property
    def det(self) -> complex:
        a = self.entries
        return complex(a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0])


@dataclass(frozen=True)
class LyapunovEstimate:
    """``value == log_norm_sum / steps``; ``tail_variation`` is the spread of the
    running estimate over the last 10% of the orbit."""

    value: float
    steps: int
    log_norm_sum: float
    tail_variation: float
    skipped: int = 0


@dataclass(frozen=True)
class ComplexifiedPhase:
    epsilon: float = 0.0

    def check(self, model: PotentialModel) -> float:
        eps = float(self.epsilon)
        if eps != 0.0 and abs(eps) >= strip_halfwidth(model):
            raise StripViolation(
                f"|eps|={abs(eps)} outside the analyticity strip {strip_halfwidth(model)} for alpha={model.alpha}")
        return eps


def strip_halfwidth(model: PotentialModel) -> float:
    """``(1/2pi) log|(1 + sqrt(1-alpha^2)) / alpha|``; infinite for alpha = 0."""
    a = model.alpha
    if a == 0.0:
        return math.inf
    return math.log(abs((1.0 + math.sqrt(max(0.0, 1.0 - a * a))) / a)) / (2.0 * math.pi)


def _eps(model, eps) -> float:
    if not isinstance(eps, ComplexifiedPhase):
        eps = ComplexifiedPhase(float(eps))
    return eps.check(model)


def complex_potential(model: PotentialModel, theta: float, eps: float = 0.0) -> complex:
    """v at the complex phase ``theta + i eps``."""
    if eps == 0.0:
        return complex(eval_potential(model, theta))
    c = cmath.cos(2.0 * math.pi * complex(theta, eps))
    a0, a1, alpha = model.coefficients()
    den = 1.0 - alpha * c
    if abs(den) < 1e-300:
        raise SingularPhase("vanishing denominator at complex phase")
    return (a0 + a1 * c) / den


def transfer_matrix(model: PotentialModel, theta: float, E: complex, eps=0.0) -> TransferMatrix:
    """One-step matrix ``((E - v, -1), (1, 0))`` at phase ``theta + i eps``."""
    e = _eps(model, eps)
    v = complex_potential(model, theta, e)
    a = np.array([[E - v, -1.0], [1.0, 0.0]], dtype=complex)
    if e == 0.0 and complex(E).imag == 0.0:
        a = a.real.astype(complex)
    return TransferMatrix(a)


def transfer_product(model: PotentialModel, setup: QuasiPeriodicSetup, E: complex, n: int,
                     eps=0.0) -> np.ndarray:
    """Plain (unnormalised) ``A_n = A(theta + (n-1) b) ... A(theta)``."""
    out = np.eye(2, dtype=complex)
    for k in range(n):
        out = transfer_matrix(model, setup.phase_theta + k * setup.frequency_b, E, eps).entries @ out
    return out


def _run_orbit(model, theta, b, E, eps, n_steps, renorm_every):
    a0, a1, alpha = model.coefficients()
    use_tan = model.kind is Kind.TAN_SQUARED
    if use_tan:
        a0 = 2.0 * model.lam
    log_sum, used, skipped, tmin, tmax = _kernels.cocycle_orbit(
        float(theta), float(b), float(E), float(eps), a0, a1, alpha, use_tan,
        int(n_steps), int(renorm_every), SINGULAR_GUARD)
    if skipped > MAX_SKIP_RATE * n_steps:
        raise SingularPhase(f"{skipped} of {n_steps} orbit sites fell inside the pole guard")
    value = log_sum / used
    return LyapunovEstimate(value, used, log_sum, max(abs(tmax - value), abs(value - tmin)), skipped)


def lyapunov_numeric(model: PotentialModel, setup: QuasiPeriodicSetup, E: float, eps=0.0,
                     n_steps: int = 100_000, renorm_every: int = 1) -> LyapunovEstimate:
    """Birkhoff average of ``log ||A_n||`` (Frobenius) along the orbit of ``setup.phase_theta``."""
    if n_steps < 1000 or renorm_every < 1:
        raise InvalidParameter("need n_steps >= 1000 and renorm_every >= 1")
    e = _eps(model, eps)
    return _run_orbit(model, setup.phase_theta, setup.frequency_b, E, e, n_steps, renorm_every)


def lyapunov_phase_averaged(model: PotentialModel, b: float, E: float, eps=0.0,
                            n_steps: int = 100_000, n_phases: int = 8, theta0: float = 0.0,
                            renorm_every: int = 1) -> LyapunovEstimate:
    """Average of single-orbit estimates over phases ``theta0 + j / n_phases``."""
    if n_phases < 1:
        raise InvalidParameter("n_phases must be >= 1")
    setup = QuasiPeriodicSetup(b, theta0)
    runs = [lyapunov_numeric(model, setup.with_phase(theta0 + j / n_phases), E, eps, n_steps, renorm_every)
            for j in range(n_phases)]
    if n_phases == 1:
        return runs[0]
    steps = min(r.steps for r in runs)
    log_sum = sum(r.value for r in runs) / n_phases * steps
    return LyapunovEstimate(log_sum / steps, steps, log_sum,
                            max(r.tail_variation for r in runs), sum(r.skipped for r in runs))


def acceleration(model: PotentialModel, setup: QuasiPeriodicSetup, E: float, eps_center: float = 0.0,
                 h: float = 0.01, n_steps: int = 100_000, n_phases: int = 4) -> float:
    """One-sided finite difference ``(L(eps+h) - L(eps)) / (2 pi h)``.

    Both offsets share the same phases, so orbit fluctuations largely cancel.
    """
    if h <= 0.0 or eps_center < 0.0:
        raise InvalidParameter("need h > 0 and eps_center >= 0")
    _eps(model, eps_center + h)
    b, th = setup.frequency_b, setup.phase_theta
    lo = lyapunov_phase_averaged(model, b, E, eps_center, n_steps, n_phases, th)
    hi = lyapunov_phase_averaged(model, b, E, eps_center + h, n_steps, n_phases, th)
    return (hi.value - lo.value) / (2.0 * math.pi * h)


def determinant_sequence(model: PotentialModel, setup: QuasiPeriodicSetup, E: float, k_max: int) -> np.ndarray:
    """``p_k = det(E - H|[0, k-1])`` for ``k = 0..k_max`` by the three-term recursion.

    Entries overflow to inf for large ``k`` when the Lyapunov exponent is positive.
    """
    if k_max < 0:
        raise InvalidParameter("k_max must be >= 0")
    p = np.empty(k_max + 1)
    p[0] = 1.0
    if k_max == 0:
        return p
    v = np.atleast_1d(eval_potential(model, np.arange(k_max) * setup.frequency_b + setup.phase_theta))
    prev, cur = 0.0, 1.0
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(1, k_max + 1):
            prev, cur = cur, (E - v[k - 1]) * cur - prev
            p[k] = cur
    return p


def green_function(model: PotentialModel, setup: QuasiPeriodicSetup, E: float, n1: int, n2: int,
                   n: int) -> tuple[float, float]:
    """``(G(n1, n), G(n, n2))`` of ``(H|[n1,n2] - E)^-1`` from determinant ratios.

    With unit hopping, Cramer's rule gives
    ``G(n1, n) = -p_{n2-n}(theta + (n+1) b) / p_k(theta + n1 b)`` and
    ``G(n, n2) = -p_{n-n1}(theta + n1 b) / p_k(theta + n1 b)``, ``k = n2 - n1 + 1``.
    """
    if not n1 <= n <= n2:
        raise InvalidParameter(f"n={n} outside [{n1}, {n2}]")
    k = n2 - n1 + 1
    b, th = setup.frequency_b, setup.phase_theta
    full = determinant_sequence(model, setup.with_phase(th + n1 * b), E, k)
    right = determinant_sequence(model, setup.with_phase(th + (n + 1) * b), E, n2 - n)
    det = full[k]
    scale = max(1.0, float(np.max(np.abs(full))))
    if not abs(det) > RESOLVENT_RTOL * scale:
        raise ResolventSingular(f"E={E} is (numerically) an eigenvalue of H|[{n1},{n2}]")
    return -right[n2 - n] / det, -full[n - n1] / det


def is_regular_point(model: PotentialModel, setup: QuasiPeriodicSetup, E: float, n: int, k: int,
                     gamma: float) -> bool:
    """True if some length-``k`` window ``[n1, n1+k-1]`` around ``n`` keeps both
    endpoints more than ``k/5`` away and has ``|G(n, n_i)| < exp(-gamma |n - n_i|)``
    at both of them."""
    if k < 5 or not gamma > 0.0:
        raise InvalidParameter("need k >= 5 and gamma > 0")
    for n1 in range(n - k + 1, n + 1):
        n2 = n1 + k - 1
        d1, d2 = n - n1, n2 - n
        if not (d1 > k / 5 and d2 > k / 5):
            continue
        try:
            g1, g2 = green_function(model, setup, E, n1, n2, n)
        except ResolventSingular:
            continue
        if abs(g1) < math.exp(-gamma * d1) and abs(g2) < math.exp(-gamma * d2):
            return True
    return False

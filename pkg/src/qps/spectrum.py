"""Finite truncations of the quasi-periodic operator and their spectra."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from qps import _kernels
from qps.errors import ConvergenceFailure, InvalidParameter, Unbounded
from qps.potentials import Kind, PotentialModel, eval_potential, potential_bounds

GOLDEN_MEAN = (math.sqrt(5.0) - 1.0) / 2.0
SILVER_MEAN = math.sqrt(2.0) - 1.0

PRESETS = {"golden": GOLDEN_MEAN, "silver": SILVER_MEAN}

#: Relative eigenvalue gap below which eigenvectors are reorthogonalised.
CLUSTER_RTOL = 1e-3
MAX_INVERSE_ITER = 8


@dataclass(frozen=True)
class QuasiPeriodicSetup:
    """Frequency and phase of the orbit ``n b + theta``.

    Floating-point frequencies are rational; the presets are the closest doubles
    to the golden and silver means.
    """

    frequency_b: float = GOLDEN_MEAN
    phase_theta: float = 0.0
    frequency_preset: str = "custom"

    def __post_init__(self):
        if not 0.0 < self.frequency_b < 1.0:
            raise InvalidParameter(f"frequency must lie in (0, 1), got {self.frequency_b}")

    @classmethod
    def from_preset(cls, name: str, theta: float = 0.0) -> "QuasiPeriodicSetup":
        try:
            b = PRESETS[name]
        except KeyError:
            raise InvalidParameter(f"unknown frequency preset {name!r}") from None
        return cls(b, theta, name)

    @classmethod
    def parse(cls, freq: str | float, theta: float = 0.0) -> "QuasiPeriodicSetup":
        """Accept a preset name or a numeric frequency."""
        if isinstance(freq, str) and freq in PRESETS:
            return cls.from_preset(freq, theta)
        try:
            b = float(freq)
        except ValueError:
            raise InvalidParameter(f"frequency must be golden, silver or a number, got {freq!r}") from None
        return cls(b, theta, "custom")

    def with_phase(self, theta: float) -> "QuasiPeriodicSetup":
        return QuasiPeriodicSetup(self.frequency_b, theta, self.frequency_preset)


@dataclass(frozen=True)
class TridiagonalOperator:
    """Restriction of H to ``[n1, n2]`` with Dirichlet ends; off-diagonals are 1."""

    diagonal: np.ndarray
    n1: int = 0
    n2: Optional[int] = None

    def __post_init__(self):
        d = np.ascontiguousarray(self.diagonal, dtype=float)
        if d.ndim != 1 or d.size < 1:
            raise InvalidParameter("diagonal must be a non-empty 1-d array")
        object.__setattr__(self, "diagonal", d)
        n2 = self.n1 + d.size - 1 if self.n2 is None else self.n2
        if n2 - self.n1 + 1 != d.size:
            raise InvalidParameter("diagonal length does not match [n1, n2]")
        object.__setattr__(self, "n2", n2)

    @property
    def size(self) -> int:
        return self.diagonal.size

    @property
    def off_diagonal(self) -> np.ndarray:
        return np.ones(max(self.size - 1, 1))

    @property
    def norm_bound(self) -> float:
        """Gershgorin bound on the spectral norm."""
        return float(np.max(np.abs(self.diagonal))) + (2.0 if self.size > 2 else self.size - 1.0)

    def to_dense(self) -> np.ndarray:
        n = self.size
        h = np.diag(self.diagonal)
        idx = np.arange(n - 1)
        h[idx, idx + 1] = 1.0
        h[idx + 1, idx] = 1.0
        return h

    def leading(self, m: int) -> "TridiagonalOperator":
        """Leading principal ``m x m`` block."""
        return TridiagonalOperator(self.diagonal[:m], self.n1)


@dataclass
class SpectralData:
    eigenvalues: np.ndarray
    eigenvectors: Optional[np.ndarray] = None  # row k pairs with eigenvalues[k]
    truncation_size: int = 0
    indices: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=int))

    def residuals(self, op: TridiagonalOperator) -> np.ndarray:
        h = op.to_dense()
        return np.linalg.norm(self.eigenvectors @ h - self.eigenvalues[:, None] * self.eigenvectors, axis=1)


def build_truncation(model: PotentialModel, setup: QuasiPeriodicSetup, n1: int, n2: int) -> TridiagonalOperator:
    if n2 < n1:
        raise InvalidParameter(f"need n1 <= n2, got [{n1}, {n2}]")
    n = np.arange(n1, n2 + 1)
    diag = eval_potential(model, n * setup.frequency_b + setup.phase_theta)
    return TridiagonalOperator(np.atleast_1d(diag), n1, n2)


def eigenvalues(op: TridiagonalOperator) -> np.ndarray:
    """All eigenvalues, ascending, via Sturm-sequence bisection."""
    return _kernels.bisect_eigenvalues(op.diagonal, op.off_diagonal, 0, op.size)


def count_below(op: TridiagonalOperator, x: float) -> int:
    return int(_kernels.sturm_count(op.diagonal, op.off_diagonal, float(x)))


def eigenpairs(op: TridiagonalOperator, indices: Sequence[int] | None = None,
               interval: tuple[float, float] | None = None) -> SpectralData:
    """Eigenvalues by bisection and eigenvectors by inverse iteration.

    Select by ascending ``indices`` or by a half-open energy ``interval``
    ``[lo, hi)``; default is the whole spectrum.
    """
    n = op.size
    if indices is not None and interval is not None:
        raise InvalidParameter("give indices or interval, not both")
    if interval is not None:
        lo, hi = interval
        idx = np.arange(count_below(op, lo), count_below(op, hi))
    elif indices is not None:
        idx = np.unique(np.asarray(indices, dtype=int))
        if idx.size and (idx[0] < 0 or idx[-1] >= n):
            raise InvalidParameter(f"eigenvalue indices must lie in [0, {n})")
    else:
        idx = np.arange(n)
    if idx.size == 0:
        return SpectralData(np.empty(0), np.empty((0, n)), n, idx)
    off = op.off_diagonal
    if idx.size == idx[-1] - idx[0] + 1:
        evals = _kernels.bisect_eigenvalues(op.diagonal, off, int(idx[0]), int(idx[-1]) + 1)
    else:
        evals = np.concatenate([_kernels.bisect_eigenvalues(op.diagonal, off, int(k), int(k) + 1)
                                for k in idx])
    vecs, failed = _kernels.inverse_iteration(op.diagonal, off, evals, CLUSTER_RTOL, MAX_INVERSE_ITER)
    if failed >= 0:
        raise ConvergenceFailure(
            f"inverse iteration did not converge for eigenvalue #{idx[failed]} ({evals[failed]!r})")
    return SpectralData(evals, vecs, n, idx)


def spectrum_bounds(model: PotentialModel) -> tuple[float, float]:
    """Interval ``[-2 + min v, 2 + max v]`` containing the spectrum."""
    if model.kind is Kind.TAN_SQUARED and model.lam != 0.0:
        raise Unbounded("tan^2 potential is unbounded; no finite spectrum bound")
    vmin, vmax = potential_bounds(model)
    return -2.0 + vmin, 2.0 + vmax


def approximate_spectrum(model: PotentialModel, setup: QuasiPeriodicSetup, N: int,
                         phase_count: int = 8, drop_boundary_states: bool = False) -> np.ndarray:
    """Pooled, sorted eigenvalues of ``[0, N-1]`` truncations over phases
    ``theta + j / phase_count``.

    With ``drop_boundary_states`` eigenvectors are computed as well and states
    rejected by :func:`bulk_mask` are left out; these sit in gaps of the
    infinite-volume spectrum.
    """
    if N < 2 or phase_count < 1:
        raise InvalidParameter("need N >= 2 and phase_count >= 1")
    pooled = []
    for j in range(phase_count):
        op = build_truncation(model, setup.with_phase(setup.phase_theta + j / phase_count), 0, N - 1)
        if drop_boundary_states:
            sd = eigenpairs(op)
            pooled.append(sd.eigenvalues[bulk_mask(sd.eigenvectors)])
        else:
            pooled.append(eigenvalues(op))
    return np.sort(np.concatenate(pooled))


def bulk_mask(vectors: np.ndarray, edge_fraction: float = 0.05, max_weight: float = 0.5) -> np.ndarray:
    """Flag eigenvectors that are not boundary states.

    A vector is a boundary state when more than ``max_weight`` of its norm sits
    in the outer ``edge_fraction`` of sites at either end. Dirichlet ends create
    such states inside spectral gaps of the infinite operator.
    """
    vectors = np.atleast_2d(vectors)
    n = vectors.shape[1]
    w = max(1, int(round(edge_fraction * n)))
    p = vectors ** 2
    left = p[:, :w].sum(axis=1)
    right = p[:, n - w:].sum(axis=1)
    return (left <= max_weight) & (right <= max_weight)

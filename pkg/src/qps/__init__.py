"""Quasi-periodic Schrödinger operators with generalized (GPS) potentials.

Potentials, truncation spectra, transfer-matrix cocycles, closed-form
Lyapunov exponents, eigenstate localization diagnostics and parameter sweeps.
"""
__version__ = "0.1.0"

from qps.analytic import (
    ParameterRegime,
    PointClass,
    RegimePoint,
    classify_model_point,
    classify_parameter_regime,
    classify_regime_point,
    herman_lower_bound,
    localization_length,
    lyapunov_formula,
    lyapunov_formula_shifted,
    mobility_edge_energy,
)
from qps.cocycle import (
    ComplexifiedPhase,
    LyapunovEstimate,
    acceleration,
    green_function,
    is_regular_point,
    lyapunov_numeric,
    lyapunov_phase_averaged,
    transfer_matrix,
)
from qps.errors import QPSError
from qps.localization import StateClass, Thresholds, classify_state, decay_rate_fit, edge_agreement, ipr
from qps.potentials import CanonicalForm, Kind, PotentialModel, canonicalize, eval_potential
from qps.spectrum import (
    QuasiPeriodicSetup,
    SpectralData,
    TridiagonalOperator,
    approximate_spectrum,
    build_truncation,
    eigenpairs,
    eigenvalues,
    spectrum_bounds,
)

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qps.errors import FitFailure, InvalidParameter, NoResolvedStates, NotNormalized
from qps.localization import StateClass, Thresholds, classify_state, decay_rate_fit, edge_agreement, ipr, state_table
from qps.potentials import PotentialModel
from qps.spectrum import QuasiPeriodicSetup, SpectralData, build_truncation, eigenpairs


def exp_state(N, rate, center=None):
    n = np.arange(N)
    c = N // 2 if center is None else center
    u = np.exp(-rate * np.abs(n - c))
    return u / np.linalg.norm(u)


def test_ipr_extremes():
    assert ipr(np.eye(1, 50, 7)[0]) == 1.0
    assert ipr(np.full(400, 0.05)) == pytest.approx(1 / 400)
    with pytest.raises(NotNormalized):
        ipr(np.ones(3))


@given(st.integers(50, 3000), st.floats(0.05, 2.0))
def test_ipr_between_inverse_size_and_one(N, rate):
    p = ipr(exp_state(N, rate))
    assert 1 / N - 1e-12 <= p <= 1 + 1e-12


def test_ipr_exponential_closed_form():
    # infinite-lattice value tanh(rate) coth(2 rate) ... written as coth(2k) / coth(k)^2
    k = 0.3
    assert ipr(exp_state(2001, k)) == pytest.approx((1 / math.tanh(2 * k)) / (1 / math.tanh(k)) ** 2, rel=1e-10)


@given(st.floats(0.02, 1.5), st.integers(100, 800), st.floats(0.2, 0.8))
def test_decay_fit_recovers_rate(rate, N, frac):
    u = exp_state(N, rate, int(frac * N))
    got, r2 = decay_rate_fit(u)
    assert got == pytest.approx(rate, rel=1e-6)
    assert r2 == pytest.approx(1.0, abs=1e-9)


def test_decay_fit_guards():
    with pytest.raises(InvalidParameter):
        decay_rate_fit(exp_state(30, 0.5))
    with pytest.raises(InvalidParameter):
        decay_rate_fit(exp_state(100, 0.5), center_policy="mean")
    # amplitudes fall below the floor after a handful of sites
    with pytest.raises(FitFailure):
        decay_rate_fit(exp_state(200, 8.0))


def test_classification_examples():
    assert classify_state(0.0, exp_state(1000, 0.5)).classification is StateClass.LOCALIZED
    plane = np.sin(np.pi * np.arange(1, 1001) / 1001)
    d = classify_state(0.0, plane / np.linalg.norm(plane))
    assert d.classification is StateClass.EXTENDED
    # between the two cut-offs: ipr ~ 0.045 with 10 / 1000**0.8 ~ 0.040 and c_loc = 0.05
    mid = classify_state(0.0, exp_state(1000, 0.09))
    assert mid.classification is StateClass.UNRESOLVED
    assert mid.decay_rate == pytest.approx(0.09, rel=1e-6)


def test_slow_exponential_is_extended_at_default_cutoffs():
    # ipr ~ 0.005, far below 10 / N**0.8
    assert classify_state(0.0, exp_state(1000, 0.01)).classification is StateClass.EXTENDED


def test_thresholds_are_configurable():
    u = exp_state(1000, 0.09)
    assert classify_state(0.0, u, Thresholds(c_loc=0.04)).classification is StateClass.LOCALIZED
    assert classify_state(0.0, u, Thresholds(c_ext=20.0)).classification is StateClass.EXTENDED


def test_state_table_and_agreement_almost_mathieu():
    m = PotentialModel.almost_mathieu(3.0)
    sd = eigenpairs(build_truncation(m, QuasiPeriodicSetup(), 0, 299), indices=range(100, 200))
    rows = state_table(sd, m)
    assert len(rows) == 100 and all(r["regime"] == "PositiveLE" for r in rows)
    assert edge_agreement(sd, m) == 1.0


def test_agreement_free_operator_is_extended():
    m = PotentialModel.gps(0.0, 0.5)
    sd = eigenpairs(build_truncation(m, QuasiPeriodicSetup(), 0, 499))
    assert edge_agreement(sd, m) == 1.0


def test_agreement_needs_resolved_states():
    m = PotentialModel.gps(1.0, 0.5)
    with pytest.raises(InvalidParameter):
        edge_agreement(SpectralData(np.zeros(1)), m)
    mid = exp_state(1000, 0.09)
    with pytest.raises(NoResolvedStates):
        edge_agreement(SpectralData(np.array([3.0]), mid[None, :], 1000), m)

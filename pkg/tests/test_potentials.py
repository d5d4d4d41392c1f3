import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qps.errors import InvalidModel, SingularPhase
from qps.potentials import Kind, PotentialModel, canonicalize, eval_potential, potential_bounds

alphas = st.floats(-0.99, 0.99)
lams = st.floats(-5, 5)
thetas = st.floats(0, 1, exclude_max=True)


def test_gps_values_at_extremes():
    m = PotentialModel.gps(1.5, 0.4)
    assert eval_potential(m, 0.0) == pytest.approx(3.0 / 0.6, rel=1e-15)
    assert eval_potential(m, 0.5) == pytest.approx(-3.0 / 1.4, rel=1e-15)
    assert eval_potential(m, 0.25) == pytest.approx(0.0, abs=1e-15)


def test_amo_is_cosine():
    m = PotentialModel.almost_mathieu(2.0)
    th = np.linspace(0, 1, 17)
    np.testing.assert_allclose(eval_potential(m, th), 4.0 * np.cos(2 * np.pi * th), atol=1e-14)


def test_tan_squared_matches_tangent():
    m = PotentialModel.tan_squared(0.5)
    th = np.array([0.0, 0.1, 0.3, 0.45, 0.7])
    np.testing.assert_allclose(eval_potential(m, th), np.tan(np.pi * th) ** 2, rtol=1e-12)
    assert m.alpha == -1.0 and m.singular


def test_tan_squared_pole_raises():
    with pytest.raises(SingularPhase):
        eval_potential(PotentialModel.tan_squared(0.5), 0.5)


def test_near_pole_values_clamped_with_warning():
    m = PotentialModel.tan_squared(1e290)
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        v = eval_potential(m, 0.5 - 1e-9)
    assert v == 1e300 and any(issubclass(x.category, RuntimeWarning) for x in w)


@pytest.mark.parametrize("kind,alpha", [("gps", 1.0), ("gps", -1.2), ("shifted", 1.0), ("amo", 0.3)])
def test_invalid_alpha(kind, alpha):
    with pytest.raises(InvalidModel):
        PotentialModel(Kind(kind), 1.0, alpha)


def test_non_finite_coupling():
    with pytest.raises(InvalidModel):
        PotentialModel.gps(math.inf, 0.1)


def test_from_name_kinds():
    assert PotentialModel.from_name("amo", 2.0, 0.7).alpha == 0.0
    assert PotentialModel.from_name("tan2", 1.0).kind is Kind.TAN_SQUARED


def test_tan_squared_bounds_and_zero_coupling():
    assert potential_bounds(PotentialModel.tan_squared(0.5)) == (0.0, math.inf)
    assert potential_bounds(PotentialModel.tan_squared(-0.5)) == (-math.inf, 0.0)
    assert potential_bounds(PotentialModel.gps(0.0, 0.5)) == (0.0, 0.0)


@given(st.sampled_from(["gps", "amo", "shifted"]), lams, alphas, thetas)
def test_canonical_form_reproduces_potential(kind, lam, alpha, theta):
    m = PotentialModel.from_name(kind, lam, alpha)
    assert canonicalize(m).potential(theta) == pytest.approx(eval_potential(m, theta), rel=1e-9, abs=1e-9)


@given(lams, thetas.filter(lambda t: abs(t - 0.5) > 1e-3))
def test_canonical_form_tan_squared(lam, theta):
    m = PotentialModel.tan_squared(lam)
    cf = canonicalize(m)
    assert (cf.lambda_eff, cf.alpha_eff, cf.energy_shift) == (-2 * lam, -1.0, 2 * lam)
    assert cf.potential(theta) == pytest.approx(eval_potential(m, theta), rel=1e-8, abs=1e-8)


@given(st.sampled_from(["gps", "amo", "shifted"]), lams, alphas, st.lists(thetas, min_size=1, max_size=20))
def test_values_within_bounds(kind, lam, alpha, ths):
    m = PotentialModel.from_name(kind, lam, alpha)
    lo, hi = potential_bounds(m)
    v = np.atleast_1d(eval_potential(m, np.array(ths)))
    tol = 1e-12 * max(1.0, abs(lo), abs(hi))
    assert np.all(v >= lo - tol) and np.all(v <= hi + tol)


@given(lams, alphas, thetas)
def test_one_periodic(lam, alpha, theta):
    m = PotentialModel.gps(lam, alpha)
    assert eval_potential(m, theta + 1.0) == pytest.approx(eval_potential(m, theta), rel=1e-9, abs=1e-9)

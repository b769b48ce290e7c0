import math

import pytest
from hypothesis import given, settings, strategies as st

from hypcover import hypgeo as hg

angles = st.floats(0, 2 * math.pi, allow_nan=False)
lengths = st.floats(0, 3, allow_nan=False)
inner = st.complex_numbers(max_magnitude=0.9)


def _map(t1, r1, t2):
    return hg.compose(hg.translation(t1, r1), hg.rotation(t2))


@settings(max_examples=200, deadline=None)
@given(angles, lengths, angles, angles, lengths, angles, angles)
def test_derivative_cocycle(a, b, c, d, e, f, t):
    m1, m2 = _map(a, b, c), _map(d, e, f)
    lhs = hg.boundary_derivative(hg.compose(m1, m2), t)
    rhs = hg.boundary_derivative(m1, hg.apply_boundary(m2, t)) * hg.boundary_derivative(m2, t)
    assert math.isclose(lhs, rhs, rel_tol=1e-9)


@settings(max_examples=200, deadline=None)
@given(angles, lengths, angles, inner, inner)
def test_distance_invariance(a, b, c, z, w):
    m = _map(a, b, c)
    d0 = hg.hyp_dist(z, w)
    assert abs(hg.hyp_dist(m(z), m(w)) - d0) <= 1e-9 * max(1.0, d0)


@settings(max_examples=100, deadline=None)
@given(angles, lengths, angles, angles)
def test_boundary_derivative_matches_finite_difference(a, b, c, t):
    m = _map(a, b, c)
    h = 1e-6
    num = abs(hg.ang_diff(hg.apply_boundary(m, t + h), hg.apply_boundary(m, t - h))) / (2 * h)
    assert math.isclose(num, hg.boundary_derivative(m, t), rel_tol=1e-5)


def test_inverse_and_identity():
    m = _map(0.3, 1.2, 2.0)
    assert hg.same_element(hg.compose(m, m.inverse()), hg.IDENTITY)
    assert abs(m.det() - 1) < 1e-12


def test_dist0_matches_hyp_dist():
    m = _map(1.1, 0.7, 0.2)
    assert math.isclose(hg.dist0(m), hg.hyp_dist(0j, m(0j)), rel_tol=1e-12)
    assert hg.dist0(hg.translation(0.4, 2.5)) == pytest.approx(2.5, rel=1e-12)


def test_ang_diff_wraps():
    assert abs(hg.ang_diff(0.1, 2 * math.pi - 0.1)) == pytest.approx(0.2, abs=1e-12)


def test_geodesic_needs_distinct_endpoints():
    with pytest.raises(hg.DegenerateGeodesic):
        hg.geodesic_arc(1.0, 1.0)


@pytest.mark.parametrize("t", [0.01, 1.0, 20.0, 45.0, 90.0])
def test_dist0_far_from_origin(t):
    assert hg.dist0(hg.translation(1.3, t)) == pytest.approx(t, rel=1e-12)

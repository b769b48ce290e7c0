import math

import pytest

from hypcover import experiments as E
from hypcover import fuchsian as Fu


def test_relator_is_plus_minus_identity(pairing):
    rel = Fu.relator_map(pairing)
    err = min(max(abs(rel.alpha - s), abs(rel.beta)) for s in (1, -1))
    assert err < 1e-8


def test_vertex_radius_matches_independent_root_solve(octagon):
    from scipy.optimize import brentq
    r = brentq(lambda x: E.euclidean_corner_angle(x) - math.pi / 4, 0.5, 0.99, xtol=1e-14)
    assert abs(octagon[0].radius - r) < 1e-4
    # frozen value of the root
    assert r == pytest.approx(0.8408964152537146, abs=1e-12)


def test_interior_angles(octagon):
    poly = octagon[0]
    for j in range(Fu.NSIDES):
        assert Fu.interior_angle(poly, j) == pytest.approx(math.pi / 4, abs=1e-9)


def test_side_pairing_lands_across_its_side(octagon):
    poly, pairing = octagon[:2]
    for s in range(Fu.NSIDES):
        assert list(poly.violations(pairing.maps[s](0j))) == [s]


def test_sphere_counts(pairing):
    els = Fu.enumerate_elements(pairing, 3)
    assert Fu.counts_by_length(els) == [1, 8, 56, 392]


def test_enumeration_cap(pairing):
    with pytest.raises(ValueError):
        Fu.enumerate_elements(pairing, Fu.DEFAULT_CAP + 1)


def test_poincare_rejects_nonpositive_delta(pairing):
    with pytest.raises(ValueError):
        Fu.poincare_partial(pairing, 0.0, 2)


def test_locate_copy_returns_point_in_F0(octagon, rng):
    poly, pairing = octagon[:2]
    for _ in range(20):
        z = complex(*rng.uniform(-0.6, 0.6, 2))
        gw = Fu.locate_copy(poly, pairing, z)
        assert poly.contains(gw.moebius.inverse()(z), 1e-9)
        assert Fu.reduce_sides(gw.sides) == gw.sides or len(Fu.reduce_sides(gw.sides)) < len(gw.sides)

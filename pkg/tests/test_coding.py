import math

import numpy as np
import pytest

from hypcover import coding as C
from hypcover import hypgeo as hg


def test_state_count_and_classes(table):
    assert table.n == 48
    assert np.bincount(table.gen, minlength=8).tolist() == [6] * 8


def test_endpoints_are_tessellation_geodesic_endpoints(octagon, table):
    pts = C.side_geodesic_endpoints() + list(C.tessellation_vertex_geodesic_endpoints(octagon[0]))
    for t in table.endpoints:
        assert min(abs(hg.ang_diff(t, p)) for p in pts) < 1e-9
    assert len(set(np.round(table.endpoints, 9))) == 48


def test_structural_checks(table):
    rep = C.structural_checks(table)
    assert rep["partition"] and rep["res"] and rep["mar"] and rep["tr"]


def test_bar_involution_does_not_exist(table):
    # out-degrees are lopsided while in-degrees are not, so no reversal exists
    assert table.bar is None
    assert C.find_bar(table.endpoints, table.gen, table.A) is None
    assert C.structural_checks(table)["bar"] is False


def test_semiconjugacy(table, rng):
    assert C.semiconjugacy_error(table, rng, n_words=200, depth=20) < 1e-6


def test_bs_map_acts_by_inverse_generator(table, rng):
    for t in rng.uniform(0, 2 * math.pi, 50):
        a, u = C.bs_map(table, t)
        assert u == pytest.approx(hg.apply_boundary(table.e(a).inverse(), t), abs=1e-12)


def test_expansion_precision_paths_agree(table):
    t = 1.2345
    dbl = C.boundary_expansion(table, t, 20)
    mp = C.boundary_expansion(table, t, 20, dps=C.expansion_dps(table, 20))
    assert dbl == mp


def test_expansion_word_is_admissible(table):
    w = C.boundary_expansion(table, 0.777, 60, dps=C.expansion_dps(table, 60))
    assert table.admissible(w)


def test_json_round_trip(table):
    back = C.CodingTable.from_json(table.to_json())
    assert np.array_equal(back.A, table.A)
    assert np.allclose(back.endpoints, table.endpoints)
    assert back.to_json() == table.to_json()


def test_variation_rate_below_one(table, rng):
    ms, var = C.variation_estimates(table, rng, samples=80)
    assert C.fit_rate(ms, var) < 1


def test_distortion_band_stable_under_length_doubling(table):
    for delta in (0.8, 1.0, 1.3):
        rng = np.random.default_rng(7)
        a = C.distortion_band(table, rng, range(5, 11), delta, 300)["width"]
        b = C.distortion_band(table, rng, range(10, 21), delta, 300)["width"]
        assert max(a, b) / min(a, b) < 2


def test_phi_rejects_inadmissible(table):
    a = 0
    bad = next(b for b in range(table.n) if not table.A[a, b])
    with pytest.raises(C.CodingError):
        C.phi_birkhoff(table, [a, bad])

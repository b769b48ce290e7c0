import math

import numpy as np
import pytest

from hypcover import cutting as K
from hypcover import fuchsian as Fu
from hypcover import hypgeo as hg
from hypcover import shift as S


@pytest.fixture(scope="module")
def pairs():
    rng = np.random.default_rng(2024)
    return [K.sample_pair_in_R(rng) for _ in range(30)]


def test_reversed_trace_matches_backward_labels(pairs):
    model = S.octagon_model("f2")
    for p in pairs:
        w = K.trace_cutting(p, 8, 8)
        r = K.trace_cutting(p.reversed(), 0, 8)
        for n in range(8):
            assert model.eq(K.eta(r, n, "+", model), K.eta(w, n, "-", model))


def test_shift_property(pairs):
    for p in pairs:
        w = K.trace_cutting(p, 0, 10)
        q = K.first_return(p)
        w1 = K.trace_cutting(q, 0, 9)
        assert w1.forward(9) == w.forward(10)[1:]


def test_iterated_first_return_equals_composite(pairs, pairing):
    # double precision loses about one digit per step, so n stays at 6 or below
    for p in pairs:
        w = K.trace_cutting(p, 0, 6)
        q = p
        for n in range(1, 7):
            q = K.first_return(q)
            c = K.composite_image(p, w.forward(n - 1), pairing)
            assert abs(hg.ang_diff(q.xi_minus, c.xi_minus)) < 1e-8
            assert abs(hg.ang_diff(q.xi_plus, c.xi_plus)) < 1e-8
            assert K.in_R(q)


def test_frames_follow_composite(pairs, pairing):
    for p in pairs[:10]:
        w = K.trace_cutting(p, 0, 4)
        traced = K.GeodesicPair(p.xi_minus, w.traced_plus)
        q = K.composite_image(traced, w.forward(3), pairing)
        assert abs(hg.ang_diff(q.xi_plus, w.frames[4][1])) < 1e-8


def test_geometric_backward_labels_are_paired(pairs):
    for p in pairs:
        w = K.trace_cutting(p, 6, 0)
        geo = K.geometric_backward(p, 6)
        assert [Fu.PAIRS[s] for s in geo] == [w.labels[-i - 1] for i in range(6)]


def test_copies_follow_labels(pairs):
    w = K.trace_cutting(pairs[0], 3, 3)
    for i in range(3):
        assert w.copies[i + 1] == w.copies[i] + (w.labels[i],)
    for i in range(-1, -4, -1):
        assert w.copies[i] == w.copies[i + 1] + (w.labels[i],)


def test_in_R_agrees_with_dense_sampling(octagon):
    poly = octagon[0]
    rng = np.random.default_rng(5)
    for _ in range(60):
        a, b = rng.uniform(0, 2 * math.pi, 2)
        if abs(hg.ang_diff(a, b)) < 1e-2:
            continue
        p = K.GeodesicPair(float(a), float(b))
        arc = p.arc
        hit = any(poly.contains(arc.point(s), 1e-12) for s in np.linspace(-12, 12, 4001))
        assert K.in_R(p) == hit


def test_pair_outside_R_rejected():
    p = K.GeodesicPair(0.0, 0.05)          # short arc hugging the circle
    assert not K.in_R(p)
    with pytest.raises(K.TraceError):
        K.trace_cutting(p, 0, 3)


def test_degenerate_pair():
    with pytest.raises(hg.DegenerateGeodesic):
        K.GeodesicPair(1.0, 1.0)


def test_pair_through_keeps_forward_endpoint():
    p = K.pair_through(np.random.default_rng(1), 2.5)
    assert p.xi_plus == 2.5 and K.in_R(p)


def test_window_too_short(pairs):
    w = K.trace_cutting(pairs[0], 0, 3)
    with pytest.raises(ValueError):
        K.eta(w, 2, "-", S.octagon_model("f2"))

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hypcover import experiments as E
from hypcover import hypgraph as H
from hypcover import shift as S

F = S.FreeGroup()
letters = st.sampled_from([1, -1, 2, -2])
words = st.lists(letters, max_size=10).map(lambda w: S.FreeGroup.reduce(tuple(w)))


def _common_prefix(a, b):
    k = 0
    while k < min(len(a), len(b)) and a[k] == b[k]:
        k += 1
    return k


def test_right_cayley_gromov_product_is_common_prefix():
    g = H.LazyGraph(lambda w: [F.mul(w, (s,)) for s in (1, -1, 2, -2)], True, 20)
    rng = np.random.default_rng(0)
    for _ in range(30):
        a = F.reduce(tuple(rng.choice([1, -1, 2, -2], size=5)))
        b = F.reduce(tuple(rng.choice([1, -1, 2, -2], size=5)))
        assert H.gromov(g, a, b, ()) == _common_prefix(a, b)


@settings(max_examples=200, deadline=None)
@given(words, words)
def test_left_cayley_gromov_product_is_common_suffix(a, b):
    assert H.gromov_at_identity(F, a, b) == _common_prefix(a[::-1], b[::-1])


def test_tree_is_zero_hyperbolic():
    g = H.cayley_graph(F, [(1,), (-1,), (2,), (-2,)])
    verts = S.GroupBall(F, [(1,), (2,)], 2).elements
    assert H.delta_estimate(g, verts[:14])["delta_hat"] == 0


def test_cycle_is_not_thin():
    g = H.LazyGraph(lambda v: [(v + 1) % 12, (v - 1) % 12], True, 12)
    assert H.thinness(g, 0, 4, 8) == 2


def test_in_U_contains_far_side_point():
    g = H.cayley_graph(F, [(1,), (-1,), (2,), (-2,)])
    # left Cayley graph: elements travel together along their common suffix
    assert H.in_U(g, (), (1, 1, 1), (2, 1, 1, 1), 0.0, inflate=0.0)
    assert not H.in_U(g, (), (1, 1, 1), (2, 2, 2), 0.0, inflate=0.0)


def test_extension_distance_formula_matches_bfs():
    ext = E.extension("f2", 1.0, 3)
    model = ext.model
    for start_j in (0, 3):
        d = H.ex_bfs(ext, (2, start_j))
        g = ext.ball.elements[start_j]
        for j in range(ext.nb):
            if ext.ball.level[j] > 1:
                continue
            for b in range(ext.n):
                assert d[b, j] == H.ex_dist_formula(model, (2, g), (b, ext.ball.elements[j]))


def test_quasi_isometry_small_radius():
    rep = H.quasi_isometry_check(E.extension("f2", 1.0, 4), radius=2)
    assert rep.passed and rep.lower_violations == 0 and rep.upper_violations == 0


def _brute_envelope(model, seq, n):
    return min(H.gromov_at_identity(model, seq[n], seq[m]) for m in range(n, len(seq)))


@pytest.mark.parametrize("name", ["f2", "z2", "zmod:3"])
def test_escape_profile_matches_brute_force(table, name):
    model = S.octagon_model(name)
    w = E.expansions(7, 2, 40)[1]
    seq = E.tau_sequence(model, table, w)
    prof = H.escape_profile(model, seq, 20)
    for n in range(21):
        assert prof.at(n) == _brute_envelope(model, seq, n)


def test_escape_profile_trivial_is_zero(table):
    model = S.octagon_model("trivial")
    seq = E.tau_sequence(model, table, E.expansions(7, 2, 40)[0])
    assert not H.escape_profile(model, seq, 20).envelope.any()


def test_horizon_too_long():
    with pytest.raises(ValueError):
        H.escape_profile(F, [(), (1,)], 5)


def test_equivalent_sequences_grow():
    a = [(1,) * n for n in range(10)]
    b = [(2,) + (1,) * n for n in range(10)]
    assert H.equivalent(F, a, b, 9)["slope"] > 0.5

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hypcover import experiments as E
from hypcover import shift as S

free_words = st.lists(st.sampled_from([1, -1, 2, -2]), max_size=12).map(lambda w: S.FreeGroup.reduce(tuple(w)))


@settings(max_examples=150, deadline=None)
@given(free_words, free_words, free_words)
def test_free_group_axioms(a, b, c):
    F = S.FreeGroup()
    assert F.eq(F.mul(F.mul(a, b), c), F.mul(a, F.mul(b, c)))
    assert F.is_identity(F.mul(a, F.inv(a)))
    assert F.length(F.mul(a, b)) <= F.length(a) + F.length(b)


@pytest.mark.parametrize("name", ["trivial", "f2", "z", "z2", "zmod:3"])
def test_models_kill_the_relator(name):
    S.check_relator(S.octagon_model(name))


def test_unknown_model():
    with pytest.raises(ValueError):
        S.octagon_model("sl2")


def test_group_ball_sizes():
    ball = S.GroupBall(S.FreeGroup(), [(1,), (2,)], 3)
    assert len(ball) == 1 + 4 + 12 + 36
    assert np.bincount(ball.level).tolist() == [1, 4, 12, 36]
    z2 = S.GroupBall(S.FreeAbelian(dim=2), [(1, 0), (0, 1)], 3)
    assert len(z2) == 25


def test_extension_step_is_left_multiplication(table):
    ext = E.extension("f2", 1.0, 3)
    model = ext.model
    for a in range(0, ext.n, 7):
        g = (1, 2)
        for b, h in ext.successors((a, g)):
            assert model.eq(h, model.mul(model.inv(ext.images[a]), g))
            assert ext.base.A[a, b]


def test_full_two_shift_pressure_is_log_two():
    r = S.pressure_estimate(S.full_shift(2, 0.0), 0, 16)
    assert abs(r.final - math.log(2)) < 1e-12
    assert r.Z == [2.0 ** (n - 1) for n in r.n]


def test_f2_four_shift_matches_birth_death_oracle():
    r = S.pressure_estimate(E.f2_four_shift(), 0, 16)
    oracle = [p / 4 for p in E.tree_return_oracle(16)]
    assert max(abs(a - b) for a, b in zip(r.Z, oracle)) < 1e-15
    assert abs(r.final - math.log(math.sqrt(3) / 2)) < 0.05


def test_tree_oracle_small_values():
    p = E.tree_return_oracle(4)
    assert p[0] == 0 and p[1] == pytest.approx(1 / 4) and p[3] == pytest.approx(7 / 64)


def test_one_state_loop_pressure_is_its_weight():
    r = S.pressure_estimate(S.one_state_loop(-0.3), 0, 8)
    assert r.final == pytest.approx(-0.3, abs=1e-12)


def test_pressure_cap():
    with pytest.raises(ValueError):
        S.pressure_estimate(S.full_shift(2), 0, 17)


def test_octagon_f2_pressure_negative():
    r = S.pressure_estimate(E.extension("f2", 1.0, 8), 0, 16)
    assert r.final < -0.01


def test_fit_pressure_recovers_exponent():
    ns = np.arange(1, 17)
    Z = np.exp(-0.2 * ns) * ns ** -1.5
    P, alpha = S.fit_pressure(ns, Z)
    assert P == pytest.approx(-0.2, abs=1e-10) and alpha == pytest.approx(-1.5, abs=1e-9)


def test_irreducibility_constant():
    K, _, _ = S.irreducibility_K(E.extension("f2", 1.0, 7))
    assert K == 9

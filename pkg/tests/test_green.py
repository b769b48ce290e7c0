import math

import numpy as np
import pytest

from hypcover import experiments as E
from hypcover import green as G
from hypcover import shift as S

TWO_STATE = np.array([[0.25, 0.25], [0.5, 0.0]])


@pytest.fixture(scope="module")
def syn():
    return E.synthetic_system(np.random.default_rng(0))


def test_two_state_hand_values():
    # (I - W)^{-1} by hand: det = 0.625
    s = S.MarkovSystem(TWO_STATE)
    p = G.GreenParams(lam=1.0, max_depth=120)
    assert G.path_sum(s, "G", 0, 0, p).value == pytest.approx(1.6, abs=1e-12)
    assert G.path_sum(s, "G", 1, 0, p).value == pytest.approx(0.8, abs=1e-12)
    assert G.path_sum(s, "F", 1, 0, p).value == pytest.approx(0.5, abs=1e-12)


def test_one_state_loop_geometric():
    s = S.one_state_loop(math.log(0.5))
    for lam in (1.0, 1.5, 2.0):
        v = G.path_sum(s, "G", 0, 0, G.GreenParams(lam=lam, max_depth=200))
        assert v.value == pytest.approx(1 / (1 - 0.5 / lam), rel=1e-12)


def test_truncation_tail_closes_geometric_series():
    v = G.truncated([0.5 ** n for n in range(30)])
    assert v.valid and v.upper == pytest.approx(2.0, abs=1e-15)
    bad = G.truncated([1.0] * 30)
    assert not bad.valid


@pytest.mark.parametrize("lam", [1.0, 1.5, 2.0])
def test_oracle_equivalence(syn, lam):
    worst = E.oracle_equivalence(syn, lams=(lam,))
    assert worst[lam] <= 1.0


def test_forward_and_backward_runs_agree(syn):
    ext = S.as_extension(syn)
    col = G.green_column(ext, "G", (2, 0), 1.0, 80)
    row = G.green_row(ext, "G", (1, 0), 1.0, 80)
    assert col.values[1, 0] == pytest.approx(row.values[2, 0], rel=1e-12)


def test_first_passage_diagonal_is_one(syn):
    p = G.GreenParams(lam=1.0, max_depth=60)
    for a in range(syn.n):
        assert G.path_sum(syn, "F", a, a, p).value == 1.0


def test_restricted_kernels_vanish_exactly(syn):
    p = G.GreenParams(lam=1.0, max_depth=60)
    A = (0, 2)
    for a in range(syn.n):
        for b in range(syn.n):
            if a not in A:
                assert G.path_sum(syn, "L_A", a, b, p, A).value == 0.0
            if b not in A:
                assert G.path_sum(syn, "F_A", a, b, p, A).value == 0.0


def test_oracle_identities_exact(syn):
    for k, r in G.oracle_identities(syn, 1.0, 1.5).items():
        assert abs(r - 1) <= 1e-8, k


def test_identities_on_finite_system(syn):
    rep = G.check_identities(syn, G.GreenParams(lam=1.0, max_depth=200), G.SampleSpec(seed=1),
                             np.random.default_rng(1))
    for i in (1, 3, 4, 5, 6):
        assert rep[i].worst() == pytest.approx(1.0, abs=1e-8)
    assert rep[2].worst() <= 1 + 1e-8
    assert rep[7].by_distance["band"] == pytest.approx(1.0, abs=1e-8)


def test_oracle_requires_lambda_above_rho():
    s = S.MarkovSystem(TWO_STATE * 2)
    with pytest.raises(ValueError):
        G.OracleGreen(s, 1.0)


def test_unknown_state_rejected(syn):
    with pytest.raises(ValueError):
        G.path_sum(syn, "G", 99, 0, G.GreenParams())


def test_params_validation():
    with pytest.raises(ValueError):
        G.GreenParams(lam=0.0)


def test_chain_ancona_exact():
    assert E.chain_ancona() <= 1e-8


def test_martin_kernel_at_reference_is_one(syn):
    p = G.GreenParams(lam=1.0, max_depth=200)
    og = G.OracleGreen(syn, 1.0)
    for b in range(syn.n):
        assert G.martin_K(syn, 0, b, p, 0, og) == pytest.approx(1.0, abs=1e-14)


def test_martin_metric_zero_on_equal_points(syn):
    p = G.GreenParams(lam=1.0, max_depth=100)
    x = G.continuation(syn, 0, 5)
    assert G.martin_metric_approx(syn, x, x, p, [[0]]) == 0.0


def test_lambda_monotonicity_on_extension():
    ext = E.extension("f2", 1.0, 4)
    j = int(np.flatnonzero(ext.ball.level == 2)[0])
    bad, checked, prefix_ok = G.check_lambda_monotone(ext, 0.9, 20, [((3, j), (5, 0), 2)])
    assert bad == 0 and checked > 0 and prefix_ok

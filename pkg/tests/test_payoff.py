from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from netcontagion.graph import Graph
from netcontagion.payoff import (
    GeneralThreshold,
    LinearThreshold,
    PayoffParams,
    PayoffThreshold,
    activation_check,
    best_response_is_B,
    check_monotone,
    draw_thresholds,
    parse_number,
    payoff_A,
    payoff_B,
    threshold,
)

MAJ = PayoffParams.majority()


def star(k):
    return Graph.from_edges(k + 1, [(0, j) for j in range(1, k + 1)])


def test_threshold_examples():
    assert threshold(MAJ, 6) == 3.0
    assert threshold(PayoffParams(1, 0, 0, 0), 5) == 5.0
    assert threshold(PayoffParams(2, 1, 1, 2), 4) == 1.5
    assert threshold(PayoffParams(1, 0, 0, 10), 3) == -7


def test_payoff_examples():
    assert payoff_A(MAJ, 0) == 0
    assert payoff_A(MAJ, 4) == 4
    assert payoff_A(PayoffParams(q_A=2.5), 3) == 7.5
    assert payoff_B(PayoffParams(1, 0, 0, 0), 7) == 0
    assert payoff_B(PayoffParams(1, 1, 0, 1), 2) == 3
    assert payoff_B(PayoffParams(1, 0, 0.25, 0.5), 4) == 1.5


def test_best_response_examples():
    assert not best_response_is_B(MAJ, 4, 2)
    assert best_response_is_B(MAJ, 4, 3)
    assert not best_response_is_B(PayoffParams(1, 3, 0, 0), 5, 0)
    assert best_response_is_B(PayoffParams(1, 0, 0, 10), 3, 0)
    with pytest.raises(ValueError):
        best_response_is_B(MAJ, 3, 4)


def test_params_validation():
    with pytest.raises(ValueError):
        PayoffParams(q_A=0)
    with pytest.raises(ValueError):
        PayoffParams(r=-1)


def test_parse_number_is_exact():
    assert parse_number("0.1") == Fraction(1, 10)
    assert parse_number("3") == 3 and isinstance(parse_number("3"), int)
    assert parse_number("2/3") == Fraction(2, 3)


def test_float_ties_are_exact():
    # theta(10) = (1*10 - 0.1 - 0.2 ...) style rounding traps: 0.1 + 0.2 != 0.3 in floats
    p = PayoffParams(Fraction(3, 10), Fraction(1, 10), Fraction(2, 10), 0)
    # theta(2) = 0.6 / 0.6 = 1 exactly, so one B-neighbour is a tie and keeps A
    assert p.stay_count(2) == 1
    assert not best_response_is_B(p, 2, 1)
    assert best_response_is_B(p, 2, 2)


GRID = [0, Fraction(1, 2), 1, 3, Fraction(7, 3)]


def test_equivalence_exhaustive():
    # (payoff_B > payoff_A) <=> (num_B > theta(d)) for every grid point and 0 <= num_B <= d <= 50
    for qa in [Fraction(1, 3), 1, Fraction(5, 2)]:
        for qb in GRID:
            for u in GRID[:3]:
                for r in GRID:
                    p = PayoffParams(qa, qb, u, r)
                    for d in range(51):
                        theta = (Fraction(qa) * d - Fraction(r)) / (Fraction(qa) + Fraction(qb) + Fraction(u))
                        for k in range(d + 1):
                            by_payoff = payoff_B(p, k) > payoff_A(p, d - k)
                            assert by_payoff == (k > theta) == best_response_is_B(p, d, k)


@given(
    st.floats(0.01, 10),
    st.floats(0, 10),
    st.floats(0, 10),
    st.floats(0, 20),
    st.integers(0, 60),
)
def test_best_response_monotone_in_count(qa, qb, u, r, d):
    p = PayoffParams(qa, qb, u, r)
    flags = [best_response_is_B(p, d, k) for k in range(d + 1)]
    assert flags == sorted(flags)
    # stay_count is the last count that keeps A
    assert sum(flags) == d - min(max(p.stay_count(d), -1), d)


@given(st.floats(0.01, 10), st.floats(0, 10), st.floats(0, 10), st.floats(0, 20))
def test_threshold_affine(qa, qb, u, r):
    p = PayoffParams(qa, qb, u, r)
    slope = threshold(p, 1) - threshold(p, 0)
    assert 0 < slope <= 1 + 1e-12
    assert threshold(p, 7) == pytest.approx(threshold(p, 0) + 7 * slope)


def test_activation_check_examples():
    g = star(4)
    lt = LinearThreshold.uniform(g, np.full(5, 0.49))
    assert not activation_check(lt, g, 0, [])
    assert activation_check(lt, g, 0, [1, 2])
    assert not activation_check(lt, g, 0, [1])
    full = LinearThreshold.uniform(g, np.ones(5))
    assert not activation_check(full, g, 0, [1, 2, 3, 4])
    assert activation_check(PayoffThreshold(MAJ), g, 0, [1, 2, 3])
    assert not activation_check(PayoffThreshold(MAJ), g, 0, [1, 2])
    with pytest.raises(ValueError, match="not neighbours"):
        activation_check(lt, g, 1, [2])


def test_linear_threshold_validation():
    g = star(3)
    with pytest.raises(ValueError, match="row sums"):
        LinearThreshold(g, np.ones(6), np.zeros(4))
    with pytest.raises(ValueError, match=r"\[0, 1\]"):
        LinearThreshold.uniform(g, np.full(4, 1.5))


def test_symmetric_edge_weights():
    g = Graph.from_edges(4, [(0, 1), (1, 2), (2, 3), (0, 2)])
    lt = LinearThreshold.from_edge_weights(g, [1.0, 2.0, 3.0, 0.5], np.zeros(4))
    dense = np.zeros((4, 4))
    src = np.repeat(np.arange(4), g.degrees)
    dense[src, g.indices] = lt.weights
    assert np.allclose(dense, dense.T)
    assert dense.sum(axis=1).max() == pytest.approx(1.0)


@given(st.integers(0, 2**32))
def test_linear_activation_monotone(seed):
    rng = np.random.default_rng(seed)
    n = 10
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < 0.4]
    g = Graph.from_edges(n, pairs)
    lt = LinearThreshold.from_edge_weights(g, rng.random(g.m), draw_thresholds(n, rng))
    check_monotone(lt, g, rng, trials=50)
    small = rng.random(n) < 0.3
    big = small | (rng.random(n) < 0.3)
    assert np.all(lt.activation_mask(g, small) <= lt.activation_mask(g, big))


def test_activation_mask_agrees_with_activates():
    rng = np.random.default_rng(3)
    g = Graph.from_edges(6, [(0, 1), (0, 2), (1, 2), (2, 3), (3, 4), (4, 5), (1, 5)])
    rules = [
        PayoffThreshold(PayoffParams(1, 1, 0, Fraction(1, 2))),
        LinearThreshold.uniform(g, draw_thresholds(6, rng)),
        GeneralThreshold(lambda i, s: len(s) / max(g.degrees[i], 1), draw_thresholds(6, rng)),
    ]
    for rule in rules:
        for bits in range(64):
            x = np.array([(bits >> k) & 1 for k in range(6)], dtype=np.int8)
            mask = rule.activation_mask(g, x)
            for i in range(6):
                act = [j for j in g.neighbors(i).tolist() if x[j]]
                assert mask[i] == activation_check(rule, g, i, act)


def test_check_monotone_rejects():
    g = star(4)
    bad = GeneralThreshold(lambda i, s: 1.0 if len(s) == 1 else 0.0, np.zeros(5))
    with pytest.raises(ValueError, match="not monotone"):
        check_monotone(bad, g, np.random.default_rng(0), trials=500)
    out_of_range = GeneralThreshold(lambda i, s: 2.0, np.zeros(5))
    with pytest.raises(ValueError):
        check_monotone(out_of_range, g, np.random.default_rng(0))


def test_draw_thresholds_range():
    t = draw_thresholds(1000, np.random.default_rng(0))
    assert t.shape == (1000,) and t.min() >= 0 and t.max() <= 1

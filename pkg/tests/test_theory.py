import itertools
from math import comb

import numpy as np
import pytest
from hypothesis import given, strategies as st

from netcontagion.generators import make_rng, sample_degree_sequence
from netcontagion.payoff import PayoffParams
from netcontagion.theory import (
    DegreeDistribution,
    alpha_crit,
    binom_cdf,
    empirical_offspring,
    fixed_point,
    fixed_point_general,
    general_recursion_trace,
    h_step,
    h_tilde_step,
    recursion_trace,
    size_biased,
)

# Frozen after the dense polynomial-root scan in test_alpha_crit_matches_root_scan.
ALPHA_CRIT_5_1 = 0.05078125

# Poisson(5) majority limits, cross-checked against Erdos-Renyi n = 2e4, p = 5/n,
# 20 replications: simulated means 0.1102, 0.2447, 0.4412, 0.9926 (stderr <= 0.003).
POISSON5_H_TILDE = {0.1: 0.1100970821, 0.2: 0.2442880782, 0.3: 0.4408219707, 0.5: 0.9929066566}


def enumerate_cdf(k, s, x):
    total = 0.0
    for bits in itertools.product((0, 1), repeat=k):
        if sum(bits) <= s:
            total += np.prod([x if b else 1 - x for b in bits])
    return total


def test_binom_cdf_examples():
    assert binom_cdf(4, 4, 0.37) == 1
    assert binom_cdf(2, 0, 0.5) == pytest.approx(0.25)
    assert binom_cdf(3, 1, 0.5) == pytest.approx(0.5)
    assert binom_cdf(3, -0.5, 0.2) == 0
    assert binom_cdf(3, 1.9, 0.5) == binom_cdf(3, 1, 0.5)


def test_binom_cdf_enumeration():
    xs = np.round(np.linspace(0, 1, 11), 10)
    for k in range(13):
        for s in range(-1, k + 1):
            ref = [enumerate_cdf(k, s, x) if k <= 10 else sum(comb(k, i) * x**i * (1 - x) ** (k - i) for i in range(s + 1)) for x in xs]
            got = binom_cdf(k, s, xs)
            assert np.allclose(got, ref, rtol=0, atol=1e-12), (k, s)
            assert [binom_cdf(k, s, float(x)) for x in xs] == pytest.approx(ref, abs=1e-12)


def test_binom_cdf_large_k_stable():
    from scipy.stats import binom

    xs = np.linspace(0, 1, 101)
    for k, s in [(200, 30), (500, 250), (1000, 999)]:
        assert np.allclose(binom_cdf(k, s, xs), binom.cdf(s, k, xs), atol=1e-12)


def test_step_examples():
    assert h_step(4, 1, 1.0, 0.3) == 1
    assert h_step(4, 1, 0.0, 0.0) == 0
    assert h_step(3, 0, 0.1, 0.1) == pytest.approx(0.271)
    assert h_tilde_step(4, 1, 1.0, 0.3) == 1
    assert h_tilde_step(4, 1, 0.2, 0.0) == pytest.approx(0.2)
    assert h_tilde_step(3, 0, 0.1, 0.1) == pytest.approx(0.3439)


def test_recursion_examples():
    tr = recursion_trace(4, 1, 0.0, 6)
    assert np.all(tr.h == 0) and np.all(tr.h_tilde == 0)
    assert np.all(recursion_trace(4, 1, 1.0, 6).h == 1)
    tr = recursion_trace(3, 0, 0.1, 60)
    assert tr.h[:3] == pytest.approx([0.1, 0.271, 1 - 0.9 * 0.729**2])
    assert tr.h[-1] == pytest.approx(1, abs=1e-9)


def test_fixed_point_examples():
    assert fixed_point(4, 1, 0.0).h_star == 0
    for a in (0.01, 0.2, 0.7):
        assert fixed_point(3, 0, a).h_star == pytest.approx(1, abs=1e-9)
    rep = fixed_point(5, 1, 0.01)
    assert rep.regime == "triple" and rep.h_star < 1
    assert rep.roots == pytest.approx([0.0106662098, 0.21979443, 1.0], abs=1e-8)
    for h in rep.roots:
        assert abs(h_step(5, 1, 0.01, h) - h) <= 1e-10
    assert all(rep.h_star <= v for v in rep.roots)


def test_fixed_point_regimes_around_alpha_crit():
    below = fixed_point(5, 1, ALPHA_CRIT_5_1 / 2)
    above = fixed_point(5, 1, (1 + ALPHA_CRIT_5_1) / 2)
    assert below.regime == "triple" and below.h_star < 0.1
    assert above.regime == "unique" and above.h_star == pytest.approx(1, abs=1e-9)


def _smallest_root(alpha, delta=5, theta=1):
    # phi(h) - h as a polynomial in h, roots by companion matrix
    h = np.polynomial.Polynomial([0, 1])
    g = sum(comb(delta - 1, i) * h**i * (1 - h) ** (delta - 1 - i) for i in range(theta + 1))
    f = 1 - (1 - alpha) * g - h
    r = f.roots()
    r = r[(np.abs(r.imag) < 1e-7) & (r.real > -1e-9) & (r.real < 1 - 1e-6)].real
    return r.min() if r.size else 1.0


def test_alpha_crit_matches_root_scan():
    res = alpha_crit(5, 1)
    assert res.supported
    assert res.alpha == pytest.approx(ALPHA_CRIT_5_1, abs=1e-6)
    grid = np.arange(0.0, 0.2, 1e-4)
    interior = np.array([_smallest_root(a) < 1 for a in grid])
    crossing = grid[np.argmin(interior)]
    assert not interior[grid > crossing + 1e-9].any()
    assert abs(crossing - res.alpha) <= 1e-4


def test_alpha_crit_edge_cases():
    assert alpha_crit(3, 0).alpha == pytest.approx(0, abs=1e-6)
    flat = alpha_crit(3, 2)
    assert not flat.supported
    assert flat.alpha == pytest.approx(1, abs=1e-6)
    for a in (0.1, 0.5, 0.9):
        assert fixed_point(3, 2, a).h_star == pytest.approx(a)


def test_alpha_crit_trace_monotone():
    res = alpha_crit(6, 2)
    below = [a for a, v in res.trace if not v]
    above = [a for a, v in res.trace if v]
    assert max(below) < min(above)


def test_size_biased_examples():
    assert size_biased(DegreeDistribution.point_mass(4)).as_dict() == {3: 1.0}
    assert size_biased(DegreeDistribution.from_mapping({1: 0.5, 3: 0.5})).as_dict() == pytest.approx({0: 0.25, 2: 0.75})
    p = DegreeDistribution.poisson(5)
    assert size_biased(p).total_variation(p) < 1e-9
    with pytest.raises(ValueError):
        size_biased(DegreeDistribution.point_mass(0))


def test_empirical_offspring_examples():
    assert empirical_offspring([2, 2, 2]).as_dict() == {1: 1.0}
    assert empirical_offspring([1, 3]).as_dict() == pytest.approx({0: 0.25, 2: 0.75})
    with pytest.raises(ValueError):
        empirical_offspring([0, 0])
    p = DegreeDistribution.from_mapping({1: 0.2, 2: 0.3, 4: 0.4, 7: 0.1})
    seq = sample_degree_sequence(p, 100_000, make_rng(9))
    assert empirical_offspring(seq).total_variation(size_biased(p)) < 0.01


def test_degree_distribution_validation(tmp_path):
    with pytest.raises(ValueError):
        DegreeDistribution(np.array([0.5, 0.6]))
    with pytest.raises(ValueError):
        DegreeDistribution(np.array([1.2, -0.2]))
    f = tmp_path / "p.txt"
    f.write_text("1 0.5\n3 0.5\n")
    assert DegreeDistribution.read(f).as_dict() == {1: 0.5, 3: 0.5}


def test_general_point_mass_matches_regular():
    params = PayoffParams.majority()
    for delta in (3, 4, 5, 6):
        for a in (0.0, 0.05, 0.2, 0.6):
            reg = fixed_point(delta, params.stay_count(delta), a)
            gen = fixed_point_general(DegreeDistribution.point_mass(delta), params, a)
            assert gen.h_star == reg.h_star
            assert gen.h_tilde_limit == reg.h_tilde_limit
            t1 = recursion_trace(delta, params.stay_count(delta), a, 8)
            t2 = general_recursion_trace(DegreeDistribution.point_mass(delta), params, a, 8)
            assert np.array_equal(t1.h, t2.h) and np.array_equal(t1.h_tilde, t2.h_tilde)


def test_general_poisson_frozen():
    p = DegreeDistribution.poisson(5)
    params = PayoffParams.majority()
    zero = fixed_point_general(p, params, 0.0)
    assert zero.h_star == pytest.approx(0, abs=1e-12) and zero.h_tilde_limit == pytest.approx(0, abs=1e-12)
    vals = []
    for a, ref in POISSON5_H_TILDE.items():
        vals.append(fixed_point_general(p, params, a).h_tilde_limit)
        assert vals[-1] == pytest.approx(ref, abs=1e-9)
    grid = [fixed_point_general(p, params, a).h_tilde_limit for a in np.linspace(0, 1, 21)]
    assert np.all(np.diff(grid) >= -1e-12)


@given(st.integers(2, 9), st.integers(-1, 8), st.floats(0, 1), st.floats(0, 1), st.floats(0, 1))
def test_map_monotone(delta, theta, a1, a2, h):
    a1, a2 = sorted((a1, a2))
    hs = np.linspace(0, 1, 201)
    phi = h_step(delta, theta, a1, hs)
    assert np.all(np.diff(phi) >= -1e-12)
    assert np.all(h_step(delta, theta, a2, hs) >= phi - 1e-12)
    if theta < delta:
        assert binom_cdf(delta, theta, h) <= binom_cdf(delta - 1, theta, h) + 1e-12
        assert h_tilde_step(delta, theta, a1, h) >= h_step(delta, theta, a1, h) - 1e-12


@given(st.integers(3, 8), st.integers(0, 5), st.floats(0, 1))
def test_trace_stays_below_smallest_fixed_point(delta, theta, alpha):
    rep = fixed_point(delta, theta, alpha, scan=False)
    tr = recursion_trace(delta, theta, alpha, 200)
    assert np.all(np.diff(tr.h) >= -1e-15)
    assert tr.h[-1] <= rep.h_star + 1e-10
    # no fixed point between the last iterate and h_star (a tangency can make the iteration crawl)
    xs = np.linspace(tr.h[-1], rep.h_star, 1001)[:-1]
    assert np.all(h_step(delta, theta, alpha, xs) - xs >= -1e-12)


@pytest.mark.parametrize(
    "delta,theta,alpha", [(3, 0, 0.1), (4, 1, 0.05), (4, 1, 0.4), (5, 1, 0.01), (5, 2, 0.3), (6, 2, 0.2), (8, 3, 0.5)]
)
def test_trace_limit_matches_fixed_point(delta, theta, alpha):
    tol = 1e-12
    rep = fixed_point(delta, theta, alpha, tol=tol)
    assert not any(r.double for r in rep.solutions)
    assert recursion_trace(delta, theta, alpha, 5000).h[-1] == pytest.approx(rep.h_star, abs=10 * tol)


@given(st.integers(3, 7), st.integers(0, 4), st.floats(0, 1), st.floats(0, 1))
def test_h_star_monotone_in_alpha(delta, theta, a1, a2):
    a1, a2 = sorted((a1, a2))
    assert fixed_point(delta, theta, a1, scan=False).h_star <= fixed_point(delta, theta, a2, scan=False).h_star + 1e-12

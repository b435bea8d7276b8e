"""Payoffs, the adoption threshold and activation rules.

A node playing A earns ``q_A`` per A-neighbour; playing B earns the bonus
``r`` plus ``q_B + u`` per B-neighbour. A node of degree ``d`` prefers B iff
its B-neighbour count strictly exceeds

    theta(d) = (q_A * d - r) / (q_A + q_B + u).

Comparisons are done in exact rational arithmetic (``fractions.Fraction``
of the stored values), so ties at integer thresholds never depend on float
rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Union

import numpy as np

from .graph import Graph

Number = Union[int, float, Fraction]


def parse_number(text: str) -> Number:
    """Parse a decimal or ``p/q`` string exactly as a rational when possible."""
    try:
        value = Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        return float(text)
    return int(value) if value.denominator == 1 else value


@dataclass(frozen=True)
class PayoffParams:
    q_A: Number = 1
    q_B: Number = 1
    u: Number = 0
    r: Number = 0

    def __post_init__(self):
        if not self.q_A > 0:
            raise ValueError(f"q_A must be positive, got {self.q_A}")
        for name in ("q_B", "u", "r"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative, got {getattr(self, name)}")

    @classmethod
    def majority(cls) -> "PayoffParams":
        """``q_A = q_B = 1, u = r = 0``, i.e. ``theta(d) = d / 2``."""
        return cls(1, 1, 0, 0)

    @property
    def denominator(self) -> Number:
        return self.q_A + self.q_B + self.u

    def _exact(self):
        return tuple(Fraction(v) for v in (self.q_A, self.q_B, self.u, self.r))

    def stay_count(self, d: int) -> int:
        """Largest B-neighbour count at which a degree-``d`` node keeps A.

        Equals ``floor(theta(d))``; negative when the bonus alone makes B
        preferable.
        """
        qa, qb, u, r = self._exact()
        return math.floor((qa * d - r) / (qa + qb + u))


def threshold(params: PayoffParams, d: int) -> float:
    return (params.q_A * d - params.r) / params.denominator


def payoff_A(params: PayoffParams, num_A_neighbors: int) -> Number:
    return params.q_A * num_A_neighbors


def payoff_B(params: PayoffParams, num_B_neighbors: int) -> Number:
    return params.r + (params.q_B + params.u) * num_B_neighbors


def best_response_is_B(params: PayoffParams, d: int, num_B: int) -> bool:
    """Strict preference for B; ties keep A."""
    if not 0 <= num_B <= d:
        raise ValueError(f"need 0 <= num_B <= d, got num_B={num_B}, d={d}")
    qa, qb, u, r = params._exact()
    return num_B * (qa + qb + u) > qa * d - r


def _check_subset(g: Graph, i: int, active) -> frozenset[int]:
    active = frozenset(int(j) for j in active)
    nbrs = set(g.neighbors(i).tolist())
    if not active <= nbrs:
        raise ValueError(f"nodes {sorted(active - nbrs)} are not neighbours of {i}")
    return active


@dataclass(frozen=True)
class PayoffThreshold:
    """Best-response rule from :class:`PayoffParams`."""

    params: PayoffParams

    def activates(self, g: Graph, i: int, active) -> bool:
        active = _check_subset(g, i, active)
        return best_response_is_B(self.params, int(g.degrees[i]), len(active))

    def adopt_counts(self, g: Graph) -> np.ndarray:
        """Per node, the smallest B-neighbour count that triggers adoption (>= 0)."""
        degs, inv = np.unique(g.degrees, return_inverse=True)
        need = np.array([max(self.params.stay_count(int(d)) + 1, 0) for d in degs], dtype=np.int64)
        return need[inv.reshape(-1)] if len(degs) else np.zeros(0, dtype=np.int64)

    def activation_mask(self, g: Graph, x: np.ndarray) -> np.ndarray:
        counts = g.adjacency @ x.astype(np.int64)
        return counts >= self.adopt_counts(g)


@dataclass(frozen=True, eq=False)
class LinearThreshold:
    """``f_i(X) = sum_{j in X} W_ij`` against node thresholds ``theta_i``.

    ``weights`` is aligned with ``g.indices``: entry ``k`` in row ``i``'s
    slice is the weight node ``i`` gives to neighbour ``g.indices[k]``.
    Row sums must not exceed 1.
    """

    graph: Graph
    weights: np.ndarray
    theta: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if w.shape != self.graph.indices.shape:
            raise ValueError("weights must align with the graph's adjacency entries")
        if np.any(w < 0):
            raise ValueError("weights must be nonnegative")
        src = np.repeat(np.arange(self.graph.n), self.graph.degrees)
        rows = np.bincount(src, weights=w, minlength=self.graph.n)
        if np.any(rows > 1 + 1e-12):
            raise ValueError("weight row sums must not exceed 1")
        _check_thresholds(self.theta, self.graph.n)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "theta", np.asarray(self.theta, dtype=np.float64))

    @classmethod
    def uniform(cls, g: Graph, theta) -> "LinearThreshold":
        """``W_ij = 1 / d_i``: the active fraction of the neighbourhood."""
        w = 1.0 / np.repeat(np.maximum(g.degrees, 1), g.degrees)
        return cls(g, w, theta)

    @classmethod
    def from_edge_weights(cls, g: Graph, edge_weights, theta) -> "LinearThreshold":
        """Symmetric weights, one per edge of ``g.edge_array``.

        All weights are divided by the largest weighted degree, which keeps
        ``W_ij = W_ji`` while bounding every row sum by 1.
        """
        ew = np.asarray(edge_weights, dtype=np.float64)
        if ew.shape != (g.m,):
            raise ValueError(f"expected {g.m} edge weights, got shape {ew.shape}")
        e = g.edge_array
        # CSR positions are sorted by (row, column); locate each directed entry.
        src = np.repeat(np.arange(g.n), g.degrees)
        pos_uv = np.searchsorted(src * g.n + g.indices, e[:, 0] * g.n + e[:, 1])
        pos_vu = np.searchsorted(src * g.n + g.indices, e[:, 1] * g.n + e[:, 0])
        w = np.zeros(len(g.indices))
        w[pos_uv] = ew
        w[pos_vu] = ew
        scale = max(np.bincount(src, weights=w, minlength=g.n).max(initial=0.0), 1e-300)
        return cls(g, w / scale if scale > 1 else w, theta)

    def f(self, i: int, active: frozenset[int]) -> float:
        lo, hi = self.graph.indptr[i], self.graph.indptr[i + 1]
        nbrs = self.graph.indices[lo:hi]
        mask = np.isin(nbrs, np.fromiter(active, dtype=np.int64, count=len(active)))
        return float(self.weights[lo:hi][mask].sum())

    def activates(self, g: Graph, i: int, active) -> bool:
        active = _check_subset(g, i, active)
        return self.f(i, active) > self.theta[i]

    def activation_mask(self, g: Graph, x: np.ndarray) -> np.ndarray:
        w = x[g.indices].astype(np.float64) * self.weights
        src = np.repeat(np.arange(g.n), g.degrees)
        return np.bincount(src, weights=w, minlength=g.n) > self.theta


@dataclass(frozen=True, eq=False)
class GeneralThreshold:
    """Arbitrary monotone ``f(i, active_set) -> [0, 1]`` with node thresholds."""

    f: Callable[[int, frozenset], float]
    theta: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        object.__setattr__(self, "theta", np.asarray(self.theta, dtype=np.float64))

    def activates(self, g: Graph, i: int, active) -> bool:
        active = _check_subset(g, i, active)
        return self.f(i, active) > self.theta[i]

    def activation_mask(self, g: Graph, x: np.ndarray) -> np.ndarray:
        out = np.zeros(g.n, dtype=bool)
        for i in range(g.n):
            nbrs = g.indices[g.indptr[i] : g.indptr[i + 1]]
            out[i] = self.f(i, frozenset(nbrs[x[nbrs] == 1].tolist())) > self.theta[i]
        return out


ThresholdRule = Union[PayoffThreshold, LinearThreshold, GeneralThreshold]


def activation_check(rule: ThresholdRule, g: Graph, i: int, active_neighbors) -> bool:
    return rule.activates(g, i, active_neighbors)


def _check_thresholds(theta, n):
    theta = np.asarray(theta, dtype=np.float64)
    if theta.shape != (n,):
        raise ValueError(f"expected {n} node thresholds, got shape {theta.shape}")
    if np.any((theta < 0) | (theta > 1)):
        raise ValueError("node thresholds must lie in [0, 1]")


def draw_thresholds(n: int, rng: np.random.Generator) -> np.ndarray:
    """Node thresholds i.i.d. uniform on [0, 1]."""
    return rng.uniform(0.0, 1.0, size=n)


def check_monotone(rule, g: Graph, rng: np.random.Generator, trials: int = 200) -> None:
    """Spot-check ``f_i(X) <= f_i(Y)`` on random nested pairs ``X <= Y <= N_i``.

    Raises ``ValueError`` on the first violation or on a value outside [0, 1].
    """
    candidates = np.flatnonzero(g.degrees > 0)
    if not len(candidates):
        return
    for _ in range(trials):
        i = int(rng.choice(candidates))
        nbrs = g.neighbors(i)
        big = nbrs[rng.random(len(nbrs)) < rng.random()]
        small = big[rng.random(len(big)) < rng.random()]
        fx = rule.f(i, frozenset(small.tolist()))
        fy = rule.f(i, frozenset(big.tolist()))
        if not (-1e-12 <= fx <= 1 + 1e-12 and -1e-12 <= fy <= 1 + 1e-12):
            raise ValueError(f"f_{i} left [0, 1]: {fx}, {fy}")
        if fx > fy + 1e-12:
            raise ValueError(
                f"f_{i} is not monotone: f({sorted(small.tolist())}) = {fx} > "
                f"f({sorted(big.tolist())}) = {fy}"
            )

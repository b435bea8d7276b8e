"""Synchronous best-response dynamics.

All nodes update simultaneously from the state at step ``t``. Seeds are
pinned to B. Under :class:`~netcontagion.payoff.PayoffThreshold` every
other node re-evaluates each step; under the general and linear threshold
rules activation is permanent. From a seed start both give a monotone
trajectory that reaches a fixed point within ``n`` steps.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .generators import make_rng
from .graph import Graph
from .payoff import PayoffThreshold, ThresholdRule


@dataclass(frozen=True, eq=False)
class SeedVector:
    chi: np.ndarray

    def __post_init__(self):
        chi = np.asarray(self.chi, dtype=np.uint8)
        if np.any(chi > 1):
            raise ValueError("seed indicators must be 0 or 1")
        object.__setattr__(self, "chi", chi)

    @property
    def n(self) -> int:
        return len(self.chi)

    @property
    def alpha_used(self) -> float:
        return int(self.chi.sum()) / self.n if self.n else 0.0


@dataclass(frozen=True, eq=False)
class CascadeState:
    x: np.ndarray
    t: int = 0


@dataclass
class Trajectory:
    """Per-step statistics of one run, index ``k`` is time step ``k``."""

    beta: np.ndarray
    gamma: np.ndarray
    delta: np.ndarray
    alpha_used: float
    final: np.ndarray
    converged_at: int | None = None
    cycle_detected: bool = False
    states: list[np.ndarray] | None = field(default=None, repr=False)

    @property
    def steps(self) -> int:
        return len(self.beta) - 1

    def padded(self, length: int, name: str = "beta") -> np.ndarray:
        """Series ``name`` extended to ``length`` entries by holding its last value.

        Only meaningful when the run converged (the fixed point persists).
        """
        s = getattr(self, name)
        if len(s) >= length:
            return s[:length]
        return np.concatenate([s, np.full(length - len(s), s[-1])])


def seed_bernoulli(n: int, alpha: float, seed) -> SeedVector:
    if not 0 <= alpha <= 1:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    rng = make_rng(seed)
    return SeedVector((rng.random(n) < alpha).astype(np.uint8))


def delta_bb(g: Graph, x) -> float:
    """Fraction of edges with both endpoints playing B (0 for an edgeless graph)."""
    x = x.x if isinstance(x, CascadeState) else np.asarray(x)
    if g.m == 0:
        return 0.0
    e = g.edge_array
    return int(np.count_nonzero(x[e[:, 0]] & x[e[:, 1]])) / g.m


class _Stepper:
    # Caches per-rule data (adoption counts) across the steps of one run.
    def __init__(self, g: Graph, rule: ThresholdRule, chi: SeedVector):
        if chi.n != g.n:
            raise ValueError(f"seed vector has length {chi.n}, graph has {g.n} nodes")
        self.g, self.rule, self.chi = g, rule, chi.chi.astype(bool)
        self.need = rule.adopt_counts(g) if isinstance(rule, PayoffThreshold) else None

    def __call__(self, x: np.ndarray) -> np.ndarray:
        if self.need is not None:
            counts = self.g.adjacency @ x.astype(np.int64)
            return (self.chi | (counts >= self.need)).astype(np.uint8)
        mask = self.rule.activation_mask(self.g, x)
        return (self.chi | x.astype(bool) | mask).astype(np.uint8)


def step(g: Graph, rule: ThresholdRule, chi: SeedVector, state: CascadeState) -> CascadeState:
    x = np.asarray(state.x, dtype=np.uint8)
    if len(x) != g.n:
        raise ValueError(f"state has length {len(x)}, graph has {g.n} nodes")
    return CascadeState(_Stepper(g, rule, chi)(x), state.t + 1)


def run(
    g: Graph,
    rule: ThresholdRule,
    chi: SeedVector,
    t_max: int,
    x0=None,
    keep_states: bool = False,
) -> Trajectory:
    """Iterate :func:`step` from ``x0`` (default: the seeds).

    Stops at a fixed point, at a period-2 cycle, or after ``t_max`` steps.
    """
    stepper = _Stepper(g, rule, chi)
    x = chi.chi.copy() if x0 is None else np.asarray(x0, dtype=np.uint8).copy()
    if len(x) != g.n:
        raise ValueError(f"initial state has length {len(x)}, graph has {g.n} nodes")
    n_seed = int(chi.chi.sum())
    beta, gamma, delta = [], [], []
    states = [] if keep_states else None

    def record(s):
        nb = int(s.sum())
        beta.append(nb / g.n)
        gamma.append((nb - n_seed) / g.n)
        delta.append(delta_bb(g, s))
        if keep_states:
            states.append(s)

    record(x)
    prev = None
    converged_at, cycle = None, False
    for t in range(t_max):
        nxt = stepper(x)
        if np.array_equal(nxt, x):
            converged_at = t
            break
        if prev is not None and np.array_equal(nxt, prev):
            cycle = True
            break
        prev, x = x, nxt
        record(x)
    return Trajectory(
        beta=np.array(beta),
        gamma=np.array(gamma),
        delta=np.array(delta),
        alpha_used=chi.alpha_used,
        final=x,
        converged_at=converged_at,
        cycle_detected=cycle,
        states=states,
    )

"""Marketing cost accounting and grid sweeps over (alpha, r, u).

Total cost at time t is ``c * alpha + r * gamma(t) + u * delta(t)``: seeding,
rebates to organic adopters, and the per-B-B-edge subsidy. The bonus ``r``
and subsidy ``u`` are the same numbers that enter the payoffs, so a sweep
row uses one value of each for both.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .discrete import run, seed_bernoulli
from .generators import make_rng
from .graph import Graph
from .payoff import PayoffParams, PayoffThreshold
from .theory import DegreeDistribution, fixed_point, fixed_point_general
from .theory import general_recursion_trace, recursion_trace


@dataclass(frozen=True)
class CostParams:
    c: float = 1.0
    r: float = 0.0
    u: float = 0.0

    def __post_init__(self):
        for name in ("c", "r", "u"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative, got {getattr(self, name)}")


@dataclass(frozen=True)
class CostBreakdown:
    m1: float
    m2: float
    m3: float
    total: float


def cost(cp: CostParams, alpha: float, gamma: float, delta: float) -> CostBreakdown:
    for name, v in (("alpha", alpha), ("gamma", gamma), ("delta", delta)):
        if not 0 <= v <= 1:
            raise ValueError(f"{name} must lie in [0, 1], got {v}")
    m1, m2, m3 = cp.c * alpha, cp.r * gamma, cp.u * delta
    return CostBreakdown(m1, m2, m3, m1 + m2 + m3)


@dataclass(frozen=True, eq=False)
class SweepContext:
    """Fixed inputs of a sweep.

    The theory backend needs ``delta`` (regular tree) or ``distribution``;
    the simulation backend needs ``graph``. ``horizon`` is a step count, or
    ``None`` for the limit (theory) / run to convergence (simulation).
    """

    q_A: float = 1
    q_B: float = 1
    c: float = 1.0
    horizon: int | None = None
    delta: int | None = None
    distribution: DegreeDistribution | None = None
    graph: Graph | None = None
    reps: int = 10
    seed: int = 0


@dataclass(frozen=True)
class SweepRow:
    """One grid point. ``delta``, ``m3`` and ``total`` are ``None`` when unknown."""

    alpha: float
    r: float
    u: float
    beta: float
    gamma: float
    delta: float | None
    m1: float
    m2: float
    m3: float | None
    total: float | None

    FIELDS = ("alpha", "r", "u", "beta", "gamma", "delta", "m1", "m2", "m3", "total")

    def values(self):
        return tuple(getattr(self, f) for f in self.FIELDS)


def _theory_point(ctx: SweepContext, params: PayoffParams, alpha: float) -> float:
    if ctx.delta is not None:
        theta = params.stay_count(ctx.delta)
        if ctx.horizon is not None:
            return float(recursion_trace(ctx.delta, theta, alpha, ctx.horizon).h_tilde[-1])
        return fixed_point(ctx.delta, theta, alpha, scan=False).h_tilde_limit
    if ctx.horizon is not None:
        return float(general_recursion_trace(ctx.distribution, params, alpha, ctx.horizon).h_tilde[-1])
    return fixed_point_general(ctx.distribution, params, alpha).h_tilde_limit


def _simulation_point(ctx: SweepContext, params: PayoffParams, alpha: float, row: int):
    g = ctx.graph
    rule = PayoffThreshold(params)
    t_max = ctx.horizon if ctx.horizon is not None else g.n
    a, b, gm, d = [], [], [], []
    for rep in range(ctx.reps):
        chi = seed_bernoulli(g.n, alpha, make_rng(ctx.seed, row, rep))
        traj = run(g, rule, chi, t_max)
        k = ctx.horizon if ctx.horizon is not None else traj.steps
        a.append(chi.alpha_used)
        b.append(traj.padded(k + 1, "beta")[-1])
        gm.append(traj.padded(k + 1, "gamma")[-1])
        d.append(traj.padded(k + 1, "delta")[-1])
    return float(np.mean(a)), float(np.mean(b)), float(np.mean(gm)), float(np.mean(d))


def sweep(alphas, rs, us, backend: str, ctx: SweepContext) -> list[SweepRow]:
    """Evaluate every ``(alpha, r, u)`` in lexicographic grid order.

    Simulation rows report the realised mean seed fraction in ``alpha`` so
    that ``gamma = beta - alpha`` holds row-wise. Theory rows know ``delta``
    only when nobody or everybody adopts; otherwise it is ``None``.
    """
    if not (len(alphas) and len(rs) and len(us)):
        raise ValueError("sweep grids must be non-empty")
    if backend == "theory":
        if (ctx.delta is None) == (ctx.distribution is None):
            raise ValueError("theory backend needs exactly one of delta or distribution")
    elif backend == "simulation":
        if ctx.graph is None:
            raise ValueError("simulation backend needs a graph")
    else:
        raise ValueError(f"unknown backend {backend!r}")

    rows = []
    for k, (alpha, r, u) in enumerate(itertools.product(alphas, rs, us)):
        params = PayoffParams(ctx.q_A, ctx.q_B, u, r)
        cp = CostParams(ctx.c, float(r), float(u))
        if backend == "theory":
            beta = _theory_point(ctx, params, alpha)
            a_col, gamma = float(alpha), max(beta - alpha, 0.0)
            delta = 0.0 if beta == 0 else 1.0 if beta == 1 else None
        else:
            a_col, beta, gamma, delta = _simulation_point(ctx, params, alpha, k)
        m1, m2 = cp.c * a_col, cp.r * gamma
        if delta is None:
            rows.append(SweepRow(a_col, float(r), float(u), beta, gamma, None, m1, m2, None, None))
        else:
            bd = cost(cp, a_col, gamma, delta)
            rows.append(
                SweepRow(a_col, float(r), float(u), beta, gamma, delta, bd.m1, bd.m2, bd.m3, bd.total)
            )
    return rows

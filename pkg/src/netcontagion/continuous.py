"""Continuous-time adoption dynamics and the linear birth process that dominates them.

Each node not yet playing B carries a rate-1 clock and switches to B on a
tick if more than ``theta(d_i)`` neighbours play B. Ticks at nodes that
would not switch change nothing, so the simulation only tracks *eligible*
nodes: the next adoption comes after an exponential delay with rate equal
to their number, at a uniformly chosen one. Adoptions are permanent.

The counting process ``Z`` with ``Z_i -> Z_i + 1`` at rate
``(A Z)_i / theta_min`` satisfies ``E Z(t) = exp(t A / theta_min) Z(0)`` and
stochastically dominates the adoption indicators, which yields
``beta(t) <= alpha * exp(lambda_1 t / theta_min)``.

Simulations run many replications at once as rows of an ``(R, n)`` array;
each loop iteration advances every unfinished replication by one event.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .generators import make_rng
from .graph import Graph
from .payoff import PayoffParams, PayoffThreshold


@dataclass(frozen=True, eq=False)
class EventTrajectory:
    """Adoption time per node: 0 for seeds, ``inf`` for nodes that never adopt."""

    adoption_times: np.ndarray
    t_end: float

    @property
    def events(self) -> list[tuple[float, int]]:
        t = self.adoption_times
        idx = np.flatnonzero((t > 0) & np.isfinite(t))
        order = idx[np.argsort(t[idx], kind="stable")]
        return [(float(t[i]), int(i)) for i in order]

    def beta_at(self, t) -> np.ndarray | float:
        t_arr = np.asarray(t, dtype=np.float64)
        out = (self.adoption_times[None, :] <= t_arr.reshape(-1, 1)).mean(axis=1)
        return float(out[0]) if t_arr.ndim == 0 else out


def _neighbor_entries(g: Graph, rows: np.ndarray, nodes: np.ndarray):
    # (row, column) pairs for every neighbour of nodes[k] in replication rows[k].
    lens = g.degrees[nodes]
    starts = np.repeat(g.indptr[nodes], lens)
    offs = np.arange(lens.sum()) - np.repeat(np.cumsum(lens) - lens, lens)
    return np.repeat(rows, lens), g.indices[starts + offs]


def _pick(weights: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    # One column per row with probability proportional to the row's weights.
    cum = np.cumsum(weights, axis=1, dtype=np.float64)
    u = rng.random(len(weights)) * cum[:, -1]
    return np.minimum((cum <= u[:, None]).sum(axis=1), weights.shape[1] - 1)


def simulate_ctmc_batch(
    g: Graph, params: PayoffParams, chi: np.ndarray, t_end: float, seed
) -> np.ndarray:
    """Adoption times for a batch of replications.

    ``chi`` is an ``(R, n)`` 0/1 seed array, one row per replication.
    Returns an ``(R, n)`` float array as in :class:`EventTrajectory`, with
    adoptions after ``t_end`` reported as ``inf``.
    """
    if t_end <= 0:
        raise ValueError("t_end must be positive")
    rng = make_rng(seed)
    x = np.atleast_2d(np.asarray(chi)).astype(bool)
    R, n = x.shape
    if n != g.n:
        raise ValueError(f"seed rows have length {n}, graph has {g.n} nodes")
    need = PayoffThreshold(params).adopt_counts(g)
    counts = np.asarray((g.adjacency @ x.T.astype(np.int64)).T)
    times = np.where(x, 0.0, np.inf)
    clock = np.zeros(R)
    live = np.arange(R)
    while live.size:
        elig = ~x[live] & (counts[live] >= need)
        rate = elig.sum(axis=1)
        clock[live] += rng.exponential(size=live.size) / np.maximum(rate, 1)
        go = (rate > 0) & (clock[live] <= t_end)
        live, elig = live[go], elig[go]
        if not live.size:
            break
        nodes = _pick(elig, rng)
        x[live, nodes] = True
        times[live, nodes] = clock[live]
        r, c = _neighbor_entries(g, live, nodes)
        np.add.at(counts, (r, c), 1)
    return times


def simulate_ctmc(
    g: Graph, params: PayoffParams, chi, t_end: float, seed
) -> EventTrajectory:
    chi = getattr(chi, "chi", chi)
    times = simulate_ctmc_batch(g, params, np.asarray(chi)[None, :], t_end, seed)
    return EventTrajectory(times[0], t_end)


def beta_grid(times: np.ndarray, grid: np.ndarray) -> np.ndarray:
    """``(R, K)`` adoption fractions at each grid time from an ``(R, n)`` time array."""
    return (times[:, None, :] <= grid[None, :, None]).mean(axis=2)


def delta_grid(g: Graph, times: np.ndarray, grid: np.ndarray) -> np.ndarray:
    """``(R, K)`` B-B edge fractions; an edge is B-B once both ends have adopted."""
    if g.m == 0:
        return np.zeros((len(times), len(grid)))
    e = g.edge_array
    both = np.maximum(times[:, e[:, 0]], times[:, e[:, 1]])
    return (both[:, None, :] <= grid[None, :, None]).mean(axis=2)


@dataclass(frozen=True, eq=False)
class BirthSamples:
    """States of the birth process at ``times``; ``z`` has shape ``(K, R, n)``."""

    times: np.ndarray
    z: np.ndarray
    exhausted: np.ndarray

    @property
    def totals(self) -> np.ndarray:
        return self.z.sum(axis=2)


def simulate_dominating(
    g: Graph,
    theta_dmin: float,
    z0,
    t_end: float,
    seed,
    times=None,
    reps: int = 1,
    max_events: int = 1_000_000,
) -> BirthSamples:
    """Exact simulation of the linear pure-birth process.

    ``z0`` is one count vector (shared by all ``reps``) or an ``(R, n)``
    array. States are sampled at ``times`` (default: ``t_end`` only). A
    replication that uses up ``max_events`` stops early; its remaining
    samples hold the last state and ``exhausted`` flags it.
    """
    if theta_dmin <= 0:
        raise ValueError("theta_dmin must be positive")
    rng = make_rng(seed)
    z = np.asarray(z0, dtype=np.int64)
    z = np.tile(z, (reps, 1)) if z.ndim == 1 else z.copy()
    R, n = z.shape
    if n != g.n:
        raise ValueError(f"z0 has length {n}, graph has {g.n} nodes")
    ts = np.array([t_end] if times is None else times, dtype=np.float64)
    if np.any(ts > t_end) or np.any(ts < 0):
        raise ValueError("sample times must lie in [0, t_end]")
    out = np.empty((len(ts), R, n), dtype=np.int64)
    taken = np.zeros((len(ts), R), dtype=bool)
    w = np.asarray((g.adjacency @ z.T).T)
    clock = np.zeros(R)
    events = np.zeros(R, dtype=np.int64)
    exhausted = np.zeros(R, dtype=bool)
    live = np.arange(R)
    while live.size:
        total = w[live].sum(axis=1) / theta_dmin
        with np.errstate(divide="ignore"):
            nxt = clock[live] + rng.exponential(size=live.size) / total
        for k, s in enumerate(ts):
            hit = live[~taken[k, live] & (nxt > s)]
            out[k, hit] = z[hit]
            taken[k, hit] = True
        stop = (nxt > t_end) | (events[live] >= max_events)
        exhausted[live[(nxt <= t_end) & stop]] = True
        keep = ~stop
        clock[live[keep]] = nxt[keep]
        live = live[keep]
        if not live.size:
            break
        nodes = _pick(w[live], rng)
        z[live, nodes] += 1
        events[live] += 1
        r, c = _neighbor_entries(g, live, nodes)
        np.add.at(w, (r, c), 1)
    for k in range(len(ts)):
        rest = ~taken[k]
        out[k, rest] = z[rest]
    return BirthSamples(ts, out, exhausted)


MAX_DENSE_NODES = 64


def expm(m: np.ndarray) -> np.ndarray:
    """Matrix exponential by scaling and squaring of a truncated Taylor series."""
    m = np.asarray(m, dtype=np.float64)
    norm = np.abs(m).sum(axis=0).max(initial=0.0)
    s = max(0, int(math.ceil(math.log2(norm))) + 1) if norm > 0 else 0
    b = m / 2.0**s
    result = np.eye(len(m))
    term = np.eye(len(m))
    for k in range(1, 60):
        term = term @ b / k
        result = result + term
        if np.abs(term).max(initial=0.0) <= 1e-18 * np.abs(result).max():
            break
    for _ in range(s):
        result = result @ result
    return result


def mean_dominating(g: Graph, theta_dmin: float, z0, t: float) -> np.ndarray:
    """``E Z(t) = exp(t A / theta_min) z0`` for graphs of at most 64 nodes."""
    if g.n > MAX_DENSE_NODES:
        raise ValueError(f"dense matrix exponential limited to {MAX_DENSE_NODES} nodes, got {g.n}")
    if theta_dmin <= 0:
        raise ValueError("theta_dmin must be positive")
    z0 = np.asarray(z0, dtype=np.float64)
    if t == 0:
        return z0.copy()
    a = g.adjacency.toarray().astype(np.float64)
    return expm(a * (t / theta_dmin)) @ z0


def bound_beta(alpha: float, lambda1: float, theta_dmin: float, t) -> float:
    """Upper bound ``alpha * exp(lambda_1 t / theta_min)`` on the adoption fraction."""
    if theta_dmin <= 0:
        raise ValueError(
            "bound needs theta(d_min) > 0; otherwise minimum-degree nodes adopt unconditionally"
        )
    return alpha * np.exp(lambda1 * np.asarray(t, dtype=np.float64) / theta_dmin)


def bound_beta_regular(alpha: float, delta: int, theta: float, t):
    """``(alpha / Delta) * exp(Delta t / theta)`` for ``Delta``-regular graphs.

    Caveat: at ``t = 0`` this gives ``alpha / Delta``, below the initial
    adoption fraction ``alpha``, so it cannot hold as an upper bound for
    small ``t``. Provided for evaluation only; use :func:`bound_beta`.
    """
    if theta <= 0:
        raise ValueError("theta must be positive")
    return alpha / delta * np.exp(delta * np.asarray(t, dtype=np.float64) / theta)

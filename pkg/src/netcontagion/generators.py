"""Seeded random graph generators.

Every generator takes an integer seed (or an existing ``numpy`` Generator)
and is a pure function of its arguments.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import Graph
from .theory import DegreeDistribution


class GenerationError(RuntimeError):
    """Raised when a generator cannot produce a graph within its budget."""


def make_rng(seed, *stream: int) -> np.random.Generator:
    """Generator for replication ``stream`` under master ``seed``.

    ``make_rng(s, r)`` gives independent, reproducible streams for
    different ``r``. A ``Generator`` passed as ``seed`` is returned as is.
    """
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, stream)]))


@dataclass(frozen=True)
class DegreeSequence:
    degrees: np.ndarray
    parity_repaired: bool = False

    def __post_init__(self):
        d = np.asarray(self.degrees, dtype=np.int64)
        if d.ndim != 1:
            raise ValueError("degree sequence must be one-dimensional")
        if d.size and d.min() < 0:
            raise ValueError("degrees must be nonnegative")
        if d.sum() % 2:
            raise ValueError(f"degree sum {d.sum()} is odd; half-edges cannot be paired")
        if d.size and d.max() >= d.size:
            raise ValueError(f"max degree {d.max()} must be below n={d.size}")
        object.__setattr__(self, "degrees", d)

    def __len__(self):
        return len(self.degrees)


def _decode_pairs(k: np.ndarray):
    # k enumerates pairs (i, j), i < j, as k = j(j-1)/2 + i.
    j = ((1 + np.sqrt(1 + 8 * k.astype(np.float64))) // 2).astype(np.int64)
    j -= (j * (j - 1) // 2) > k
    j += ((j + 1) * j // 2) <= k
    i = k - j * (j - 1) // 2
    return i, j


def gen_erdos_renyi(n: int, p: float, seed) -> Graph:
    """G(n, p): draw the edge count from Binomial(n(n-1)/2, p), then a uniform edge subset."""
    if not 0 <= p <= 1:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    rng = make_rng(seed)
    total = n * (n - 1) // 2
    m = int(rng.binomial(total, p)) if total else 0
    if m == 0:
        return Graph.from_edges(n, [])
    k = np.sort(rng.choice(total, size=m, replace=False))
    i, j = _decode_pairs(k)
    return Graph._from_unique_pairs(n, i, j)


def _pair_stubs(degrees: np.ndarray, rng: np.random.Generator):
    stubs = np.repeat(np.arange(len(degrees)), degrees)
    rng.shuffle(stubs)
    a, b = stubs[0::2], stubs[1::2]
    return np.minimum(a, b), np.maximum(a, b)


def gen_random_regular(n: int, delta: int, seed, max_attempts: int = 1000) -> Graph:
    """Uniform random ``delta``-regular simple graph.

    Pairs the ``n * delta`` half-edges uniformly and rejects the whole
    pairing on any self-loop or repeated edge, which leaves the uniform law
    on simple regular graphs. The acceptance rate decays like
    ``exp(-(delta**2 - 1) / 4)``, so this is meant for small ``delta``.
    """
    if (n * delta) % 2:
        raise ValueError(f"n*delta = {n * delta} is odd")
    if not 0 <= delta < n:
        raise ValueError(f"need 0 <= delta < n, got delta={delta}, n={n}")
    rng = make_rng(seed)
    degrees = np.full(n, delta, dtype=np.int64)
    for _ in range(max_attempts):
        g = _simple_pairing(degrees, rng)
        if g is not None:
            return g
    raise GenerationError(f"no simple {delta}-regular pairing in {max_attempts} attempts")


def _simple_pairing(degrees, rng):
    lo, hi = _pair_stubs(degrees, rng)
    if np.any(lo == hi):
        return None
    key = lo * len(degrees) + hi
    if len(np.unique(key)) != len(key):
        return None
    return Graph._from_unique_pairs(len(degrees), lo, hi)


def gen_configuration(degrees, seed, erase: bool = True, max_attempts: int = 1000) -> Graph:
    """Configuration model on a prescribed degree sequence.

    With ``erase=True`` (default) self-loops are dropped and parallel edges
    merged, so realised degrees can fall short of the request; compare
    ``g.degrees``. With ``erase=False`` defective pairings are rejected.
    """
    if not isinstance(degrees, DegreeSequence):
        degrees = DegreeSequence(np.asarray(degrees))
    d = degrees.degrees
    rng = make_rng(seed)
    if not erase:
        for _ in range(max_attempts):
            g = _simple_pairing(d, rng)
            if g is not None:
                return g
        raise GenerationError(f"no simple pairing in {max_attempts} attempts")
    lo, hi = _pair_stubs(d, rng)
    keep = lo != hi
    key = np.unique(lo[keep] * len(d) + hi[keep])
    return Graph._from_unique_pairs(len(d), key // len(d), key % len(d))


def sample_degree_sequence(dist: DegreeDistribution, n: int, seed) -> DegreeSequence:
    """``n`` i.i.d. degrees from ``dist``; an odd total is fixed by +1 on a random node."""
    rng = make_rng(seed)
    d = rng.choice(len(dist.pmf), size=n, p=dist.pmf).astype(np.int64)
    repaired = bool(d.sum() % 2)
    if repaired:
        d[rng.integers(n)] += 1
    return DegreeSequence(d, parity_repaired=repaired)

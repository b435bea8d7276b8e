"""Immutable undirected simple graphs stored in CSR form."""

from __future__ import annotations

import warnings
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np
import scipy.sparse as sp


class GraphFormatError(ValueError):
    """Raised when a graph file or edge list is malformed."""


class ConvergenceError(RuntimeError):
    """Raised when an iterative solver exhausts its iteration budget."""


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected simple graph on nodes ``0..n-1``.

    Neighbours of node ``i`` are ``indices[indptr[i]:indptr[i+1]]``, sorted
    ascending. Build instances with :meth:`from_edges`; the constructor
    does not validate.
    """

    n: int
    indptr: np.ndarray
    indices: np.ndarray

    @classmethod
    def from_edges(cls, n: int, edges) -> "Graph":
        """Build a graph from an iterable or ``(m, 2)`` array of edges.

        Each undirected edge must appear once. Self-loops and duplicates
        raise :class:`GraphFormatError`.
        """
        if n < 0:
            raise GraphFormatError(f"node count must be nonnegative, got {n}")
        e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if e.size and (e.min() < 0 or e.max() >= n):
            raise GraphFormatError(f"edge endpoint out of range 0..{n - 1}")
        if np.any(e[:, 0] == e[:, 1]):
            k = int(np.flatnonzero(e[:, 0] == e[:, 1])[0])
            raise GraphFormatError(f"self-loop at edge {k}: {tuple(e[k])}")
        lo = np.minimum(e[:, 0], e[:, 1])
        hi = np.maximum(e[:, 0], e[:, 1])
        key = lo * max(n, 1) + hi
        uniq, first, counts = np.unique(key, return_index=True, return_counts=True)
        if np.any(counts > 1):
            dup = int(uniq[counts > 1][0])
            raise GraphFormatError(f"duplicate edge {(dup // n, dup % n)}")
        return cls._from_unique_pairs(n, lo, hi)

    @classmethod
    def _from_unique_pairs(cls, n: int, lo: np.ndarray, hi: np.ndarray) -> "Graph":
        src = np.concatenate([lo, hi])
        dst = np.concatenate([hi, lo])
        order = np.lexsort((dst, src))
        src, dst = src[order], dst[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
        indptr.flags.writeable = False
        dst = dst.astype(np.int64)
        dst.flags.writeable = False
        return cls(n, indptr, dst)

    @property
    def m(self) -> int:
        return len(self.indices) // 2

    @cached_property
    def degrees(self) -> np.ndarray:
        d = np.diff(self.indptr)
        d.flags.writeable = False
        return d

    @cached_property
    def adjacency(self) -> sp.csr_matrix:
        """Sparse 0/1 adjacency matrix (int64)."""
        data = np.ones(len(self.indices), dtype=np.int64)
        return sp.csr_matrix((data, self.indices, self.indptr), shape=(self.n, self.n))

    @cached_property
    def edge_array(self) -> np.ndarray:
        """``(m, 2)`` array of edges with ``u < v``, sorted."""
        src = np.repeat(np.arange(self.n), self.degrees)
        keep = src < self.indices
        return np.column_stack([src[keep], self.indices[keep]])

    def neighbors(self, i: int) -> np.ndarray:
        self._check_node(i)
        return self.indices[self.indptr[i] : self.indptr[i + 1]]

    def _check_node(self, i: int) -> None:
        if not 0 <= i < self.n:
            raise IndexError(f"node {i} out of range 0..{self.n - 1}")

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"


def degree(g: Graph, i: int) -> int:
    g._check_node(i)
    return int(g.indptr[i + 1] - g.indptr[i])


def min_degree(g: Graph) -> int:
    if g.n == 0:
        raise ValueError("min_degree of an empty graph")
    return int(g.degrees.min())


def is_connected(g: Graph) -> bool:
    if g.n == 0:
        raise ValueError("connectivity of an empty graph is undefined")
    return len(neighborhood(g, 0, g.n)) == g.n


def neighborhood(g: Graph, i: int, d: int) -> frozenset[int]:
    """Nodes within shortest-path distance ``d`` of ``i``."""
    g._check_node(i)
    if d < 0:
        raise ValueError("radius must be nonnegative")
    dist = {i: 0}
    queue = deque([i])
    while queue:
        v = queue.popleft()
        if dist[v] == d:
            continue
        for w in g.indices[g.indptr[v] : g.indptr[v + 1]]:
            w = int(w)
            if w not in dist:
                dist[w] = dist[v] + 1
                queue.append(w)
    return frozenset(dist)


def is_locally_tree(g: Graph, i: int, d: int) -> bool:
    """True iff the subgraph induced by the radius-``d`` ball around ``i`` is acyclic."""
    ball = neighborhood(g, i, d)
    # The ball is connected, so it is a tree iff it has |ball| - 1 edges.
    inner = 0
    for v in ball:
        for w in g.indices[g.indptr[v] : g.indptr[v + 1]]:
            if int(w) in ball:
                inner += 1
    return inner // 2 == len(ball) - 1


def spectral_radius(g: Graph, tol: float = 1e-9, max_iter: int = 10_000) -> float:
    """Largest adjacency eigenvalue by power iteration.

    Iterates with the shifted operator ``A + I`` from the all-ones vector, so
    bipartite graphs (where ``-lambda_1`` is also an eigenvalue) still
    converge. Stops when successive Rayleigh quotients differ by less than
    ``tol``.
    """
    if g.n == 0:
        raise ValueError("spectral radius of an empty graph")
    if g.m == 0:
        return 0.0
    if not is_connected(g):
        warnings.warn(
            "graph is disconnected; estimate is the largest component eigenvalue",
            RuntimeWarning,
            stacklevel=2,
        )
    a = g.adjacency.astype(np.float64)
    x = np.ones(g.n) / np.sqrt(g.n)
    ax = a @ x
    lam = float(x @ ax)
    for _ in range(max_iter):
        y = ax + x
        x = y / np.linalg.norm(y)
        ax = a @ x
        new = float(x @ ax)
        if abs(new - lam) < tol:
            return new
        lam = new
    raise ConvergenceError(f"power iteration did not converge in {max_iter} iterations")


def read_graph(path) -> Graph:
    """Read the ``n m`` header + ``u v`` edge-line text format."""
    lines = Path(path).read_text().splitlines()
    rows = [(k + 1, ln.split()) for k, ln in enumerate(lines) if ln.strip()]
    if not rows:
        raise GraphFormatError(f"{path}: empty file")
    lineno, head = rows[0]
    try:
        n, m = (int(v) for v in head)
    except ValueError:
        raise GraphFormatError(f"{path}:{lineno}: expected header 'n m'") from None
    body = rows[1:]
    if len(body) != m:
        raise GraphFormatError(f"{path}: header declares {m} edges, found {len(body)}")
    seen: dict[tuple[int, int], int] = {}
    edges = []
    for lineno, parts in body:
        try:
            u, v = (int(p) for p in parts)
        except ValueError:
            raise GraphFormatError(f"{path}:{lineno}: expected 'u v'") from None
        if not (0 <= u < n and 0 <= v < n):
            raise GraphFormatError(f"{path}:{lineno}: endpoint out of range 0..{n - 1}")
        if u == v:
            raise GraphFormatError(f"{path}:{lineno}: self-loop {u} {v}")
        key = (min(u, v), max(u, v))
        if key in seen:
            raise GraphFormatError(
                f"{path}:{lineno}: duplicate edge {u} {v} (first at line {seen[key]})"
            )
        seen[key] = lineno
        edges.append(key)
    return Graph.from_edges(n, edges)


def write_graph(g: Graph, path) -> None:
    lines = [f"{g.n} {g.m}"]
    lines.extend(f"{u} {v}" for u, v in g.edge_array)
    Path(path).write_text("\n".join(lines) + "\n")

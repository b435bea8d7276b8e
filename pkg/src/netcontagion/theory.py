"""Tree recursions, fixed points and degree laws for the mean-field limit.

On the ``Delta``-regular tree a child subtree has infected its parent by
step ``t`` with probability ``h(t)``, where ``h(0) = alpha`` and

    h(t+1) = 1 - (1 - alpha) * g(Delta - 1, theta, h(t)),
    g(k, s, x) = P(Binomial(k, x) <= s).

The root plays B with probability ``h_tilde(t+1) = 1 - (1 - alpha) *
g(Delta, theta, h(t))``. On configuration-model graphs the same recursion
runs over the offspring law ``P*`` with degree-dependent thresholds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .graph import ConvergenceError


@dataclass(frozen=True, eq=False)
class DegreeDistribution:
    """Finite-support degree law; ``pmf[j]`` is ``P(D = j)``."""

    pmf: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.pmf, dtype=np.float64)
        if p.ndim != 1 or p.size == 0:
            raise ValueError("pmf must be a non-empty 1-d array")
        if np.any(p < 0):
            raise ValueError("probabilities must be nonnegative")
        if abs(p.sum() - 1.0) > 1e-9:
            raise ValueError(f"probabilities sum to {p.sum()!r}, not 1")
        # Trailing zeros carry no information; drop them so equal laws compare equal.
        nz = np.flatnonzero(p)
        p = p[: nz[-1] + 1] if nz.size else p[:1]
        object.__setattr__(self, "pmf", p)

    @classmethod
    def point_mass(cls, d: int) -> "DegreeDistribution":
        p = np.zeros(d + 1)
        p[d] = 1.0
        return cls(p)

    @classmethod
    def poisson(cls, lam: float, cap: int | None = None) -> "DegreeDistribution":
        """Poisson(``lam``) truncated at ``cap`` and renormalised.

        The default cap ``lam + 15 sqrt(lam) + 25`` leaves a tail mass far
        below 1e-12 for every ``lam``.
        """
        cap = int(math.ceil(lam + 15 * math.sqrt(max(lam, 0.0)) + 25)) if cap is None else cap
        if lam <= 0:
            return cls.point_mass(0)
        j = np.arange(cap + 1)
        logp = j * math.log(lam) - lam - np.array([math.lgamma(k + 1) for k in j])
        p = np.exp(logp)
        return cls(p / p.sum())

    @classmethod
    def from_mapping(cls, probs: dict[int, float]) -> "DegreeDistribution":
        p = np.zeros(max(probs) + 1)
        for j, v in probs.items():
            if j < 0:
                raise ValueError(f"negative degree {j}")
            p[j] += v
        return cls(p)

    @classmethod
    def read(cls, path) -> "DegreeDistribution":
        """Read lines ``j p_j``; probabilities must sum to 1 within 1e-9."""
        probs: dict[int, float] = {}
        for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            try:
                j, v = line.split()
                probs[int(j)] = probs.get(int(j), 0.0) + float(v)
            except ValueError:
                raise ValueError(f"{path}:{lineno}: expected 'j p_j'") from None
        if not probs:
            raise ValueError(f"{path}: no entries")
        return cls.from_mapping(probs)

    def as_dict(self) -> dict[int, float]:
        return {int(j): float(v) for j, v in enumerate(self.pmf) if v > 0}

    @property
    def mean(self) -> float:
        return float(np.arange(len(self.pmf)) @ self.pmf)

    def total_variation(self, other: "DegreeDistribution") -> float:
        k = max(len(self.pmf), len(other.pmf))
        a = np.pad(self.pmf, (0, k - len(self.pmf)))
        b = np.pad(other.pmf, (0, k - len(other.pmf)))
        return 0.5 * float(np.abs(a - b).sum())


def binom_cdf(k: int, s: float, x):
    """``P(Binomial(k, x) <= s)``; accepts a scalar or array ``x``.

    Terms are accumulated upward from ``i = 0`` with the ratio update
    ``t_{i+1} = t_i * (k - i) / (i + 1) * x / (1 - x)``, carried in log
    space so ``(1 - x)**k`` cannot underflow for large ``k``.
    """
    if np.ndim(x) == 0:
        return _binom_cdf_scalar(k, s, float(x))
    x = np.asarray(x, dtype=np.float64)
    if np.any((x < 0) | (x > 1)):
        raise ValueError("x must lie in [0, 1]")
    if s < 0:
        out = np.zeros_like(x)
    elif s >= k:
        out = np.ones_like(x)
    else:
        top = math.floor(s)
        with np.errstate(divide="ignore", invalid="ignore"):
            log_ratio = np.log(x) - np.log1p(-x)
            log_t = k * np.log1p(-x)
            total = np.exp(log_t)
            for i in range(top):
                log_t = log_t + math.log((k - i) / (i + 1)) + log_ratio
                total = total + np.exp(log_t)
        # x == 1 puts all mass on k > s; x == 0 puts it on 0 <= s.
        out = np.where(x == 1.0, 0.0, np.where(x == 0.0, 1.0, np.minimum(total, 1.0)))
    return out


def _binom_cdf_scalar(k: int, s: float, x: float) -> float:
    if not 0.0 <= x <= 1.0:
        raise ValueError("x must lie in [0, 1]")
    if s < 0:
        return 0.0
    if s >= k:
        return 1.0
    if x == 0.0:
        return 1.0
    if x == 1.0:
        return 0.0
    log_ratio = math.log(x) - math.log1p(-x)
    log_t = k * math.log1p(-x)
    total = math.exp(log_t)
    for i in range(math.floor(s)):
        log_t += math.log((k - i) / (i + 1)) + log_ratio
        total += math.exp(log_t)
    return min(total, 1.0)


def h_step(delta: int, theta: float, alpha: float, h):
    return 1.0 - (1.0 - alpha) * binom_cdf(delta - 1, theta, h)


def h_tilde_step(delta: int, theta: float, alpha: float, h):
    return 1.0 - (1.0 - alpha) * binom_cdf(delta, theta, h)


@dataclass(frozen=True, eq=False)
class RecursionTrace:
    """``h[t]`` for ``t = 0..T`` and ``h_tilde[t]`` likewise.

    ``h_tilde[0]`` is ``alpha``: at time 0 only the seeds play B.
    """

    h: np.ndarray
    h_tilde: np.ndarray
    delta: int | None
    theta: float | None
    alpha: float


def recursion_trace(delta: int, theta: float, alpha: float, T: int) -> RecursionTrace:
    h = np.empty(T + 1)
    ht = np.empty(T + 1)
    h[0] = ht[0] = alpha
    for t in range(T):
        h[t + 1] = h_step(delta, theta, alpha, h[t])
        ht[t + 1] = h_tilde_step(delta, theta, alpha, h[t])
    return RecursionTrace(h, ht, delta, theta, alpha)


@dataclass(frozen=True)
class Root:
    value: float
    double: bool = False


@dataclass(frozen=True, eq=False)
class FixedPointReport:
    h_star: float
    solutions: list[Root]
    h_tilde_limit: float
    regime: str
    iterations: int = 0

    @property
    def roots(self) -> list[float]:
        return [r.value for r in self.solutions]


def smallest_fixed_point(
    phi: Callable, tol: float = 1e-12, max_iter: int = 20_000, grid: int = 100_000
) -> tuple[float, int]:
    """Smallest fixed point of a nondecreasing map ``phi: [0,1] -> [0,1]``.

    Iterates from 0; the iterates increase to the smallest fixed point. For
    a linearly convergent tail the remaining error is about
    ``step * rho / (1 - rho)`` with ``rho`` the observed step ratio, and we
    stop once that and the step itself are below ``tol``.

    Close to a saddle-node the iteration crawls. After ``max_iter`` steps the
    current iterate is used as a lower bound and the first nonpositive value
    of ``phi(h) - h`` above it is bracketed on a ``grid`` and bisected;
    ``phi`` must then accept arrays. Returns ``(h_star, iterations)``.
    """
    h, last = 0.0, None
    for k in range(1, max_iter + 1):
        nxt = float(phi(h))
        diff = nxt - h
        h = nxt
        if diff < tol:
            rho = diff / last if last else 0.0
            if diff <= 0 or (rho < 1 and diff * rho / (1 - rho) < tol):
                return min(h, 1.0), k
        last = diff
    xs = np.linspace(h, 1.0, grid + 1)
    f = phi(xs) - xs
    hits = np.flatnonzero(f <= tol)
    if not hits.size:
        raise ConvergenceError("fixed-point iteration stalled with no root above the iterate")
    j = int(hits[0])
    if j == 0 or f[j] > 0:
        return float(xs[j]), max_iter
    return _bisect(lambda v: float(phi(v)) - v, xs[j - 1], xs[j], tol), max_iter


def scan_roots(
    phi: Callable, tol: float = 1e-12, grid: int = 10_000
) -> list[Root]:
    """All roots of ``phi(h) - h`` on [0, 1] from a sign-change scan plus bisection.

    ``phi`` must accept arrays. A root where ``phi - h`` touches zero
    without crossing (slope of ``phi`` equal to 1) is flagged ``double``;
    such roots are only caught when they land within ``tol`` of a grid point.
    """
    xs = np.linspace(0.0, 1.0, grid + 1)
    f = phi(xs) - xs
    f[np.abs(f) <= tol] = 0.0
    found: list[float] = []
    for k in range(grid + 1):
        if f[k] == 0.0:
            found.append(float(xs[k]))
        elif k < grid and f[k] * f[k + 1] < 0:
            found.append(_bisect(lambda h: float(phi(h)) - h, xs[k], xs[k + 1], tol))
    roots = []
    for v in sorted(found):
        if roots and v - roots[-1].value <= 10 * tol:
            continue
        eps = 1e-7
        a, b = max(v - eps, 0.0), min(v + eps, 1.0)
        slope = (float(phi(b)) - float(phi(a))) / (b - a)
        roots.append(Root(v, double=abs(slope - 1.0) < 1e-4))
    return roots


def _bisect(fn, lo, hi, tol):
    flo = fn(lo)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fm = fn(mid)
        if fm == 0.0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _report(phi, phi_root, tol, grid, scan) -> FixedPointReport:
    h_star, its = smallest_fixed_point(phi, tol)
    roots = scan_roots(phi, tol=tol, grid=grid) if scan else []
    if scan and not any(abs(r.value - h_star) <= max(1e-6, 10 * tol) for r in roots):
        # A root that touches zero between grid points; the iteration still finds it.
        roots = sorted(roots + [Root(h_star, double=True)], key=lambda r: r.value)
    if not scan:
        regime = "unique" if h_star >= 1 - tol else "unknown"
    elif len(roots) == 1:
        regime = "unique"
    elif len(roots) == 3:
        regime = "triple"
    else:
        regime = "multiple"
    return FixedPointReport(h_star, roots, float(phi_root(h_star)), regime, its)


def fixed_point(
    delta: int,
    theta: float,
    alpha: float,
    tol: float = 1e-12,
    grid: int = 10_000,
    scan: bool = True,
) -> FixedPointReport:
    """Smallest solution of ``h = 1 - (1 - alpha) g(Delta - 1, theta, h)`` and the full root list."""
    return _report(
        lambda h: h_step(delta, theta, alpha, h),
        lambda h: h_tilde_step(delta, theta, alpha, h),
        tol,
        grid,
        scan,
    )


@dataclass(frozen=True)
class AlphaCrit:
    alpha: float
    supported: bool
    trace: tuple[tuple[float, bool], ...] = field(default=(), repr=False)


def alpha_crit(delta: int, theta: float, tol: float = 1e-6, fp_tol: float = 1e-12) -> AlphaCrit:
    """Smallest seed fraction for which the smallest fixed point is 1.

    Bisection on ``alpha`` over the predicate ``h*(alpha) >= 1 - tol``. The
    existence result only covers ``0 <= theta < delta - 2``; outside that
    range the value is still computed but ``supported`` is False.
    """
    supported = 0 <= theta < delta - 2

    def full(a):
        return smallest_fixed_point(lambda h: h_step(delta, theta, a, h), fp_tol)[0] >= 1 - tol

    trace = []
    coarse = [(a, full(a)) for a in np.linspace(0.0, 1.0, 11)]
    trace.extend(coarse)
    flags = [v for _, v in coarse]
    if any(a and not b for a, b in zip(flags, flags[1:])):
        raise RuntimeError(f"predicate not monotone in alpha on coarse grid: {coarse}")
    if flags[0]:
        return AlphaCrit(0.0, supported, tuple(trace))
    k = flags.index(True)
    lo, hi = coarse[k - 1][0], coarse[k][0]
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        v = full(mid)
        trace.append((mid, v))
        if v:
            hi = mid
        else:
            lo = mid
    _check_trace(trace)
    return AlphaCrit(hi, supported, tuple(trace))


def _check_trace(trace):
    true_min = min((a for a, v in trace if v), default=math.inf)
    false_max = max((a for a, v in trace if not v), default=-math.inf)
    if false_max >= true_min:
        raise RuntimeError("non-monotone predicate detected on the bisection trace")


def size_biased(P: DegreeDistribution) -> DegreeDistribution:
    """Offspring law ``P*(j - 1) = j P(j) / E[D]``."""
    mean = P.mean
    if mean <= 0:
        raise ValueError("size-biasing needs a distribution with positive mean")
    j = np.arange(len(P.pmf))
    return DegreeDistribution((j * P.pmf / mean)[1:])


def empirical_offspring(degrees) -> DegreeDistribution:
    """``p_j = sum_k 1(D_k = j + 1) D_k / L_n`` for an observed degree sequence."""
    d = np.asarray(getattr(degrees, "degrees", degrees), dtype=np.int64)
    total = int(d.sum())
    if total <= 0:
        raise ValueError("degree sequence has no half-edges")
    mass = np.bincount(d, weights=d.astype(np.float64)) / total
    return DegreeDistribution(mass[1:])


def _stay_counts(params, degrees):
    return [params.stay_count(int(d)) for d in degrees]


def general_maps(P: DegreeDistribution, params, alpha: float):
    """The offspring map ``phi`` and root map for degree law ``P`` under ``params``."""
    star = size_biased(P)
    js = np.arange(len(star.pmf))
    # Offspring of degree j + 1 have j children and threshold theta(j + 1).
    off = [(w, int(j), s) for w, j, s in zip(star.pmf, js, _stay_counts(params, js + 1)) if w > 0]
    jr = np.arange(len(P.pmf))
    root = [(w, int(j), s) for w, j, s in zip(P.pmf, jr, _stay_counts(params, jr)) if w > 0]

    def phi(h):
        return 1.0 - (1.0 - alpha) * sum(w * binom_cdf(j, s, h) for w, j, s in off)

    def phi_root(h):
        return 1.0 - (1.0 - alpha) * sum(w * binom_cdf(j, s, h) for w, j, s in root)

    return phi, phi_root


def fixed_point_general(
    P: DegreeDistribution,
    params,
    alpha: float,
    tol: float = 1e-12,
    grid: int = 10_000,
    scan: bool = False,
) -> FixedPointReport:
    """Configuration-model fixed point ``h*`` and limiting adoption ``h_tilde``."""
    phi, phi_root = general_maps(P, params, alpha)
    return _report(phi, phi_root, tol, grid, scan)


def general_recursion_trace(P: DegreeDistribution, params, alpha: float, T: int) -> RecursionTrace:
    phi, phi_root = general_maps(P, params, alpha)
    h = np.empty(T + 1)
    ht = np.empty(T + 1)
    h[0] = ht[0] = alpha
    for t in range(T):
        h[t + 1] = phi(h[t])
        ht[t + 1] = phi_root(h[t])
    return RecursionTrace(h, ht, None, None, alpha)

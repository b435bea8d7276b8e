"""Replication aggregation, theory-vs-simulation comparison and CSV output."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .discrete import run, seed_bernoulli
from .generators import gen_random_regular, make_rng
from .payoff import PayoffParams, PayoffThreshold
from .theory import recursion_trace

TRAJECTORY_HEADER = ("t", "beta_mean", "beta_stderr", "gamma_mean", "delta_mean", "reps")


def fmt(v) -> str:
    """CSV cell: strings and integers verbatim, floats with 17 significant digits, None as ``NA``."""
    if v is None:
        return "NA"
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return format(float(v), ".17g")


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def mean_stderr(samples: np.ndarray):
    """Column means and standard errors of an ``(R, K)`` array (stderr is NaN for R < 2)."""
    samples = np.asarray(samples, dtype=np.float64)
    mean = samples.mean(axis=0)
    if len(samples) < 2:
        return mean, np.full_like(mean, np.nan)
    return mean, samples.std(axis=0, ddof=1) / math.sqrt(len(samples))


def trajectory_rows(t, beta, gamma, delta):
    """Rows of the trajectory CSV from ``(R, K)`` arrays sampled at times ``t``."""
    bm, bse = mean_stderr(beta)
    gm, _ = mean_stderr(gamma)
    dm, _ = mean_stderr(delta)
    reps = len(beta)
    return [(t[k], bm[k], bse[k], gm[k], dm[k], reps) for k in range(len(t))]


@dataclass(frozen=True)
class ComparisonRow:
    t: int
    theory: float
    mean: float
    stderr: float
    z: float


@dataclass(frozen=True, eq=False)
class ComparisonReport:
    rows: list[ComparisonRow]
    z_threshold: float
    abs_tol: float | None = None

    @property
    def max_abs_z(self) -> float:
        return max(abs(r.z) for r in self.rows)

    @property
    def max_abs_diff(self) -> float:
        return max(abs(r.mean - r.theory) for r in self.rows)

    @property
    def passed(self) -> bool:
        ok = self.max_abs_z <= self.z_threshold
        if self.abs_tol is not None:
            ok = ok and self.max_abs_diff <= self.abs_tol
        return ok

    HEADER = ("t", "theory", "mean", "stderr", "z")

    def csv(self) -> str:
        return csv_text(self.HEADER, [(r.t, r.theory, r.mean, r.stderr, r.z) for r in self.rows])


def z_score(mean: float, theory: float, stderr: float) -> float:
    diff = mean - theory
    if stderr > 0:
        return diff / stderr
    return 0.0 if diff == 0 else math.copysign(math.inf, diff)


def compare(
    delta: int,
    n: int,
    params: PayoffParams,
    alpha: float,
    T: int,
    replications: int,
    seed: int,
    z_threshold: float = 3.0,
    abs_tol: float | None = None,
    on_run: Callable | None = None,
) -> ComparisonReport:
    """Mean adoption fraction on fresh random regular graphs against ``h_tilde(t)``.

    Replication ``r`` draws its graph and seeds from stream ``(seed, r)``.
    ``on_run(graph, chi, trajectory)`` is called after every replication.
    """
    if replications < 2:
        raise ValueError("need at least 2 replications for standard errors")
    rule = PayoffThreshold(params)
    betas = np.empty((replications, T + 1))
    for r in range(replications):
        rng = make_rng(seed, r)
        g = gen_random_regular(n, delta, rng)
        chi = seed_bernoulli(n, alpha, rng)
        traj = run(g, rule, chi, T)
        betas[r] = traj.padded(T + 1)
        if on_run is not None:
            on_run(g, chi, traj)
    theory = recursion_trace(delta, params.stay_count(delta), alpha, T).h_tilde
    mean, se = mean_stderr(betas)
    rows = [
        ComparisonRow(
            t, float(theory[t]), float(mean[t]), float(se[t]), float(z_score(mean[t], theory[t], se[t]))
        )
        for t in range(T + 1)
    ]
    return ComparisonReport(rows, z_threshold, abs_tol)

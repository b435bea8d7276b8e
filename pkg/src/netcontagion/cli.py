"""Command-line entry point.

Every subcommand reads its options from, in increasing precedence: built-in
defaults, the ``[<subcommand>]`` section of an INI file given by
``--config``, and command-line flags. ``--dump-config`` prints the merged
configuration and exits.

Exit codes: 0 success, 2 configuration error, 3 model/runtime error,
4 failed comparison verdict.
"""

from __future__ import annotations

import argparse
import configparser
import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import __version__
from .continuous import beta_grid, bound_beta, delta_grid, simulate_ctmc_batch
from .cost import CostParams, SweepContext, SweepRow, cost, sweep
from .discrete import run, seed_bernoulli
from .generators import (
    GenerationError,
    gen_configuration,
    gen_erdos_renyi,
    gen_random_regular,
    make_rng,
    sample_degree_sequence,
)
from .graph import ConvergenceError, GraphFormatError, min_degree, read_graph, spectral_radius, write_graph
from .harness import TRAJECTORY_HEADER, compare, csv_text, trajectory_rows
from .payoff import PayoffParams, PayoffThreshold, parse_number, threshold
from .theory import DegreeDistribution, alpha_crit, fixed_point, fixed_point_general, recursion_trace

EXIT_CONFIG, EXIT_RUNTIME, EXIT_VERDICT = 2, 3, 4


class ConfigError(Exception):
    pass


# --- option parsing -------------------------------------------------------

def _int(s):
    return int(s)


def _float(s):
    return float(s)


def _floats(s):
    return [float(v) for v in str(s).replace(",", " ").split()]


def _numbers(s):
    return [parse_number(v) for v in str(s).replace(",", " ").split()]


def _number(s):
    return parse_number(str(s))


def _path(s):
    return str(s)


@dataclass(frozen=True)
class Opt:
    name: str
    parse: Callable[[str], Any]
    default: Any = None
    help: str = ""
    choices: tuple = ()


GRAPH_OPTS = [
    Opt("graph", _path, help="graph file (n m header + edge lines)"),
    Opt("model", str, help="generator when no --graph: er | regular | config", choices=("er", "regular", "config")),
    Opt("n", _int, help="node count for generated graphs"),
    Opt("p", _float, help="edge probability (er)"),
    Opt("delta", _int, help="degree (regular)"),
    Opt("dist", _path, help="degree distribution file, lines 'j p_j' (config)"),
]
PAYOFF_OPTS = [
    Opt("qa", _number, "1", "payoff per A-A edge"),
    Opt("qb", _number, "1", "payoff per B-B edge"),
    Opt("u", _number, "0", "per-B-edge marketing increment"),
    Opt("r", _number, "0", "adoption bonus"),
]
RUN_OPTS = [
    Opt("reps", _int, "1", "replications"),
    Opt("seed", _int, "0", "master seed"),
    Opt("out", _path, help="output CSV (default: stdout)"),
]

COMMANDS: dict[str, tuple[str, list[Opt], tuple[str, ...]]] = {
    "gen": (
        "generate a random graph file",
        GRAPH_OPTS[1:] + [Opt("seed", _int, "0", "seed"), Opt("out", _path, help="output graph file")],
        ("model", "n", "out"),
    ),
    "sim-discrete": (
        "synchronous best-response simulation",
        GRAPH_OPTS + PAYOFF_OPTS + [
            Opt("alpha", _float, help="seed probability"),
            Opt("t_max", _int, "1000", "step cap"),
        ] + RUN_OPTS,
        ("alpha",),
    ),
    "sim-continuous": (
        "continuous-time (rate-1 clock) simulation",
        GRAPH_OPTS + PAYOFF_OPTS + [
            Opt("alpha", _float, help="seed probability"),
            Opt("t_end", _float, help="time horizon"),
            Opt("grid_points", _int, "100", "number of output times on [0, t_end]"),
        ] + RUN_OPTS,
        ("alpha", "t_end"),
    ),
    "theory": (
        "tree recursion h(t), h_tilde(t) on the regular tree",
        [Opt("delta", _int, help="degree"), Opt("theta", _float, help="threshold (default: from payoffs)")]
        + PAYOFF_OPTS
        + [Opt("alpha", _float, help="seed probability"), Opt("T", _int, help="steps"), Opt("out", _path)],
        ("delta", "alpha", "T"),
    ),
    "fixed-point": (
        "smallest fixed point and solution structure",
        [
            Opt("delta", _int, help="degree (regular tree)"),
            Opt("dist", _path, help="degree distribution file (configuration model)"),
            Opt("theta", _float, help="threshold for --delta (default: from payoffs)"),
        ]
        + PAYOFF_OPTS
        + [
            Opt("alpha", _floats, help="one or more seed probabilities"),
            Opt("tol", _float, "1e-12"),
            Opt("grid", _int, "10000", "root-scan resolution"),
            Opt("out", _path),
        ],
        ("alpha",),
    ),
    "alpha-crit": (
        "critical seed fraction by bisection",
        [Opt("delta", _int, help="degree"), Opt("theta", _float, help="threshold (default: from payoffs)")]
        + PAYOFF_OPTS
        + [Opt("tol", _float, "1e-6")],
        ("delta",),
    ),
    "bound": (
        "exponential upper bound on beta(t)",
        [
            Opt("alpha", _float),
            Opt("graph", _path, help="graph file; supplies lambda_1 and d_min"),
            Opt("lambda1", _float, help="spectral radius (instead of --graph)"),
            Opt("theta_dmin", _float, help="theta(d_min) (default: from payoffs and --graph)"),
        ]
        + PAYOFF_OPTS
        + [Opt("t_end", _float), Opt("grid_points", _int, "20"), Opt("out", _path)],
        ("alpha", "t_end"),
    ),
    "cost": (
        "cost breakdown for every row of a trajectory CSV",
        [
            Opt("trajectory", _path, help="trajectory CSV from sim-discrete/sim-continuous"),
            Opt("c", _float, "1", "cost per seed fraction"),
            Opt("r", _float, "0", "rebate per organic adopter fraction"),
            Opt("u", _float, "0", "subsidy per B-B edge fraction"),
            Opt("out", _path),
        ],
        ("trajectory",),
    ),
    "sweep": (
        "cost sweep over alpha/r/u grids",
        [
            Opt("backend", str, "theory", choices=("theory", "simulation")),
            Opt("alpha", _floats), Opt("r", _numbers, "0"), Opt("u", _numbers, "0"),
            Opt("qa", _number, "1"), Opt("qb", _number, "1"), Opt("c", _float, "1"),
            Opt("horizon", _int, help="steps (default: limit / convergence)"),
            Opt("delta", _int), Opt("dist", _path), Opt("graph", _path),
            Opt("reps", _int, "10"), Opt("seed", _int, "0"), Opt("out", _path),
        ],
        ("alpha",),
    ),
    "compare": (
        "mean simulated beta(t) on random regular graphs vs h_tilde(t)",
        [Opt("delta", _int), Opt("n", _int)]
        + PAYOFF_OPTS
        + [
            Opt("alpha", _float), Opt("T", _int), Opt("reps", _int, "100"), Opt("seed", _int, "0"),
            Opt("z_threshold", _float, "3"), Opt("abs_tol", _float), Opt("out", _path),
        ],
        ("delta", "n", "alpha", "T"),
    ),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="netcontagion", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (help_text, opts, _) in COMMANDS.items():
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--config", help="INI file; options read from the [%s] section" % name)
        sp.add_argument("--dump-config", action="store_true", help="print merged config and exit")
        for o in opts:
            flag = "--" + o.name.replace("_", "-")
            extra = f" (default: {o.default})" if o.default is not None else ""
            sp.add_argument(flag, dest=o.name, default=None, help=o.help + extra, metavar=o.name.upper())
    return parser


def resolve_config(command: str, args: argparse.Namespace, check_required: bool = True) -> dict[str, Any]:
    """Merge defaults, config file and flags; parse and validate every field."""
    _, opts, required = COMMANDS[command]
    raw: dict[str, Any] = {o.name: o.default for o in opts}
    if args.config:
        cp = configparser.ConfigParser()
        cp.optionxform = str
        try:
            with open(args.config) as fh:
                cp.read_file(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config file {args.config}: {exc.strerror}") from None
        except configparser.Error as exc:
            raise ConfigError(f"{args.config}: {exc}") from None
        if cp.has_section(command):
            known = {o.name for o in opts}
            for key, value in cp.items(command):
                key = key.replace("-", "_")
                if key not in known:
                    raise ConfigError(f"{args.config}: [{command}] {key}: unknown option")
                raw[key] = value
    for o in opts:
        v = getattr(args, o.name, None)
        if v is not None:
            raw[o.name] = v
    for name in required if check_required else ():
        if raw.get(name) is None:
            raise ConfigError(f"{command}: missing required option --{name.replace('_', '-')}")
    cfg: dict[str, Any] = {}
    for o in opts:
        v = raw[o.name]
        if v is None:
            cfg[o.name] = None
            continue
        if o.choices and v not in o.choices:
            raise ConfigError(f"[{command}] {o.name}: expected one of {', '.join(o.choices)}, got {v!r}")
        try:
            cfg[o.name] = o.parse(v)
        except (ValueError, ZeroDivisionError):
            raise ConfigError(f"[{command}] {o.name}: cannot parse {v!r}") from None
    cfg["_raw"] = {k: (None if v is None else str(v)) for k, v in raw.items()}
    return cfg


def dump_config(command: str, cfg: dict[str, Any]) -> str:
    lines = [f"[{command}]"]
    for key, value in cfg["_raw"].items():
        lines.append(f"{key} = {value}" if value is not None else f"# {key} =")
    return "\n".join(lines) + "\n"


def _check_prob(command, name, value):
    if value is not None and not 0 <= value <= 1:
        raise ConfigError(f"[{command}] {name}: must lie in [0, 1], got {value}")


def _payoffs(cfg) -> PayoffParams:
    try:
        return PayoffParams(cfg["qa"], cfg["qb"], cfg["u"], cfg["r"])
    except ValueError as exc:
        raise ConfigError(f"payoff parameters: {exc}") from None


# --- graph sources --------------------------------------------------------

def _generator(cfg, command):
    model = cfg.get("model")
    if model is None:
        raise ConfigError(f"{command}: give --graph or --model")
    if cfg.get("n") is None:
        raise ConfigError(f"{command}: missing required option --n for --model {model}")
    n = cfg["n"]
    if model == "er":
        if cfg.get("p") is None:
            raise ConfigError(f"{command}: missing required option --p for --model er")
        _check_prob(command, "p", cfg["p"])
        return lambda rng: gen_erdos_renyi(n, cfg["p"], rng)
    if model == "regular":
        if cfg.get("delta") is None:
            raise ConfigError(f"{command}: missing required option --delta for --model regular")
        return lambda rng: gen_random_regular(n, cfg["delta"], rng)
    if cfg.get("dist") is None:
        raise ConfigError(f"{command}: missing required option --dist for --model config")
    dist = _read_dist(cfg["dist"])
    return lambda rng: gen_configuration(sample_degree_sequence(dist, n, rng), rng)


def _read_dist(path) -> DegreeDistribution:
    try:
        return DegreeDistribution.read(path)
    except OSError as exc:
        raise ConfigError(f"cannot read distribution file {path}: {exc.strerror}") from None


def _load_graph(path):
    try:
        return read_graph(path)
    except OSError as exc:
        raise ConfigError(f"cannot read graph file {path}: {exc.strerror}") from None


# --- commands -------------------------------------------------------------

@dataclass
class Output:
    header: tuple
    rows: list
    table: str | None = None
    seeds: list | None = None
    verdict: bool = True


def cmd_gen(cfg):
    g = _generator(cfg, "gen")(make_rng(cfg["seed"]))
    write_graph(g, cfg["out"])
    return None


def cmd_sim_discrete(cfg):
    _check_prob("sim-discrete", "alpha", cfg["alpha"])
    rule = PayoffThreshold(_payoffs(cfg))
    fixed = _load_graph(cfg["graph"]) if cfg["graph"] else None
    make = None if fixed else _generator(cfg, "sim-discrete")
    trajs = []
    for rep in range(cfg["reps"]):
        rng = make_rng(cfg["seed"], rep)
        g = fixed if fixed is not None else make(rng)
        trajs.append((g, run(g, rule, seed_bernoulli(g.n, cfg["alpha"], rng), cfg["t_max"])))
    length = max(len(tr.beta) for _, tr in trajs)
    stats = {k: np.array([tr.padded(length, k) for _, tr in trajs]) for k in ("beta", "gamma", "delta")}
    rows = trajectory_rows(list(range(length)), stats["beta"], stats["gamma"], stats["delta"])
    return Output(TRAJECTORY_HEADER, rows, seeds=[[cfg["seed"], r] for r in range(cfg["reps"])])


def cmd_sim_continuous(cfg):
    _check_prob("sim-continuous", "alpha", cfg["alpha"])
    params = _payoffs(cfg)
    grid = np.linspace(0.0, cfg["t_end"], cfg["grid_points"])
    fixed = _load_graph(cfg["graph"]) if cfg["graph"] else None
    make = None if fixed else _generator(cfg, "sim-continuous")
    beta, delta = [], []
    for rep in range(cfg["reps"]):
        rng = make_rng(cfg["seed"], rep)
        g = fixed if fixed is not None else make(rng)
        chi = seed_bernoulli(g.n, cfg["alpha"], rng).chi
        times = simulate_ctmc_batch(g, params, chi[None, :], cfg["t_end"], rng)
        beta.append(beta_grid(times, grid)[0])
        delta.append(delta_grid(g, times, grid)[0])
    beta, delta = np.array(beta), np.array(delta)
    gamma = beta - beta[:, :1]
    rows = trajectory_rows(grid, beta, gamma, delta)
    return Output(TRAJECTORY_HEADER, rows, seeds=[[cfg["seed"], r] for r in range(cfg["reps"])])


def _theta(cfg, delta):
    return cfg["theta"] if cfg.get("theta") is not None else _payoffs(cfg).stay_count(delta)


def cmd_theory(cfg):
    _check_prob("theory", "alpha", cfg["alpha"])
    tr = recursion_trace(cfg["delta"], _theta(cfg, cfg["delta"]), cfg["alpha"], cfg["T"])
    rows = [(t, tr.h[t], tr.h_tilde[t]) for t in range(cfg["T"] + 1)]
    return Output(("t", "h", "h_tilde"), rows)


def cmd_fixed_point(cfg):
    for a in cfg["alpha"]:
        _check_prob("fixed-point", "alpha", a)
    if (cfg["delta"] is None) == (cfg["dist"] is None):
        raise ConfigError("fixed-point: give exactly one of --delta or --dist")
    rows, lines = [], []
    for a in cfg["alpha"]:
        if cfg["delta"] is not None:
            rep = fixed_point(cfg["delta"], _theta(cfg, cfg["delta"]), a, cfg["tol"], cfg["grid"])
        else:
            rep = fixed_point_general(_read_dist(cfg["dist"]), _payoffs(cfg), a, cfg["tol"], cfg["grid"], scan=True)
        rows.append((a, rep.h_star, rep.regime))
        roots = ", ".join(f"{r.value:.10g}{' (double)' if r.double else ''}" for r in rep.solutions)
        lines.append(f"alpha={a:<10g} h*={rep.h_star:.12g}  h~={rep.h_tilde_limit:.12g}  {rep.regime:8s} roots: {roots}")
    return Output(("alpha", "h_star", "regime"), rows, table="\n".join(lines))


def cmd_alpha_crit(cfg):
    theta = _theta(cfg, cfg["delta"])
    res = alpha_crit(cfg["delta"], theta, cfg["tol"])
    note = "" if res.supported else "  (outside 0 <= theta < delta - 2: not covered by the existence result)"
    return Output(("delta", "theta", "alpha_crit", "supported"),
                  [(cfg["delta"], float(theta), res.alpha, str(res.supported).lower())],
                  table=f"alpha_crit = {res.alpha:.10g}{note}")


def cmd_bound(cfg):
    _check_prob("bound", "alpha", cfg["alpha"])
    g = _load_graph(cfg["graph"]) if cfg["graph"] else None
    lam = cfg["lambda1"]
    if lam is None:
        if g is None:
            raise ConfigError("bound: give --lambda1 or --graph")
        lam = spectral_radius(g)
    theta = cfg["theta_dmin"]
    if theta is None:
        if g is None:
            raise ConfigError("bound: give --theta-dmin or --graph")
        theta = float(threshold(_payoffs(cfg), min_degree(g)))
    grid = np.linspace(0.0, cfg["t_end"], cfg["grid_points"])
    b = bound_beta(cfg["alpha"], lam, theta, grid)
    return Output(("t", "bound"), list(zip(grid, b)),
                  table=f"lambda_1 = {lam:.12g}, theta(d_min) = {theta:.12g}")


def cmd_cost(cfg):
    import csv

    try:
        with open(cfg["trajectory"]) as fh:
            records = list(csv.DictReader(fh))
    except OSError as exc:
        raise ConfigError(f"cannot read trajectory {cfg['trajectory']}: {exc.strerror}") from None
    if not records or set(TRAJECTORY_HEADER) - set(records[0]):
        raise ConfigError(f"{cfg['trajectory']}: not a trajectory CSV (header {', '.join(TRAJECTORY_HEADER)})")
    cp = CostParams(cfg["c"], cfg["r"], cfg["u"])
    alpha = float(records[0]["beta_mean"])
    rows = []
    for rec in records:
        gamma, delta = float(rec["gamma_mean"]), float(rec["delta_mean"])
        bd = cost(cp, alpha, gamma, delta)
        rows.append((rec["t"], alpha, gamma, delta, bd.m1, bd.m2, bd.m3, bd.total))
    return Output(("t", "alpha", "gamma", "delta", "m1", "m2", "m3", "total"), rows)


def cmd_sweep(cfg):
    for a in cfg["alpha"]:
        _check_prob("sweep", "alpha", a)
    ctx = SweepContext(
        q_A=cfg["qa"], q_B=cfg["qb"], c=cfg["c"], horizon=cfg["horizon"], delta=cfg["delta"],
        distribution=_read_dist(cfg["dist"]) if cfg["dist"] else None,
        graph=_load_graph(cfg["graph"]) if cfg["graph"] else None,
        reps=cfg["reps"], seed=cfg["seed"],
    )
    try:
        rows = sweep(cfg["alpha"], cfg["r"], cfg["u"], cfg["backend"], ctx)
    except ValueError as exc:
        if "backend" in str(exc):
            raise ConfigError(f"sweep: {exc}") from None
        raise
    return Output(SweepRow.FIELDS, [r.values() for r in rows])


def cmd_compare(cfg):
    _check_prob("compare", "alpha", cfg["alpha"])
    rep = compare(cfg["delta"], cfg["n"], _payoffs(cfg), cfg["alpha"], cfg["T"], cfg["reps"],
                  cfg["seed"], cfg["z_threshold"], cfg["abs_tol"])
    verdict = "PASS" if rep.passed else "FAIL"
    table = f"max|z| = {rep.max_abs_z:.4g}, max|diff| = {rep.max_abs_diff:.4g}: {verdict}"
    rows = [(r.t, r.theory, r.mean, r.stderr, r.z) for r in rep.rows]
    return Output(rep.HEADER, rows, table=table, verdict=rep.passed,
                  seeds=[[cfg["seed"], r] for r in range(cfg["reps"])])


HANDLERS = {
    "gen": cmd_gen,
    "sim-discrete": cmd_sim_discrete,
    "sim-continuous": cmd_sim_continuous,
    "theory": cmd_theory,
    "fixed-point": cmd_fixed_point,
    "alpha-crit": cmd_alpha_crit,
    "bound": cmd_bound,
    "cost": cmd_cost,
    "sweep": cmd_sweep,
    "compare": cmd_compare,
}


def run_experiment(command: str, cfg: dict[str, Any], stdout=None) -> int:
    """Run one subcommand from a resolved config; write CSV + metadata sidecar."""
    stdout = stdout or sys.stdout
    start = time.perf_counter()
    out = HANDLERS[command](cfg)
    if out is None:
        return 0
    text = csv_text(out.header, out.rows)
    target = cfg.get("out")
    if target:
        Path(target).write_text(text)
        meta = {
            "command": command,
            "config": cfg["_raw"],
            "version": __version__,
            "seeds": out.seeds,
            "wall_time_s": round(time.perf_counter() - start, 3),
        }
        Path(str(target) + ".meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
        if out.table:
            print(out.table, file=stdout)
    else:
        stdout.write(text)
        if out.table:
            print(out.table, file=sys.stderr)
    return 0 if out.verdict else EXIT_VERDICT


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args.command, args, check_required=not args.dump_config)
        if args.dump_config:
            sys.stdout.write(dump_config(args.command, cfg))
            return 0
        return run_experiment(args.command, cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, GraphFormatError, GenerationError, ConvergenceError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())

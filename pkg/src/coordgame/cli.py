"""Command line front end.

Exit codes: 0 success, 2 argument or domain error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field

import numpy as np

from . import analysis, equilibrium
from .exceptions import InvalidArgumentError, NumericalInconsistencyError
from .game import GameParams, PolicyProfile, parse_n_agents
from .montecarlo import SimConfig, simulate
from .numerics import QuadratureSpec

EXIT_OK, EXIT_USAGE, EXIT_IO = 0, 2, 3

SWEEP_VARIABLES = ("sigma_z_sq", "sigma_x_sq", "lambda", "n_agents")
SWEEP_OUTPUTS = ("ne_tau", "ce_tau", "oracle_tau", "utility_ne", "utility_ce",
                 "rho_ne", "rho_ce", "fano_bound")

DEFAULTS = {
    "n_agents": 10,
    "lambda": 1.0,
    "sigma_x_sq": 1.0,
    "sigma_z_sq": 1.0,
    "quadrature_nodes": 96,
    "mc_samples": 100_000,
    "seed": 0,
}
CONFIG_KEYS = frozenset(DEFAULTS)

# argparse dest -> config key
_FLAG_KEYS = {
    "n": "n_agents",
    "lam": "lambda",
    "sigma_x_sq": "sigma_x_sq",
    "sigma_z_sq": "sigma_z_sq",
    "quadrature_nodes": "quadrature_nodes",
    "samples": "mc_samples",
    "seed": "seed",
}

log = logging.getLogger("coordgame")


class UsageError(Exception):
    pass


class OutputError(Exception):
    pass


def fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".12g")


def parse_float_list(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _load_config(path):
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as err:
        raise OutputError(f"cannot read config {path}: {err}")
    except json.JSONDecodeError as err:
        raise UsageError(f"config {path} is not valid JSON: {err}")
    if not isinstance(cfg, dict):
        raise UsageError("config must be a JSON object")
    unknown = set(cfg) - CONFIG_KEYS
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    return cfg


@dataclass
class Settings:
    params: GameParams
    quad: QuadratureSpec
    mc_samples: int
    seed: int
    raw: dict = field(default_factory=dict)


def resolve_settings(args) -> Settings:
    """Merge built-in defaults < JSON config < command-line flags."""
    merged = dict(DEFAULTS)
    merged.update(_load_config(getattr(args, "config", None)))
    for dest, key in _FLAG_KEYS.items():
        value = getattr(args, dest, None)
        if value is not None:
            merged[key] = value
    try:
        params = GameParams(parse_n_agents(merged["n_agents"]), float(merged["lambda"]),
                            float(merged["sigma_x_sq"]), float(merged["sigma_z_sq"]))
        quad = QuadratureSpec(int(merged["quadrature_nodes"]))
        samples, seed = int(merged["mc_samples"]), int(merged["seed"])
    except (TypeError, ValueError) as err:
        raise UsageError(str(err))
    return Settings(params, quad, samples, seed, merged)


def _write_text(path: str, text: str, stdout):
    if path in (None, "-"):
        stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as err:
        raise OutputError(f"cannot write {path}: {err}")


def _kv(pairs) -> str:
    return "".join(f"{k}={fmt(v)}\n" for k, v in pairs)


def cmd_solve(args, stdout) -> int:
    s = resolve_settings(args)
    p = s.params
    sol = equilibrium.ne_threshold(p, s.quad)
    stdout.write(_kv([
        ("n_agents", "inf" if p.is_mean_field else p.n_agents),
        ("ne_tau", sol.tau_star),
        ("residual", sol.residual),
        ("iterations", sol.iterations),
        ("method", sol.method),
        ("br_iteration_tau", sol.br_tau),
        ("br_iterations", sol.br_iterations),
        ("br_converged", sol.br_converged),
        ("methods_agree", sol.methods_agree),
        ("oracle_tau", equilibrium.oracle_threshold(p)),
        ("ce_tau", equilibrium.ce_threshold(p)),
        ("alpha", p.alpha()),
    ]))
    return EXIT_OK


def _with_value(params: GameParams, variable: str, value: float) -> GameParams:
    if variable == "n_agents":
        if value != int(value):
            raise UsageError(f"n_agents grid values must be integers, got {value!r}")
        return params.replace(n_agents=int(value))
    if variable == "lambda":
        return params.replace(lam=value)
    return params.replace(**{variable: value})


def sweep_rows(params: GameParams, variable: str, grid, outputs, quad=None):
    """Yield one dict per grid point with the requested outputs."""
    quad = quad or QuadratureSpec()
    for value in grid:
        p = _with_value(params, variable, float(value))
        row = {"sweep_value": value}
        oracle = equilibrium.oracle_threshold(p)
        ce = equilibrium.ce_threshold(p)
        ne = None
        if {"ne_tau", "utility_ne", "rho_ne"} & set(outputs):
            ne = equilibrium.ne_threshold(p, quad).tau_star
        for name in outputs:
            if name == "ne_tau":
                row[name] = ne
            elif name == "ce_tau":
                row[name] = ce
            elif name == "oracle_tau":
                row[name] = oracle
            elif name == "utility_ne":
                row[name] = analysis.expected_utility(ne, p)
            elif name == "utility_ce":
                row[name] = analysis.expected_utility(ce, p)
            elif name == "rho_ne":
                row[name] = analysis.coordination_efficiency(ne, oracle, p).rho
            elif name == "rho_ce":
                row[name] = analysis.coordination_efficiency(ce, oracle, p).rho
            elif name == "fano_bound":
                row[name] = analysis.fano_bound(oracle, p).rho_upper_bound
        yield row


def _grid_from_args(args, list_attr, linspace_attr):
    values = getattr(args, list_attr)
    lin = getattr(args, linspace_attr)
    if (values is None) == (lin is None):
        raise UsageError(f"give exactly one of --{list_attr.replace('_', '-')} "
                         f"or --{linspace_attr.replace('_', '-')}")
    if lin is not None:
        start, stop, num = lin
        if num != int(num) or num < 1:
            raise UsageError("linspace count must be a positive integer")
        values = np.linspace(start, stop, int(num)).tolist()
    if not values:
        raise UsageError("grid is empty")
    return values


def cmd_sweep(args, stdout) -> int:
    s = resolve_settings(args)
    grid = _grid_from_args(args, "grid", "linspace")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise UsageError("sweep grid must be strictly increasing")
    if any(v <= 0 for v in grid):
        raise UsageError("sweep grid values must be positive")
    requested = args.outputs or list(SWEEP_OUTPUTS)
    unknown = set(requested) - set(SWEEP_OUTPUTS)
    if unknown:
        raise UsageError(f"unknown outputs: {', '.join(sorted(unknown))}")
    outputs = [name for name in SWEEP_OUTPUTS if name in requested]
    lines = [",".join(["sweep_value", *outputs])]
    for row in sweep_rows(s.params, args.variable, grid, outputs, s.quad):
        lines.append(",".join(fmt(row[k]) for k in ["sweep_value", *outputs]))
    _write_text(args.out, "\n".join(lines) + "\n", stdout)
    return EXIT_OK


def cmd_br_curve(args, stdout) -> int:
    s = resolve_settings(args)
    grid = _grid_from_args(args, "tau_grid", "tau_linspace")
    br = equilibrium.best_response_curve(grid, s.params, s.quad)
    sol = equilibrium.ne_threshold(s.params, s.quad)
    lines = ["tau,br_tau"]
    lines += [f"{fmt(t)},{fmt(b)}" for t, b in zip(grid, br)]
    lines.append(f"# fixed_point={fmt(sol.tau_star)}")
    _write_text(args.out, "\n".join(lines) + "\n", stdout)
    return EXIT_OK


def _policy_threshold(args, params: GameParams, quad):
    chosen = [v is not None for v in (args.tau, args.policy, args.thresholds)]
    if sum(chosen) > 1:
        raise UsageError("give at most one of --tau, --policy, --thresholds")
    if args.thresholds is not None:
        return PolicyProfile(tuple(args.thresholds))
    if args.tau is not None:
        return float(args.tau)
    policy = args.policy or "ne"
    if policy == "ne":
        return equilibrium.ne_threshold(params, quad).tau_star
    if policy == "ce":
        return equilibrium.ce_threshold(params)
    return equilibrium.oracle_threshold(params)


def cmd_simulate(args, stdout) -> int:
    s = resolve_settings(args)
    profile = _policy_threshold(args, s.params, s.quad)
    try:
        cfg = SimConfig(s.mc_samples, args.n_agents_effective, s.seed)
    except InvalidArgumentError as err:
        raise UsageError(str(err))
    tau_oracle = equilibrium.oracle_threshold(s.params)
    rep = simulate(profile, tau_oracle, s.params, cfg)
    tau_out = profile if not isinstance(profile, PolicyProfile) else float(np.mean(profile.thresholds))
    stdout.write(_kv([
        ("tau", tau_out),
        ("oracle_tau", tau_oracle),
        ("empirical_rho", rep.empirical_rho),
        ("rho_std_error", rep.rho_std_error),
        ("empirical_utility", rep.empirical_utility),
        ("utility_std_error", rep.utility_std_error),
        ("n_samples", rep.n_samples),
        ("seed", rep.seed),
    ]))
    stdout.write(f"rng={rep.rng}\n")
    return EXIT_OK


def cmd_bound(args, stdout) -> int:
    s = resolve_settings(args)
    tau_oracle = args.tau_oracle
    if tau_oracle is None:
        tau_oracle = equilibrium.oracle_threshold(s.params)
    rep = analysis.fano_bound(tau_oracle, s.params)
    stdout.write(_kv([
        ("tau_oracle", tau_oracle),
        ("p_astar_one", rep.p_astar_one),
        ("h_astar", rep.h_astar),
        ("h_y", rep.h_y),
        ("h_y_given_astar", rep.h_y_given_astar),
        ("h_astar_given_y", rep.h_astar_given_y),
        ("h_astar_given_y_unclamped", rep.h_astar_given_y_unclamped),
        ("rho_upper_bound", rep.rho_upper_bound),
    ]))
    return EXIT_OK


def _add_game_args(p: argparse.ArgumentParser):
    p.add_argument("--config", metavar="PATH", help="JSON config; flags override its values")
    p.add_argument("--n", type=str, default=None, help="number of agents, or 'inf'")
    p.add_argument("--lambda", dest="lam", type=float, default=None, help="benefit slope")
    p.add_argument("--sigma-x-sq", type=float, default=None, help="prior variance of the state")
    p.add_argument("--sigma-z-sq", type=float, default=None, help="observation noise variance")
    p.add_argument("--quadrature-nodes", type=int, default=None,
                   help="Gauss-Hermite nodes for belief expectations")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coordgame",
        description="Equilibrium thresholds, coordination efficiency and Fano bounds "
                    "for Gaussian global games.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="equilibrium, oracle and CE thresholds")
    _add_game_args(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sweep", help="CSV of thresholds, utilities and efficiencies over a grid")
    _add_game_args(p)
    p.add_argument("--variable", choices=SWEEP_VARIABLES, default="sigma_z_sq")
    p.add_argument("--grid", type=parse_float_list, default=None, help="comma-separated values")
    p.add_argument("--linspace", type=float, nargs=3, metavar=("START", "STOP", "NUM"))
    p.add_argument("--outputs", type=lambda s: [t for t in s.split(",") if t], default=None,
                   help=f"comma-separated subset of {','.join(SWEEP_OUTPUTS)}")
    p.add_argument("--out", default="-", help="output CSV path ('-' for stdout)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("br-curve", help="CSV of the best response to homogeneous thresholds")
    _add_game_args(p)
    p.add_argument("--tau-grid", type=parse_float_list, default=None)
    p.add_argument("--tau-linspace", type=float, nargs=3, metavar=("START", "STOP", "NUM"))
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_br_curve)

    p = sub.add_parser("simulate", help="seeded Monte Carlo of a threshold profile")
    _add_game_args(p)
    p.add_argument("--tau", type=float, default=None, help="homogeneous threshold")
    p.add_argument("--policy", choices=("ne", "ce", "oracle"), default=None)
    p.add_argument("--thresholds", type=parse_float_list, default=None,
                   help="comma-separated per-agent thresholds")
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--n-agents-effective", type=int, default=10_000,
                   help="agents simulated when --n inf")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bound", help="Fano upper bound on coordination efficiency")
    _add_game_args(p)
    p.add_argument("--tau-oracle", type=float, default=None)
    p.set_defaults(func=cmd_bound)
    return parser


def main(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args, stdout)
    except (UsageError, InvalidArgumentError, NumericalInconsistencyError) as err:
        print(f"coordgame: error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except OutputError as err:
        print(f"coordgame: error: {err}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

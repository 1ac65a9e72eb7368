"""Scenario configuration and command-line entry points.

Subcommands:
  check          evaluate the feasibility conditions for a scenario
  simulate       run the closed loop and write a trajectory CSV
  verify-bounds  drive the filter-cascade oracle against the analytic envelopes

Exit codes: 0 ok, 1 usage/IO error, 2 infeasible scenario, 3 hard constraint
violation during simulation, 4 bound-oracle failure.

Config format: INI sections [plant] [trajectory] [performance] [input]
[simulation], `key = value` pairs, `#` comments.  Expression values are
quoted strings over x1..xn and t; operator precedence is ^ (right
associative), unary -, * /, + -.
"""

from __future__ import annotations

import argparse
import configparser
import math
import sys
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from . import bounds, expr, feasibility, sim
from .controller import filtered_error
from .perfspec import PerformanceSpec, VirtualSpec, derive_vpc
from .plant import PlantModel, TrajectorySpec, estimate_traj_bound

__all__ = ["Scenario", "ScenarioError", "parse_scenario", "example_config_path", "run", "main"]

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INFEASIBLE = 2
EXIT_VIOLATION = 3
EXIT_ORACLE = 4


class ScenarioError(Exception):
    """Malformed or invalid scenario configuration."""


@dataclass(frozen=True)
class Scenario:
    model: PlantModel
    trajspec: TrajectorySpec
    pps: PerformanceSpec
    vspec: VirtualSpec
    u_bar: float
    simcfg: sim.SimConfig
    seed: int | None

    def initial_filtered_error(self) -> float:
        errs = tuple(
            x - expr.evaluate(node, {"t": 0.0})
            for x, node in zip(self.simcfg.x0, self.trajspec.derivs)
        )
        return filtered_error(errs, self.vspec.lambdas)

    def report(self) -> feasibility.FeasibilityReport:
        return feasibility.full_report(
            self.model,
            self.pps,
            self.vspec,
            self.trajspec.xd_bar,
            self.u_bar,
            self.initial_filtered_error(),
        )


_SECTION_KEYS = {
    "plant": {"n", "f", "g", "d", "k_l", "p_star", "g_lo", "g_hi", "d_bar"},
    "trajectory": {"xd", "xd_bar"},
    "performance": {"psi0", "psi_inf", "mu", "a"},
    "input": {"u_bar"},
    "simulation": {"dt", "t_end", "x0", "record_stride", "seed"},
}
_REQUIRED_KEYS = {
    "plant": {"n", "f", "g", "d", "k_l", "p_star", "g_lo", "g_hi", "d_bar"},
    "trajectory": {"xd"},
    "performance": {"psi0", "psi_inf", "mu", "a"},
    "input": {"u_bar"},
    "simulation": {"x0"},
}


def _unquote(value: str) -> str:
    v = value.strip()
    if len(v) >= 2 and v[0] == v[-1] and v[0] in "\"'":
        return v[1:-1]
    return v


def _get_float(section: dict[str, str], sect: str, key: str) -> float:
    raw = section[key]
    try:
        return float(raw)
    except ValueError:
        raise ScenarioError(f"[{sect}] {key} = {raw!r} is not a number") from None


def _get_int(section: dict[str, str], sect: str, key: str) -> int:
    raw = section[key]
    try:
        return int(raw)
    except ValueError:
        raise ScenarioError(f"[{sect}] {key} = {raw!r} is not an integer") from None


def _get_expr(section: dict[str, str], sect: str, key: str, allowed: set[str]):
    source = _unquote(section[key])
    try:
        node = expr.parse(source)
    except expr.ExprSyntaxError as exc:
        raise ScenarioError(f"[{sect}] {key}: {exc}") from exc
    extra = expr.variables(node) - allowed
    if extra:
        raise ScenarioError(f"[{sect}] {key}: unknown variables {sorted(extra)}")
    return node


def parse_scenario(text: str) -> Scenario:
    cp = configparser.ConfigParser(
        inline_comment_prefixes=("#",), comment_prefixes=("#",), interpolation=None
    )
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ScenarioError(f"config parse error: {exc}") from exc

    for sect in _SECTION_KEYS:
        if sect not in cp:
            raise ScenarioError(f"missing section [{sect}]")
        keys = set(cp[sect])
        unknown = keys - _SECTION_KEYS[sect]
        if unknown:
            raise ScenarioError(f"unknown key {sorted(unknown)[0]!r} in section [{sect}]")
        missing = _REQUIRED_KEYS[sect] - keys
        if missing:
            raise ScenarioError(f"missing key {sorted(missing)[0]!r} in section [{sect}]")
    extra_sections = set(cp.sections()) - set(_SECTION_KEYS)
    if extra_sections:
        raise ScenarioError(f"unknown section [{sorted(extra_sections)[0]}]")

    plant_s = dict(cp["plant"])
    n = _get_int(plant_s, "plant", "n")
    if n < 1:
        raise ScenarioError("n must be >= 1")
    state_vars = {f"x{i}" for i in range(1, n + 1)}
    p_star_raw = plant_s["p_star"].strip().lower()
    p_star = math.inf if p_star_raw in ("inf", "infinity") else _get_float(plant_s, "plant", "p_star")
    try:
        model = PlantModel(
            n=n,
            f_expr=_get_expr(plant_s, "plant", "f", state_vars),
            g_expr=_get_expr(plant_s, "plant", "g", state_vars),
            d_expr=_get_expr(plant_s, "plant", "d", {"t"}),
            k_l=_get_float(plant_s, "plant", "k_l"),
            p_star=p_star,
            g_lo=_get_float(plant_s, "plant", "g_lo"),
            g_hi=_get_float(plant_s, "plant", "g_hi"),
            d_bar=_get_float(plant_s, "plant", "d_bar"),
        )
    except ValueError as exc:
        raise ScenarioError(str(exc)) from exc

    sim_s = dict(cp["simulation"])
    try:
        x0 = tuple(float(v) for v in sim_s["x0"].split(","))
    except ValueError:
        raise ScenarioError(f"[simulation] x0 = {sim_s['x0']!r} is not a number list") from None
    if len(x0) != n:
        raise ScenarioError(f"x0 has {len(x0)} entries, expected n = {n}")
    try:
        simcfg = sim.SimConfig(
            x0=x0,
            dt=_get_float(sim_s, "simulation", "dt") if "dt" in sim_s else 1e-3,
            t_end=_get_float(sim_s, "simulation", "t_end") if "t_end" in sim_s else 20.0,
            record_stride=_get_int(sim_s, "simulation", "record_stride") if "record_stride" in sim_s else 10,
        )
    except ValueError as exc:
        raise ScenarioError(str(exc)) from exc
    seed = _get_int(sim_s, "simulation", "seed") if "seed" in sim_s else None

    traj_s = dict(cp["trajectory"])
    xd_expr = _get_expr(traj_s, "trajectory", "xd", {"t"})
    xd_bar = _get_float(traj_s, "trajectory", "xd_bar") if "xd_bar" in traj_s else None
    try:
        trajspec = TrajectorySpec.from_expression(xd_expr, n, xd_bar, t_end=simcfg.t_end)
    except (ValueError, expr.ExprError) as exc:
        raise ScenarioError(f"[trajectory] xd: {exc}") from exc

    perf_s = dict(cp["performance"])
    try:
        pps = PerformanceSpec(
            psi0=_get_float(perf_s, "performance", "psi0"),
            psi_inf=_get_float(perf_s, "performance", "psi_inf"),
            mu=_get_float(perf_s, "performance", "mu"),
        )
        vspec = derive_vpc(pps, _get_float(perf_s, "performance", "a"), n)
    except ValueError as exc:
        raise ScenarioError(str(exc)) from exc

    u_bar = _get_float(dict(cp["input"]), "input", "u_bar")
    if u_bar <= 0:
        raise ScenarioError("u_bar must be > 0")

    return Scenario(
        model=model,
        trajspec=trajspec,
        pps=pps,
        vspec=vspec,
        u_bar=u_bar,
        simcfg=simcfg,
        seed=seed,
    )


def load_scenario(path: str) -> Scenario:
    return parse_scenario(Path(path).read_text(encoding="utf-8"))


def example_config_path() -> Path:
    """Location of the bundled second-order example scenario."""
    return Path(resources.files("ppcsat").joinpath("data/example1.cfg"))


# ---------------------------------------------------------------------------
# Output helpers
# ---------------------------------------------------------------------------


def _write_report_text(report, out) -> None:
    width = max(len(k) for k, _ in report.lines())
    for key, value in report.lines():
        out.write(f"{key.ljust(width)}  {value}\n")


def _write_report_csv(report, out) -> None:
    out.write("key,value\n")
    for key, value in report.lines():
        out.write(f"{key},{value}\n")


def write_trajectory_csv(traj: sim.Trajectory, n: int, fh) -> None:
    """Fixed schema: t,xi1..xin,xd,err,psi,r,psi_r,u,sat with 9 significant digits."""
    cols = ",".join(f"xi{i}" for i in range(1, n + 1))
    fh.write(f"t,{cols},xd,err,psi,r,psi_r,u,sat\n")
    for k in range(len(traj.times)):
        vals = [traj.times[k], *traj.states[k], traj.xd[k], traj.err[k],
                traj.psi[k], traj.r[k], traj.psi_r[k], traj.u[k]]
        fh.write(",".join(f"{v:.9g}" for v in vals))
        fh.write(f",{int(traj.saturated[k])}\n")


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def _scenario_from_args(args) -> Scenario:
    scenario = load_scenario(args.config)
    overrides = {}
    if getattr(args, "dt", None) is not None:
        overrides["dt"] = args.dt
    if getattr(args, "t_final", None) is not None:
        overrides["t_end"] = args.t_final
    if getattr(args, "x0", None) is not None:
        overrides["x0"] = tuple(float(v) for v in args.x0.split(","))
    if overrides:
        cfg = scenario.simcfg
        simcfg = sim.SimConfig(
            x0=overrides.get("x0", cfg.x0),
            dt=overrides.get("dt", cfg.dt),
            t_end=overrides.get("t_end", cfg.t_end),
            record_stride=cfg.record_stride,
        )
        if len(simcfg.x0) != scenario.model.n:
            raise ScenarioError(f"--x0 has {len(simcfg.x0)} entries, expected {scenario.model.n}")
        scenario = Scenario(
            model=scenario.model,
            trajspec=scenario.trajspec,
            pps=scenario.pps,
            vspec=scenario.vspec,
            u_bar=scenario.u_bar,
            simcfg=simcfg,
            seed=scenario.seed,
        )
    return scenario


def cmd_check(args) -> int:
    scenario = _scenario_from_args(args)
    report = scenario.report()
    out = open(args.out, "w", newline="\n") if args.out else sys.stdout
    try:
        if args.format == "csv":
            _write_report_csv(report, out)
        else:
            _write_report_text(report, out)
    finally:
        if args.out:
            out.close()
    return EXIT_OK if report.feasible else EXIT_INFEASIBLE


def cmd_simulate(args) -> int:
    scenario = _scenario_from_args(args)
    report = scenario.report()
    if not report.feasible and not args.force:
        print("scenario is infeasible (use --force to simulate anyway):", file=sys.stderr)
        _write_report_text(report, sys.stderr)
        return EXIT_INFEASIBLE
    traj = sim.simulate(
        scenario.model,
        scenario.trajspec,
        scenario.pps,
        scenario.vspec,
        scenario.u_bar,
        scenario.simcfg,
    )
    out_path = args.out or "trajectory.csv"
    with open(out_path, "w", newline="\n") as fh:
        write_trajectory_csv(traj, scenario.model.n, fh)
    for event in traj.violations:
        severity = "violation" if event.hard else "warning"
        print(
            f"{severity}: {event.kind} at t={event.time:.6g} "
            f"value={event.value:.6g} bound={event.bound:.6g}",
            file=sys.stderr,
        )
    return EXIT_VIOLATION if traj.hard_violations else EXIT_OK


def cmd_verify_bounds(args) -> int:
    env = bounds.Envelope(amp=args.amp, rate=args.rate, floor=args.floor)
    rng = np.random.default_rng(args.seed)
    rows = []
    margin = bounds.filter_cascade_check(
        env, args.a, args.p, args.q, args.dt, args.t_end, "worst_case"
    )
    rows.append((0, margin))
    for trial in range(1, args.trials + 1):
        margin = bounds.filter_cascade_check(
            env, args.a, args.p, args.q, args.dt, args.t_end, "random_bounded", rng
        )
        rows.append((trial, margin))
    out = open(args.out, "w", newline="\n") if args.out else sys.stdout
    try:
        out.write("trial,margin,pass\n")
        for trial, margin in rows:
            out.write(f"{trial},{margin:.9g},{int(margin < 0)}\n")
    finally:
        if args.out:
            out.close()
    return EXIT_OK if all(m < 0 for _, m in rows) else EXIT_ORACLE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ppcsat",
        description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_check = sub.add_parser("check", help="evaluate feasibility conditions")
    p_check.add_argument("--config", required=True)
    p_check.add_argument("--out")
    p_check.add_argument("--x0", help="comma-separated initial state override")
    p_check.add_argument("--format", choices=["text", "csv"], default="text")
    p_check.set_defaults(func=cmd_check)

    p_sim = sub.add_parser("simulate", help="run the closed loop, write CSV")
    p_sim.add_argument("--config", required=True)
    p_sim.add_argument("--out")
    p_sim.add_argument("--dt", type=float)
    p_sim.add_argument("--t-final", dest="t_final", type=float)
    p_sim.add_argument("--x0", help="comma-separated initial state override")
    p_sim.add_argument("--format", choices=["csv"], default="csv")
    p_sim.add_argument("--force", action="store_true", help="simulate even if infeasible")
    p_sim.set_defaults(func=cmd_simulate)

    p_vb = sub.add_parser("verify-bounds", help="run the filter-cascade oracle")
    p_vb.add_argument("--a", type=float, required=True, help="filter pole")
    p_vb.add_argument("--rate", type=float, default=1.0, help="envelope decay rate")
    p_vb.add_argument("--amp", type=float, default=1.0, help="envelope amplitude")
    p_vb.add_argument("--floor", type=float, default=0.01, help="envelope floor")
    p_vb.add_argument("--p", type=int, default=1, help="low-pass section count")
    p_vb.add_argument("--q", type=int, default=0, help="high-pass section count")
    p_vb.add_argument("--dt", type=float, default=1e-3)
    p_vb.add_argument("--t-end", dest="t_end", type=float, default=10.0)
    p_vb.add_argument("--trials", type=int, default=0, help="random-signal trials")
    p_vb.add_argument("--seed", type=int, default=0)
    p_vb.add_argument("--out")
    p_vb.set_defaults(func=cmd_verify_bounds)
    return parser


def run(argv: list[str]) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except (ScenarioError, expr.ExprError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run(sys.argv[1:]))

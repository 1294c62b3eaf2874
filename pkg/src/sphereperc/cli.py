"""Command-line front end.

Degrees and km at the boundary; everything internal is radians.  Options can
also come from a flat ``key=value`` file passed with ``--config``; flags on
the command line win.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import analytics, engine, hexlattice, records
from .constellation import full_coverage_layout, link_geometry, sample_constellation, uncovered_count, write_constellation
from .exceptions import DomainError
from .geometry import sample_uniform_sphere

EXIT_OK, EXIT_CONFIG, EXIT_INFEASIBLE = 0, 2, 3


class ConfigError(Exception):
    pass


def _add_shell(p: argparse.ArgumentParser, with_dm=True, with_h=True):
    g = p.add_argument_group("shell")
    g.add_argument("--gamma-deg", type=float, help="coverage angle")
    if with_h:
        g.add_argument("--h", type=float, help="altitude in km")
    g.add_argument("--elevation-deg", type=float, help="minimum elevation angle (needs --h)")
    g.add_argument("--nadir-deg", type=float, help="nadir angle (needs --h)")
    if with_dm:
        g.add_argument("--dm-km", type=float, help="maximum slant range in km")


def _add_mc(p: argparse.ArgumentParser):
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--coupled", action="store_true", help="share point streams across grid values")
    p.add_argument("--workers", type=int, default=None, help="worker processes (results never depend on it)")


def _add_output(p: argparse.ArgumentParser, default_fmt="csv"):
    p.add_argument("--output", "-o", type=Path, default=None, help="write here instead of stdout")
    p.add_argument("--format", choices=("csv", "json"), default=default_fmt)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sphereperc", description=__doc__.splitlines()[0])
    parser.add_argument("--config", type=Path, default=None, help="flat key=value option file")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="closed-form critical report")
    _add_shell(p)
    p.add_argument("--N", type=int, default=None)
    p.add_argument("--a-km", type=float, nargs="+", default=[], help="hexagon side lengths for N_c bounds")
    _add_output(p, "json")

    p = sub.add_parser("simulate", help="Monte Carlo estimate at one (N, gamma)")
    _add_shell(p)
    p.add_argument("--N", type=int, required=False)
    p.add_argument("--interval", choices=("wald", "clopper-pearson"), default="wald")
    _add_mc(p)
    _add_output(p, "json")

    p = sub.add_parser("sweep", help="theta curve along N, altitude or slant range")
    p.add_argument("--axis", choices=("N", "altitude", "slant_range", "slant"), required=False)
    p.add_argument("--from", dest="start", type=float)
    p.add_argument("--to", dest="stop", type=float)
    p.add_argument("--step", type=float)
    p.add_argument("--grid", type=float, nargs="+", default=None, help="explicit grid instead of from/to/step")
    _add_shell(p)
    p.add_argument("--N", type=int, default=None)
    p.add_argument("--skip-infeasible", action="store_true", help="drop infeasible grid points (exit code 3)")
    _add_mc(p)
    _add_output(p, "csv")

    p = sub.add_parser("layout", help="deterministic full-coverage layout with coverage audit")
    _add_shell(p)
    p.add_argument("--audit-samples", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--record", type=Path, default=None, help="also write the flat constellation record")
    p.add_argument("--output", "-o", type=Path, default=None)

    p = sub.add_parser("hexgrid", help="open/closed certification of plane hexagons")
    _add_shell(p)
    p.add_argument("--N", type=int, required=False)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--a-km", type=float, default=10.0)
    p.add_argument("--extent-km", type=float, default=100.0)
    p.add_argument("--uniform-gamma-m", action="store_true", help="use the worst-case gamma_m for every cell")
    p.add_argument("--output", "-o", type=Path, default=None)
    return parser


def read_config(path: Path) -> dict[str, str]:
    out = {}
    for n, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{n}: expected key=value, got {line!r}")
        k, v = (s.strip() for s in line.split("=", 1))
        out[k.replace("-", "_")] = v
    return out


def _apply_config(sub: argparse.ArgumentParser, cfg: dict[str, str]) -> None:
    actions = {a.dest: a for a in sub._actions}
    # a few flags use a dest different from their spelling
    alias = {"from": "start", "to": "stop"}
    defaults = {}
    for key, raw in cfg.items():
        if key in ("command", "config"):
            continue
        dest = alias.get(key, key)
        act = actions.get(dest)
        if act is None:
            raise ConfigError(f"unknown config key {key!r} for this command")
        if isinstance(act, argparse._StoreTrueAction):
            val = raw.lower() in ("1", "true", "yes", "on")
        elif act.nargs in ("+", "*"):
            conv = act.type or str
            val = [conv(t) for t in raw.replace(",", " ").split()]
        else:
            conv = act.type or str
            val = conv(raw)
        defaults[dest] = val
    sub.set_defaults(**defaults)


def _deg(args, name):
    v = getattr(args, name, None)
    return None if v is None else math.radians(v)


def resolve_shell(args, need_gamma=True):
    """Return ``(gamma, link)`` from the shell options; ``link`` may be None."""
    h = getattr(args, "h", None)
    dm = getattr(args, "dm_km", None)
    g = _deg(args, "gamma_deg")
    eps = _deg(args, "elevation_deg")
    eta = _deg(args, "nadir_deg")
    if h is not None:
        given = {k: v for k, v in dict(gamma=g, epsilon=eps, eta=eta, d_m=dm).items() if v is not None}
        if len(given) != 1:
            raise DomainError("h", "with --h give exactly one of --gamma-deg/--elevation-deg/--nadir-deg/--dm-km")
        link = link_geometry(h, **given)
        return link.gamma, link
    if eps is not None or eta is not None:
        raise DomainError("h", "--elevation-deg and --nadir-deg need --h")
    if g is None:
        if need_gamma:
            raise DomainError("gamma", "give --gamma-deg or --h with one shell parameter")
        return None, None
    if not 0.0 < g < math.pi / 2:
        raise DomainError("gamma", f"--gamma-deg must lie in (0, 90), got {args.gamma_deg!r}")
    return g, None


def _emit(text: str, path: Path | None):
    if path is None:
        sys.stdout.write(text)
    else:
        path.write_text(text)


def cmd_analyze(args) -> int:
    gamma, link = resolve_shell(args)
    if args.N is not None and args.N < 1:
        raise DomainError("N", f"must be >= 1, got {args.N!r}")
    kw = {}
    if link is not None:
        kw = {"h": link.h, "d_m": link.d_m}
    elif getattr(args, "dm_km", None) is not None:
        kw = {"d_m": args.dm_km}
    rep = analytics.critical_report(gamma, N=args.N, a_values=args.a_km, link=link, **kw)
    d = rep.to_dict()
    if args.format == "json":
        _emit(records.to_json(d), args.output)
    else:
        flat = {k: v for k, v in d.items() if not isinstance(v, (list, dict))}
        _emit(records._write(list(flat), [list(flat.values())]), args.output)
    return EXIT_OK


def cmd_simulate(args) -> int:
    gamma, link = resolve_shell(args)
    if args.N is None or args.N < 1:
        raise DomainError("N", "--N must be a positive integer")
    if args.trials < 1:
        raise DomainError("trials", "must be >= 1")
    est = engine.estimate_theta(args.N, gamma, args.trials, args.seed, args.coupled, workers=args.workers, interval=args.interval)
    row = engine.SweepRow(
        "N", float(args.N), gamma, est.theta_hat, est.ci95_halfwidth, est.trials,
        analytics.p_cov(args.N, gamma), args.seed, analytics.critical_N(gamma),
    )
    if args.format == "csv":
        _emit(records.sweep_csv([row]), args.output)
    else:
        d = asdict(row)
        d.update(successes=est.successes, degenerate=est.degenerate, interval=est.interval,
                 ci95_low=est.ci95[0], ci95_high=est.ci95[1], gamma_deg=math.degrees(gamma))
        _emit(records.to_json(d), args.output)
    return EXIT_OK


def _grid(args) -> list[float]:
    if args.grid:
        return list(args.grid)
    if None in (args.start, args.stop, args.step):
        raise DomainError("grid", "give --from/--to/--step or --grid")
    if args.step <= 0:
        raise DomainError("step", "must be positive")
    n = int(math.floor((args.stop - args.start) / args.step + 1e-9)) + 1
    if n < 1:
        raise DomainError("grid", "--to must not be below --from")
    return [args.start + i * args.step for i in range(n)]


def cmd_sweep(args) -> int:
    if args.axis is None:
        raise DomainError("axis", "--axis is required")
    if args.trials < 1:
        raise DomainError("trials", "must be >= 1")
    axis = "slant_range" if args.axis == "slant" else args.axis
    grid = _grid(args)
    if axis == "N":
        gamma, _ = resolve_shell(args)
        fixed = {"gamma": gamma}
    else:
        if args.N is None or args.N < 1:
            raise DomainError("N", f"--N is required for the {axis} axis")
        if axis == "altitude":
            if args.dm_km is None:
                raise DomainError("dm_km", "--dm-km is required for the altitude axis")
            fixed = {"N": args.N, "d_m": args.dm_km}
        else:
            if args.h is None:
                raise DomainError("h", "--h is required for the slant_range axis")
            fixed = {"N": args.N, "h": args.h}
    try:
        rows, skipped = engine.sweep(axis, grid, fixed, args.trials, args.seed, args.coupled,
                                     skip_infeasible=args.skip_infeasible, workers=args.workers)
    except engine.InfeasiblePoint as exc:
        print(f"error: {exc} (use --skip-infeasible to drop such points)", file=sys.stderr)
        return EXIT_INFEASIBLE
    if args.format == "csv":
        _emit(records.sweep_csv(rows), args.output)
    else:
        _emit(records.to_json([asdict(r) for r in rows]), args.output)
    for bad in skipped:
        print(f"skipped: {bad}", file=sys.stderr)
    return EXIT_INFEASIBLE if skipped else EXIT_OK


def cmd_layout(args) -> int:
    gamma, _ = resolve_shell(args)
    c = full_coverage_layout(gamma)
    comments = [f"gamma_rad={gamma!r}", f"m={c.meta['m']}", f"n={c.meta['n']}", f"zeta_rad={c.meta['zeta']!r}", f"N={c.N}"]
    if args.audit_samples > 0:
        pts = sample_uniform_sphere(np.random.default_rng(args.seed), args.audit_samples)
        missed = uncovered_count(c, pts)
        comments += [f"audit_samples={args.audit_samples}", f"audit_seed={args.seed}", f"uncovered={missed}"]
        print(f"uncovered={missed}", file=sys.stderr)
    _emit(records.layout_csv(c.centers, comments), args.output)
    if args.record is not None:
        write_constellation(c, args.record)
    return EXIT_OK


def cmd_hexgrid(args) -> int:
    gamma, _ = resolve_shell(args)
    if args.N is None or args.N < 1:
        raise DomainError("N", "--N must be a positive integer")
    cells = hexlattice.hex_lattice(args.a_km, args.extent_km)
    c = sample_constellation(args.N, gamma, args.seed)
    labels = hexlattice.classify_grid(cells, c, uniform=args.uniform_gamma_m)
    _emit(records.hexgrid_csv(cells, labels), args.output)
    return EXIT_OK


COMMANDS = {
    "analyze": cmd_analyze,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "layout": cmd_layout,
    "hexgrid": cmd_hexgrid,
}


def main(argv=None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        pre, _ = parser.parse_known_args(argv)
        if pre.config is not None:
            sub = parser._subparsers._group_actions[0].choices[pre.command]
            _apply_config(sub, read_config(pre.config))
    except (ConfigError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

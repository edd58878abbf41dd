"""Command-line front end: simulate, sweep, verify.

Config files are flat ``key = value`` text (diff-able experiment records).
Sweeps are declared by giving one of mu / u_max / T the 3-element form
``[start, stop, count]``, or by listing start states as
``x0_list = [a, b] [c, d] ...``.

Trajectory CSV schema: ``t,x1,x2,u,V,region,set_distance,warp_gain`` with 17
significant digits and LF line endings; identical configs produce
byte-identical files.
"""

from __future__ import annotations

import argparse
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import analysis
from .errors import ConfigError, IntegrationError, ParseError
from .example import REGISTRY
from .model import ControllerConfig, derive_constants
from .simulator import SimConfig, Trajectory, measure_times, simulate

_FLOAT_KEYS = ("mu", "u_max", "T", "R", "dt", "t_end", "v_tol", "event_tol")
_SWEEPABLE = ("mu", "u_max", "T")


@dataclass(frozen=True)
class ParsedRun:
    """A config file resolved against the system registry."""

    system: str
    bundle: object
    cfg: ControllerConfig
    sim: SimConfig
    sweep: tuple[str, list] | None  # (param, values); values are floats or x0 tuples


def _parse_vector(text: str, key: str, line: int) -> tuple[float, ...]:
    text = text.strip()
    if not (text.startswith("[") and text.endswith("]")):
        raise ParseError("expected a bracketed vector like [1, 1.5]", key, line)
    try:
        return tuple(float(p) for p in text[1:-1].replace(",", " ").split())
    except ValueError:
        raise ParseError("non-numeric entry in vector", key, line) from None


def _read_pairs(path: str | Path) -> dict[str, tuple[str, int]]:
    pairs: dict[str, tuple[str, int]] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError("expected 'key = value'", line=lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ParseError("empty key", line=lineno)
        if key in pairs:
            raise ParseError("duplicate key", key, lineno)
        pairs[key] = (value, lineno)
    return pairs


def parse_config(path: str | Path) -> ParsedRun:
    """Parse and validate a run config; errors name the key and line."""
    pairs = _read_pairs(path)

    def take(key: str):
        return pairs.pop(key, None)

    system_entry = take("system")
    if system_entry is None:
        raise ParseError("missing required key", "system")
    system, system_line = system_entry
    if system not in REGISTRY:
        raise ParseError(
            f"unknown system '{system}'; registered: {', '.join(sorted(REGISTRY))}",
            "system",
            system_line,
        )

    scalars: dict[str, float] = {}
    sweep: tuple[str, list] | None = None
    for key in _FLOAT_KEYS:
        entry = take(key)
        if entry is None:
            continue
        value, lineno = entry
        if value.startswith("["):
            if key not in _SWEEPABLE:
                raise ParseError("only mu, u_max, T accept grid values", key, lineno)
            grid = _parse_vector(value, key, lineno)
            if len(grid) != 3 or grid[2] != int(grid[2]) or int(grid[2]) < 1:
                raise ParseError("grid must be [start, stop, count]", key, lineno)
            if sweep is not None:
                raise ParseError("config declares more than one sweep grid", key, lineno)
            sweep = (key, [float(v) for v in np.linspace(grid[0], grid[1], int(grid[2]))])
            scalars[key] = float(grid[0])
            continue
        try:
            scalars[key] = float(value)
        except ValueError:
            raise ParseError("non-numeric value", key, lineno) from None
        if key in ("T", "u_max", "mu", "dt", "t_end", "v_tol", "event_tol", "R"):
            if not scalars[key] > 0:
                raise ParseError("value must be positive", key, lineno)

    x0_entry = take("x0")
    x0_list_entry = take("x0_list")
    if x0_list_entry is not None:
        value, lineno = x0_list_entry
        chunks = [c + "]" for c in value.split("]") if c.strip()]
        points = [_parse_vector(c, "x0_list", lineno) for c in chunks]
        if not points:
            raise ParseError("empty start-state list", "x0_list", lineno)
        if sweep is not None:
            raise ParseError("config declares more than one sweep grid", "x0_list", lineno)
        sweep = ("x0", points)
        x0 = points[0]
    elif x0_entry is not None:
        x0 = _parse_vector(x0_entry[0], "x0", x0_entry[1])
    else:
        raise ParseError("missing required key", "x0")

    if pairs:
        key, (_, lineno) = next(iter(pairs.items()))
        raise ParseError("unknown key", key, lineno)

    maker_kwargs = {
        k: scalars[k] for k in ("u_max", "mu", "T", "R") if k in scalars
    }
    bundle, cfg = REGISTRY[system](**maker_kwargs)
    sim = SimConfig(
        x0=tuple(x0),
        t_end=scalars.get("t_end", 4.0 * cfg.T),
        dt=scalars.get("dt", 1e-4),
        v_tol=scalars.get("v_tol", 1e-12),
        event_tol=scalars.get("event_tol", 1e-8),
    )
    return ParsedRun(system=system, bundle=bundle, cfg=cfg, sim=sim, sweep=sweep)


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def write_trajectory_csv(traj: Trajectory, path: str | Path) -> None:
    """Write the canonical trajectory CSV (deterministic bytes)."""
    n = traj.x.shape[1]
    header = "t," + ",".join(f"x{i + 1}" for i in range(n)) + ",u,V,region,set_distance,warp_gain"
    with open(path, "w", newline="\n") as fh:
        fh.write(header + "\n")
        for i in range(len(traj.t)):
            cells = [_fmt(traj.t[i])]
            cells += [_fmt(traj.x[i, j]) for j in range(n)]
            cells += [
                _fmt(traj.u[i]),
                _fmt(traj.v[i]),
                str(int(traj.region[i])),
                _fmt(traj.set_distance[i]),
                _fmt(traj.warp_gain[i]),
            ]
            fh.write(",".join(cells) + "\n")


def _summary_lines(run: ParsedRun, traj: Trajectory) -> list[str]:
    dc = derive_constants(run.cfg)
    times = measure_times(traj)
    opt = lambda v: "none" if v is None else _fmt(v)  # noqa: E731
    lines = [
        f"system: {run.system}",
        f"x0: {list(run.sim.x0)}",
        f"mu: {_fmt(run.cfg.mu)}",
        f"u_max: {_fmt(run.cfg.u_max)}",
        f"T: {_fmt(run.cfg.T)}",
        f"T_min: {_fmt(dc.T_min)}"
        + ("  [warning: T <= T_min]" if run.cfg.T <= dc.T_min else ""),
        f"dm_threshold: {_fmt(dc.dm_threshold)}",
        f"rows: {len(traj.t)}",
        f"stop: {traj.stop_reason}"
        + ("" if traj.converged else "  [not converged]"),
        f"t0: {opt(times.t0)}",
        f"t_m: {opt(times.t_m)}",
        f"t1: {opt(times.t1)}",
        f"reach_time: {opt(times.reach_time)}",
        f"max_abs_u: {_fmt(traj.max_abs_u)}",
        f"left_certified_annulus: {'yes' if traj.left_annulus else 'no'}",
    ]
    return lines


def cmd_simulate(config: str, out: str) -> int:
    """Run one closed-loop simulation; write trajectory.csv and summary.txt."""
    run = parse_config(config)
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    b = run.bundle
    try:
        traj = simulate(run.sim, run.cfg, b.model, b.clf, b.target)
    except IntegrationError as err:
        if err.trajectory is not None:
            write_trajectory_csv(err.trajectory, out_dir / "trajectory.csv")
            (out_dir / "summary.txt").write_text(
                "\n".join(_summary_lines(run, err.trajectory)) + f"\nfault: {err}\n"
            )
        print(f"integration fault: {err}", file=sys.stderr)
        return 1
    write_trajectory_csv(traj, out_dir / "trajectory.csv")
    lines = _summary_lines(run, traj)
    (out_dir / "summary.txt").write_text("\n".join(lines) + "\n")
    print("\n".join(lines))
    return 0


def _sweep_point(args: tuple) -> tuple[int, str, dict]:
    """Worker: run one grid point; returns (index, status, measurements)."""
    config, out_dir, param, value, index = args
    run = parse_config(config)
    if param == "x0":
        run = replace(run, sim=replace(run.sim, x0=tuple(value)))
        label = ";".join(_fmt(v) for v in value)
    else:
        kwargs = {"u_max": run.cfg.u_max, "mu": run.cfg.mu, "T": run.cfg.T}
        kwargs[param] = value
        bundle, cfg = REGISTRY[run.system](**kwargs)
        run = replace(run, bundle=bundle, cfg=cfg)
        label = _fmt(value)
    point_dir = Path(out_dir) / f"run_{index:03d}_{param}_{label.replace(';', '_')}"
    point_dir.mkdir(parents=True, exist_ok=True)
    b = run.bundle
    dc = derive_constants(run.cfg)
    try:
        traj = simulate(run.sim, run.cfg, b.model, b.clf, b.target)
    except IntegrationError as err:
        if err.trajectory is not None:
            write_trajectory_csv(err.trajectory, point_dir / "trajectory.csv")
        return index, "fault", {"value": label, "dm_threshold": dc.dm_threshold}
    write_trajectory_csv(traj, point_dir / "trajectory.csv")
    (point_dir / "summary.txt").write_text("\n".join(_summary_lines(run, traj)) + "\n")
    times = measure_times(traj)
    return index, "ok" if traj.converged else "not-converged", {
        "value": label,
        "reach_time": times.reach_time,
        "max_abs_u": traj.max_abs_u,
        "t_m": times.t_m,
        "dm_threshold": dc.dm_threshold,
    }


def cmd_sweep(config: str, out: str, jobs: int = 1) -> int:
    """Run every grid point (optionally in parallel); write sweep_table.csv."""
    run = parse_config(config)
    if run.sweep is None:
        print("config declares no sweep grid", file=sys.stderr)
        return 2
    param, values = run.sweep
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    tasks = [(config, str(out_dir), param, v, i) for i, v in enumerate(values)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_sweep_point, tasks))
    else:
        results = [_sweep_point(t) for t in tasks]
    results.sort(key=lambda r: r[0])

    opt = lambda v: "" if v is None else _fmt(v)  # noqa: E731
    with open(out_dir / "sweep_table.csv", "w", newline="\n") as fh:
        fh.write("param,value,reach_time,max_abs_u,t_m,dm_threshold,status\n")
        for _, status, row in results:
            fh.write(
                ",".join(
                    [
                        param,
                        str(row.get("value", "")),
                        opt(row.get("reach_time")),
                        opt(row.get("max_abs_u")),
                        opt(row.get("t_m")),
                        opt(row.get("dm_threshold")),
                        status,
                    ]
                )
                + "\n"
            )
    print(f"sweep over {param}: {len(values)} runs -> {out_dir / 'sweep_table.csv'}")
    return 0


def _write_polyline(points: np.ndarray, path: Path) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write("x1,x2\n")
        for row in points:
            fh.write(f"{_fmt(row[0])},{_fmt(row[1])}\n")
        if len(points):  # close the loop for plotting
            fh.write(f"{_fmt(points[0, 0])},{_fmt(points[0, 1])}\n")


def cmd_verify(config: str, out: str | None = None, seed: int = 0) -> int:
    """Run the verification suite; print PASS/FAIL per check; export overlays.

    Checks: the controller identity residual, bound estimation against the
    analytic constants, command continuity at region switches, and the decay
    and command envelopes inside the terminal region. With --out, polylines
    of the target-set, saturation, and terminal-region boundaries are written
    for downstream plotting.
    """
    run = parse_config(config)
    b = run.bundle
    dc = derive_constants(run.cfg)
    annulus = run.cfg.bounds.domain_annulus
    eff_annulus = (annulus[0], annulus[1]) if math.isfinite(annulus[1]) else (0.0, 3.0)
    rng = np.random.default_rng(seed)
    checks: list[tuple[str, bool, str]] = []

    residual = analysis.check_lemma1(
        b.model, b.clf, b.target, run.cfg.mu, 10_000, annulus=eff_annulus, rng=rng
    )
    checks.append(("controller-identity", residual <= 1e-9, f"max residual {residual:.3e}"))

    est = analysis.estimate_bounds(
        b.model, b.clf, b.target, eff_annulus, 4096, rng=rng
    ).profile
    ab = b.analytic_bounds
    bounds_ok = (
        abs(est.c1 - ab.c1) <= 0.05 * ab.c1 + 1e-12
        and abs(est.c2 - ab.c2) <= 0.05 * ab.c2 + 1e-12
        and abs(est.k1 - ab.k1) <= 0.05 * ab.k1 + 1e-12
    )
    checks.append(
        (
            "bound-estimation",
            bounds_ok,
            f"k1 {est.k1:.4f} (analytic {ab.k1}), c1 {est.c1:.4f}, c2 {est.c2:.4f}",
        )
    )

    traj = simulate(run.sim, run.cfg, b.model, b.clf, b.target)
    jump = analysis.max_switch_jump(traj, run.cfg, b.clf, b.model)
    checks.append(("switch-continuity", jump <= 1e-4, f"max |du| {jump:.3e}"))

    decay = analysis.decay_envelope_excess(traj, run.cfg, dc)
    checks.append(("decay-envelope", decay <= 1.0 + 1e-6, f"max V/envelope {decay:.9f}"))

    ctrl = analysis.control_envelope_excess(traj, run.cfg, dc)
    checks.append(("control-envelope", ctrl <= 1.0 + 1e-3, f"max |u|/envelope {ctrl:.9f}"))

    print(f"T_min: {_fmt(dc.T_min)} (configured T = {_fmt(run.cfg.T)})")
    failed = False
    for name, ok, detail in checks:
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
        failed = failed or not ok

    if out is not None:
        out_dir = Path(out)
        out_dir.mkdir(parents=True, exist_ok=True)
        boundary = analysis.d0_boundary(b.model, b.clf, b.target, run.cfg)
        _write_polyline(boundary.points, out_dir / "d0_boundary.csv")
        _write_polyline(
            analysis.level_set_boundary(b.clf.value, dc.dm_threshold, b.target),
            out_dir / "dm_boundary.csv",
        )
        _write_polyline(
            analysis.level_set_boundary(b.target.level_fn, 0.0, b.target),
            out_dir / "s_boundary.csv",
        )
        print(f"boundary polylines written to {out_dir}")
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ptreach",
        description="Prescribed-time set-reaching control: simulate, sweep, verify.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run one closed-loop simulation")
    p_sim.add_argument("--config", required=True)
    p_sim.add_argument("--out", required=True)

    p_sweep = sub.add_parser("sweep", help="run a parameter grid")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--out", required=True)
    p_sweep.add_argument("--jobs", type=int, default=1)

    p_verify = sub.add_parser("verify", help="run the verification suite")
    p_verify.add_argument("--config", required=True)
    p_verify.add_argument("--out", default=None, help="directory for boundary polylines")
    p_verify.add_argument("--seed", type=int, default=0)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "simulate":
            return cmd_simulate(args.config, args.out)
        if args.command == "sweep":
            return cmd_sweep(args.config, args.out, jobs=args.jobs)
        return cmd_verify(args.config, out=args.out, seed=args.seed)
    except (ConfigError, FileNotFoundError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Bound estimation and theorem-style diagnostics for closed-loop runs.

Everything here is sampling- or trajectory-based: numerical estimation of the
growth-bound constants, the algebraic controller identity check, boundary
tracing for the unsaturated region, reach-time bound comparisons, and the
envelope/continuity audits used by the verify command.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .controller import B_EPS, Region, saturated_command, ubar, ubar_from_lie
from .errors import AssumptionViolation, ConfigError
from .model import (
    BoundsProfile,
    Clf,
    ControllerConfig,
    DerivedConstants,
    SystemModel,
    TargetSet,
    lie_a0,
    lie_b0,
    set_distance,
)
from .simulator import Trajectory
from .timewarp import TimeWarp


@dataclass(frozen=True)
class BoundEstimate:
    """Tightest constants satisfied by all samples, widened by the safety factor."""

    profile: BoundsProfile
    sample_count: int
    worst_violators: list[tuple[np.ndarray, str, float]]


@dataclass(frozen=True)
class D0Boundary:
    """Ray-traced boundary of the unsaturated region |ubar(1,x)| = u_max."""

    points: np.ndarray  # (n_rays, 2), closed when plotted
    v_bar: float        # min V on the boundary
    x_max: float        # max surrogate set distance on the boundary


@dataclass(frozen=True)
class Theorem2Report:
    """Measured switch times against the analytic reach-time bounds.

    The t1 bound is the decay-derived form (1/m2) * ln((c2/c1) k x_max / u_max);
    comparisons are informational (`hypothesis_ok` False) when the start lies
    outside the certified ball of radius dbar_radius.
    """

    applicable: bool
    reason: str = ""
    hypothesis_ok: bool = True
    t0_measured: float | None = None
    t0_bound: float | None = None
    t0_pass: bool | None = None
    t1_measured: float | None = None
    t1_bound: float | None = None
    t1_pass: bool | None = None
    notes: list[str] = field(default_factory=list)


def _ray(phi: float) -> np.ndarray:
    return np.array([math.cos(phi), math.sin(phi)])


def _radius_for_distance(ts: TargetSet, direction: np.ndarray, d: float, r_hint: float) -> float:
    """Radius r with surrogate_distance(r * direction) = d, by bisection."""
    r_hi = max(r_hint, 1.0)
    for _ in range(200):
        if set_distance(ts, r_hi * direction) >= d:
            break
        r_hi *= 2.0
    else:
        raise ConfigError(f"could not bracket set distance {d} along a ray")
    r_lo = 0.0
    for _ in range(80):
        mid = 0.5 * (r_lo + r_hi)
        if set_distance(ts, mid * direction) < d:
            r_lo = mid
        else:
            r_hi = mid
    return r_hi


def sample_annulus(
    ts: TargetSet,
    annulus: tuple[float, float],
    n_samples: int,
    rng: np.random.Generator,
    dim: int = 2,
    box_halfwidth: float = 10.0,
) -> np.ndarray:
    """Sample states with surrogate distance in (d_min, d_max].

    Planar systems are sampled uniformly in (distance, angle); higher
    dimensions fall back to a box filtered to the annulus.
    """
    d_min, d_max = annulus
    if not (0 <= d_min < d_max):
        raise ConfigError(f"degenerate annulus {annulus}")
    if dim == 2:
        out = np.empty((n_samples, 2))
        for i in range(n_samples):
            d = d_min + (d_max - d_min) * (1.0 - rng.random())  # in (d_min, d_max]
            e = _ray(2.0 * math.pi * rng.random())
            out[i] = _radius_for_distance(ts, e, d, 1.0) * e
        return out
    rows = []
    while len(rows) < n_samples:
        x = rng.uniform(-box_halfwidth, box_halfwidth, size=dim)
        if d_min < set_distance(ts, x) <= d_max:
            rows.append(x)
    return np.asarray(rows)


def estimate_bounds(
    model: SystemModel,
    clf: Clf,
    ts: TargetSet,
    annulus: tuple[float, float],
    n_samples: int,
    rng: np.random.Generator | None = None,
    safety: float = 1.05,
) -> BoundEstimate:
    """Estimate the growth-bound constants from annulus samples.

    k1/c1 take the sampled minima shrunk by 1/safety; k2, l, c2 take the
    sampled maxima grown by safety. A sample with b0 = 0 at positive set
    distance falsifies the lower bound on b0 and raises AssumptionViolation.
    """
    if n_samples < 1000:
        raise ConfigError(f"need at least 1000 samples, got {n_samples}")
    rng = rng if rng is not None else np.random.default_rng(0)
    xs = sample_annulus(ts, annulus, n_samples, rng, dim=model.dim)

    extremes = {
        "min |b0|/d": (math.inf, None),
        "max |b0|/d": (-math.inf, None),
        "max |a0|/d^2": (-math.inf, None),
        "min V/d^2": (math.inf, None),
        "max V/d^2": (-math.inf, None),
    }

    def track(key: str, value: float, x: np.ndarray):
        best, _ = extremes[key]
        if key.startswith("min"):
            if value < best:
                extremes[key] = (value, x)
        elif value > best:
            extremes[key] = (value, x)

    for x in xs:
        d = set_distance(ts, x)
        b0 = abs(lie_b0(clf, model, x))
        if b0 <= B_EPS and d > 0:
            raise AssumptionViolation(
                f"b0 vanishes at {x} with set distance {d}; the lower bound k1 would be 0"
            )
        track("min |b0|/d", b0 / d, x)
        track("max |b0|/d", b0 / d, x)
        track("max |a0|/d^2", abs(lie_a0(clf, model, x)) / (d * d), x)
        v = float(clf.value(x))
        track("min V/d^2", v / (d * d), x)
        track("max V/d^2", v / (d * d), x)

    profile = BoundsProfile(
        k1=extremes["min |b0|/d"][0] / safety,
        k2=extremes["max |b0|/d"][0] * safety,
        l=extremes["max |a0|/d^2"][0] * safety,
        c1=extremes["min V/d^2"][0] / safety,
        c2=extremes["max V/d^2"][0] * safety,
        domain_annulus=annulus,
    )
    violators = [(x, key, value) for key, (value, x) in extremes.items()]
    return BoundEstimate(profile=profile, sample_count=n_samples, worst_violators=violators)


def check_lemma1(
    model: SystemModel,
    clf: Clf,
    ts: TargetSet,
    mu: float,
    n_samples: int,
    annulus: tuple[float, float] = (0.0, 3.0),
    rng: np.random.Generator | None = None,
) -> float:
    """Max relative residual of y*(a0 + b0*ubar(y,x)) = -mu*sqrt(a0^2 + b0^4).

    The identity is algebraic, so the residual measures pure roundoff.
    Samples with b0 in the dead zone are skipped (the identity assumes
    b0 != 0). y is drawn uniformly from (0, 1].
    """
    if n_samples < 1:
        raise ConfigError("need at least one sample")
    rng = rng if rng is not None else np.random.default_rng(0)
    xs = sample_annulus(ts, annulus, n_samples, rng, dim=model.dim)
    worst = 0.0
    for x in xs:
        a0 = lie_a0(clf, model, x)
        b0 = lie_b0(clf, model, x)
        if abs(b0) <= B_EPS:
            continue
        y = 1.0 - rng.random()
        w = math.sqrt(a0 * a0 + b0 ** 4)
        residual = abs(y * (a0 + b0 * ubar_from_lie(y, a0, b0, mu)) + mu * w)
        worst = max(worst, residual / (1.0 + mu * w))
    return worst


def d0_boundary(
    model: SystemModel,
    clf: Clf,
    ts: TargetSet,
    cfg: ControllerConfig,
    n_rays: int = 360,
    r_cap: float = 50.0,
) -> D0Boundary:
    """Trace |ubar(1,x)| = u_max by bisection along rays from the origin.

    Each ray starts just outside the target set (where the command vanishes
    by the small-gain property) and marches outward to bracket the crossing.
    """
    pts = np.empty((n_rays, 2))
    v_bar = math.inf
    x_max = 0.0
    for i in range(n_rays):
        e = _ray(2.0 * math.pi * i / n_rays)
        r_lo = _radius_for_distance(ts, e, 1e-9, 1.0)
        mag = lambda r: abs(ubar(1.0, r * e, clf, model, cfg.mu))  # noqa: E731
        r_hi = r_lo
        while mag(r_hi) <= cfg.u_max:
            r_hi *= 1.05
            if r_hi > r_cap:
                raise ConfigError(
                    f"command magnitude never reaches u_max={cfg.u_max} within r={r_cap}"
                )
        r_lo = r_hi / 1.05
        for _ in range(80):
            mid = 0.5 * (r_lo + r_hi)
            if mag(mid) <= cfg.u_max:
                r_lo = mid
            else:
                r_hi = mid
        x = 0.5 * (r_lo + r_hi) * e
        pts[i] = x
        v_bar = min(v_bar, float(clf.value(x)))
        x_max = max(x_max, set_distance(ts, x))
    return D0Boundary(points=pts, v_bar=v_bar, x_max=x_max)


def level_set_boundary(
    value_fn, level: float, ts: TargetSet, n_rays: int = 360, r_cap: float = 50.0
) -> np.ndarray:
    """Trace value_fn(x) = level along rays, marching outward from the target set."""
    pts = np.empty((n_rays, 2))
    for i in range(n_rays):
        e = _ray(2.0 * math.pi * i / n_rays)
        r_lo = _radius_for_distance(ts, e, 1e-9, 1.0)
        r_hi = r_lo
        while float(value_fn(r_hi * e)) <= level:
            r_hi *= 1.05
            if r_hi > r_cap:
                raise ConfigError(f"level {level} not bracketed within r={r_cap}")
        r_lo = r_hi / 1.05
        for _ in range(80):
            mid = 0.5 * (r_lo + r_hi)
            if float(value_fn(mid * e)) <= level:
                r_lo = mid
            else:
                r_hi = mid
        pts[i] = 0.5 * (r_lo + r_hi) * e
    return pts


def check_theorem2_bounds(
    traj: Trajectory,
    cfg: ControllerConfig,
    dc: DerivedConstants,
    v_bar: float,
    x_max: float | None = None,
) -> Theorem2Report:
    """Compare measured t0 and t1 = t_m - t0 against the analytic bounds.

    t0_bound = 2 (sqrt(V(0)) - sqrt(v_bar)) / gamma; runs starting inside the
    unsaturated region have t0 = 0 trivially.t1_bound is the decay-derived
    form (1/m2) ln((c2/c1) k x_max / u_max) and needs the boundary statistic
    x_max; comparisons are flagged informational when the start lies outside
    the certified ball.
    """
    notes: list[str] = []
    started_outside = int(traj.region[0]) == int(Region.OUTSIDE_D0)
    if started_outside and traj.t0 is None:
        return Theorem2Report(
            applicable=False, reason="trajectory never left the saturated region"
        )

    hypothesis_ok = bool(traj.set_distance[0] <= dc.dbar_radius)
    if not hypothesis_ok:
        notes.append(
            f"start has set distance {traj.set_distance[0]:.6g} outside the certified "
            f"ball radius {dc.dbar_radius:.6g}; bounds reported as informational"
        )

    t0_measured = traj.t0 if started_outside else 0.0
    if not started_outside:
        notes.append("start already inside the unsaturated region: t0 = 0 trivially")
    t0_bound = max(
        2.0 * (math.sqrt(traj.v[0]) - math.sqrt(max(v_bar, 0.0))) / dc.gamma, 0.0
    )
    t0_pass = t0_measured <= t0_bound

    t1_measured = t1_bound = t1_pass = None
    if traj.t0 is not None and traj.t_m is not None:
        t1_measured = traj.t_m - traj.t0
        if x_max is not None:
            b = cfg.bounds
            arg = (b.c2 / b.c1) * dc.k * x_max / cfg.u_max
            if arg > 1.0:
                t1_bound = math.log(arg) / dc.m2
                t1_pass = t1_measured <= t1_bound
            else:
                notes.append(
                    "decay bound degenerate: the saturation boundary already lies "
                    "inside the terminal region"
                )
        else:
            notes.append("x_max not supplied; t1 bound omitted")
    return Theorem2Report(
        applicable=True,
        hypothesis_ok=hypothesis_ok,
        t0_measured=t0_measured,
        t0_bound=t0_bound,
        t0_pass=t0_pass,
        t1_measured=t1_measured,
        t1_bound=t1_bound,
        t1_pass=t1_pass,
        notes=notes,
    )


def max_switch_jump(
    traj: Trajectory,
    cfg: ControllerConfig,
    clf: Clf,
    model: SystemModel,
) -> float:
    """Largest command discontinuity across the localized region switches.

    At each switch row the old-region branch is re-evaluated at the logged
    state and compared with the logged (new-region) command. Both sides use
    unit gain: the warp gain is exactly 1 at terminal-region entry.
    """
    worst = 0.0
    for i in range(1, len(traj.t)):
        if traj.region[i] > traj.region[i - 1]:
            x_e = traj.x[i]
            a0 = lie_a0(clf, model, x_e)
            b0 = lie_b0(clf, model, x_e)
            u_pre = saturated_command(Region(int(traj.region[i - 1])), 1.0, a0, b0, cfg)
            worst = max(worst, abs(u_pre - traj.u[i]))
    return worst


def decay_envelope_excess(traj: Trajectory, cfg: ControllerConfig, dc: DerivedConstants) -> float:
    """Max of V(s) / (V0 * exp(-mu*(c/c2)*s)) over terminal-region rows.

    s is reconstructed analytically from the logged time; V0 is the value at
    the first terminal-region row. At most 1 (up to roundoff) when the
    envelope constants hold along the trajectory.
    """
    idx = np.flatnonzero(traj.region == int(Region.IN_DM))
    if idx.size == 0 or traj.t_m is None:
        return 0.0
    warp = TimeWarp(cfg.T)
    v0 = traj.v[idx[0]]
    if v0 <= 0.0:
        return 0.0
    rate = cfg.mu * dc.c / cfg.bounds.c2
    worst = 0.0
    for i in idx:
        s = warp.theta_inverse(traj.t[i] - traj.t_m)
        worst = max(worst, traj.v[i] / (v0 * math.exp(-rate * s)))
    return worst


def control_envelope_excess(traj: Trajectory, cfg: ControllerConfig, dc: DerivedConstants) -> float:
    """Max of |u| / ((k/sqrt(c1)) sqrt(V0) exp((1/T - m2) s)) over terminal rows."""
    idx = np.flatnonzero(traj.region == int(Region.IN_DM))
    if idx.size == 0 or traj.t_m is None:
        return 0.0
    warp = TimeWarp(cfg.T)
    v0 = traj.v[idx[0]]
    if v0 <= 0.0:
        return 0.0
    amp = dc.k * math.sqrt(v0 / cfg.bounds.c1)
    worst = 0.0
    for i in idx:
        s = warp.theta_inverse(traj.t[i] - traj.t_m)
        worst = max(worst, abs(traj.u[i]) / (amp * math.exp((1.0 / cfg.T - dc.m2) * s)))
    return worst


def negative_drift_excess(
    traj: Trajectory,
    cfg: ControllerConfig,
    dc: DerivedConstants,
    clf: Clf,
    model: SystemModel,
) -> float:
    """Max of dV/dt + delta*mu*d over saturated-region rows with a0 < 0.

    dV/dt = a0 + b0*u is evaluated analytically at each logged row with the
    logged command. Nonpositive (up to roundoff) when the saturated branch
    achieves the guaranteed drift. Rows with a0 >= 0 are out of scope.
    """
    worst = -math.inf
    found = False
    for i in range(len(traj.t)):
        if traj.region[i] != int(Region.OUTSIDE_D0):
            continue
        a0 = lie_a0(clf, model, traj.x[i])
        if a0 >= 0:
            continue
        found = True
        b0 = lie_b0(clf, model, traj.x[i])
        vdot = a0 + b0 * traj.u[i]
        worst = max(worst, vdot + dc.delta * cfg.mu * traj.set_distance[i])
    return worst if found else -math.inf

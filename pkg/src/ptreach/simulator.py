"""Deterministic closed-loop integration with event localization.

Fixed-step RK4 in physical time t. Region switches and the convergence
threshold are localized by bisecting partial RK4 steps, so switch times are
resolved to ``event_tol`` rather than the step size. Inside the terminal
region each step is additionally capped at half the remaining time to the
warp singularity t_m + T: the closed-loop contraction rate there grows like
1/(1 - (t - t_m)/T) and a full dt step would leave RK4's stability region
exactly where V must cross v_tol. The cap is a deterministic function of
(t, t_m, dt), so repeat runs remain byte-identical.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .controller import ControllerState, Region, initial_state, saturated_command, ubar
from .errors import AnnulusWarning, ConfigError, IntegrationError
from .model import (
    Clf,
    ControllerConfig,
    SystemModel,
    TargetSet,
    derive_constants,
    lie_a0,
    lie_b0,
    set_distance,
)
from .timewarp import TimeWarp

# Fraction of the gap to the warp singularity a step may cover while in the
# terminal region; keeps rate*dt inside RK4's real-axis stability bound.
_SINGULARITY_STEP_FRACTION = 0.5
# Stop integrating at t_m + T*(1 - _GUARD); V -> 0 is guaranteed before the
# warp-gain floor would start shaping the command.
_GUARD = 1e-9


@dataclass(frozen=True)
class SimConfig:
    """Initial state, step size, horizon, and tolerances for one run."""

    x0: tuple[float, ...]
    t_end: float
    dt: float = 1e-4
    v_tol: float = 1e-12
    event_tol: float = 1e-8

    def __post_init__(self):
        if not self.dt > 0:
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if not self.t_end > 0:
            raise ConfigError(f"t_end must be positive, got {self.t_end}")
        if not 0 < self.event_tol < self.dt:
            raise ConfigError(
                f"event_tol must lie in (0, dt), got {self.event_tol} with dt={self.dt}"
            )
        if not self.v_tol > 0:
            raise ConfigError(f"v_tol must be positive, got {self.v_tol}")


@dataclass(frozen=True)
class Trajectory:
    """Column-wise log of one closed-loop run.

    ``reach_time`` is the first logged t with h(x) <= 0 or V <= v_tol: the
    closed loop approaches the set boundary asymptotically from outside, so
    set membership is recorded up to the convergence tolerance.
    """

    t: np.ndarray
    x: np.ndarray
    u: np.ndarray
    v: np.ndarray
    region: np.ndarray
    set_distance: np.ndarray
    warp_gain: np.ndarray
    t0: float | None
    t_m: float | None
    reach_time: float | None
    stop_reason: str
    left_annulus: bool

    @property
    def max_abs_u(self) -> float:
        return float(np.max(np.abs(self.u)))

    @property
    def converged(self) -> bool:
        return self.stop_reason == "converged"


@dataclass(frozen=True)
class SwitchTimes:
    """Measured first-entry and reach times; absent events stay None."""

    t0: float | None
    t1: float | None
    t_m: float | None
    reach_time: float | None


def rk4_step(dynamics: Callable[[float, np.ndarray], np.ndarray], t: float, x: np.ndarray, dt: float) -> np.ndarray:
    """One classical 4th-order Runge-Kutta step; raises on non-finite results."""
    if dt < 0:
        raise ValueError(f"dt must be nonnegative, got {dt}")
    k1 = dynamics(t, x)
    k2 = dynamics(t + 0.5 * dt, x + (0.5 * dt) * k1)
    k3 = dynamics(t + 0.5 * dt, x + (0.5 * dt) * k2)
    k4 = dynamics(t + dt, x + dt * k3)
    x_new = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    # NaN/inf propagate through the sum, so one scalar test covers the vector
    if not math.isfinite(float(x_new.sum())):
        raise IntegrationError(f"non-finite state after step from t={t}")
    return x_new


def locate_event(
    flow: Callable[[float], np.ndarray],
    predicate: Callable[[np.ndarray], float],
    t: float,
    dt: float,
    event_tol: float,
) -> tuple[float, np.ndarray]:
    """Localize a sign change of predicate(flow(tau)) for tau in [0, dt].

    ``flow(tau)`` advances the step-start state by tau. When the endpoint
    signs agree the interval is rescanned at dt/10 resolution to catch an
    interior double crossing; the first sign-changing subinterval is
    bisected. Returns the time and state on the far (crossed) side, so the
    returned state already satisfies the new region's membership test.
    """
    s_lo = predicate(flow(0.0))
    lo, hi = 0.0, dt
    s_hi = predicate(flow(hi))
    if (s_lo > 0) == (s_hi > 0) and s_hi != 0.0:
        bracket = None
        for i in range(1, 11):
            tau = dt * i / 10.0
            s = predicate(flow(tau))
            if (s > 0) != (s_lo > 0) or s == 0.0:
                bracket = (dt * (i - 1) / 10.0, tau)
                break
            s_lo = s
        if bracket is None:
            raise ValueError("predicate does not change sign over the step")
        lo, hi = bracket
        s_lo = predicate(flow(lo))
    while hi - lo > event_tol:
        mid = 0.5 * (lo + hi)
        s_mid = predicate(flow(mid))
        if (s_mid > 0) == (s_lo > 0) and s_mid != 0.0:
            lo = mid
        else:
            hi = mid
    return t + hi, flow(hi)


def simulate(
    sim: SimConfig,
    cfg: ControllerConfig,
    model: SystemModel,
    clf: Clf,
    ts: TargetSet,
) -> Trajectory:
    """Integrate the closed loop until convergence, the horizon, or the warp guard.

    Stops when V <= v_tol (localized by event bisection), when t reaches
    t_end, or when t reaches t_m + T*(1 - 1e-9). Region switches are
    event-localized and logged as extra rows. A non-finite state raises
    IntegrationError with the partial trajectory attached. Leaving the
    bounds-profile annulus sets ``left_annulus`` and warns once.
    """
    warp = TimeWarp(cfg.T)
    dc = derive_constants(cfg)
    x = np.asarray(sim.x0, dtype=float)
    if x.shape != (model.dim,):
        raise ConfigError(f"x0 has shape {x.shape}, expected ({model.dim},)")

    cols: dict[str, list] = {k: [] for k in ("t", "x", "u", "v", "region", "d", "y")}
    state = {"reach": None, "left": False}
    d_lo, d_hi = cfg.bounds.domain_annulus

    def closed_loop(region: Region, t_m: float | None):
        def dyn(tt: float, xx: np.ndarray) -> np.ndarray:
            f = model.drift(xx)
            g = model.input_map(xx)
            grad = clf.gradient(xx)
            a0 = float(np.dot(grad, f))
            b0 = float(np.dot(grad, g))
            y = warp.warp_gain(t_m, tt) if region == Region.IN_DM else 1.0
            return f + g * saturated_command(region, y, a0, b0, cfg)

        return dyn

    def append_row(t: float, xx: np.ndarray, st: ControllerState) -> float:
        y = warp.warp_gain(st.t_m, t) if st.region == Region.IN_DM else 1.0
        grad = clf.gradient(xx)
        a0 = float(np.dot(grad, model.drift(xx)))
        b0 = float(np.dot(grad, model.input_map(xx)))
        u = saturated_command(st.region, y, a0, b0, cfg)
        v = float(clf.value(xx))
        d = set_distance(ts, xx)
        cols["t"].append(t)
        cols["x"].append(xx.copy())
        cols["u"].append(u)
        cols["v"].append(v)
        cols["region"].append(int(st.region))
        cols["d"].append(d)
        cols["y"].append(y)
        if state["reach"] is None and (float(ts.level_fn(xx)) <= 0.0 or v <= sim.v_tol):
            state["reach"] = t
        if not state["left"] and not (d_lo <= d <= d_hi):
            state["left"] = True
            warnings.warn(
                f"state at t={t} has set distance {d} outside the certified "
                f"annulus [{d_lo}, {d_hi}]; bound checks are not valid there",
                AnnulusWarning,
                stacklevel=3,
            )
        return v

    def build(st: ControllerState, reason: str) -> Trajectory:
        return Trajectory(
            t=np.asarray(cols["t"]),
            x=np.asarray(cols["x"]),
            u=np.asarray(cols["u"]),
            v=np.asarray(cols["v"]),
            region=np.asarray(cols["region"], dtype=int),
            set_distance=np.asarray(cols["d"]),
            warp_gain=np.asarray(cols["y"]),
            t0=st.t0,
            t_m=st.t_m,
            reach_time=state["reach"],
            stop_reason=reason,
            left_annulus=state["left"],
        )

    def region_predicate(st: ControllerState):
        # Positive once the state has crossed into the next region.
        if st.region == Region.OUTSIDE_D0:
            return lambda xx: cfg.u_max - abs(ubar(1.0, xx, clf, model, cfg.mu))
        if st.region == Region.IN_D0:
            return lambda xx: dc.dm_threshold - float(clf.value(xx))
        return None

    t = 0.0
    st = initial_state(t, x, cfg, dc, clf, model)
    v = append_row(t, x, st)
    if v <= sim.v_tol:
        return build(st, "converged")

    dyn = closed_loop(st.region, st.t_m)
    pred = region_predicate(st)
    pred_x = pred(x) if pred is not None else None

    try:
        while True:
            dt_eff = min(sim.dt, sim.t_end - t)
            if st.region == Region.IN_DM:
                t_sing = st.t_m + cfg.T
                t_guard = st.t_m + cfg.T * (1.0 - _GUARD)
                if t >= t_guard:
                    return build(st, "warp-guard")
                dt_eff = min(dt_eff, _SINGULARITY_STEP_FRACTION * (t_sing - t))
                if t + dt_eff > t_guard:
                    dt_eff = t_guard - t
            if dt_eff <= 0.0:
                return build(st, "horizon")

            x_new = rk4_step(dyn, t, x, dt_eff)
            flow = lambda tau: rk4_step(dyn, t, x, tau)  # noqa: E731

            if pred is not None:
                pred_new = pred(x_new)
                if pred_x < 0.0 <= pred_new:
                    t_e, x_e = locate_event(flow, pred, t, dt_eff, sim.event_tol)
                    next_region = Region(int(st.region) + 1)
                    st = replace(
                        st,
                        region=next_region,
                        t0=st.t0 if st.t0 is not None else t_e,
                        t_m=t_e if next_region == Region.IN_DM else st.t_m,
                    )
                    t, x = t_e, x_e
                    v = append_row(t, x, st)
                    if v <= sim.v_tol:
                        return build(st, "converged")
                    dyn = closed_loop(st.region, st.t_m)
                    pred = region_predicate(st)
                    pred_x = pred(x) if pred is not None else None
                    continue
                pred_x = pred_new

            v_new = float(clf.value(x_new))
            if v_new <= sim.v_tol:
                t_c, x_c = locate_event(
                    flow, lambda xx: sim.v_tol - float(clf.value(xx)), t, dt_eff, sim.event_tol
                )
                t, x = t_c, x_c
                append_row(t, x, st)
                return build(st, "converged")

            t, x, v = t + dt_eff, x_new, v_new
            append_row(t, x, st)
            if t >= sim.t_end:
                return build(st, "horizon")
    except IntegrationError as err:
        raise IntegrationError(str(err), trajectory=build(st, "fault")) from None


def measure_times(traj: Trajectory) -> SwitchTimes:
    """Switch and reach times read from the event-localized rows."""
    t1 = None
    if traj.t0 is not None and traj.t_m is not None:
        t1 = traj.t_m - traj.t0
    return SwitchTimes(t0=traj.t0, t1=t1, t_m=traj.t_m, reach_time=traj.reach_time)

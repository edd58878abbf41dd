"""Piecewise prescribed-time control law with region latching and saturation.

Three operating regions, entered in one direction only:

* OUTSIDE_D0 -- the unsaturated command would exceed u_max; apply the
  saturated sign u_max * sign(ubar(1, x)).
* IN_D0 -- apply the Sontag-style command ubar(1, x) unchanged.
* IN_DM -- terminal sublevel set V <= c1 (u_max/k)^2; apply ubar(y, x)
  with the time-warp gain y, which amplifies the damping term so that the
  remaining convergence completes within the prescribed horizon.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import IntEnum

import numpy as np

from .model import Clf, ControllerConfig, DerivedConstants, SystemModel, lie_a0, lie_b0
from .timewarp import TimeWarp

# Dead zone standing in for the measure-zero b0 = 0 branch; |ubar| -> 0 with
# the set distance, so a small zone does not break continuity.
B_EPS = 1e-12


class Region(IntEnum):
    OUTSIDE_D0 = 0
    IN_D0 = 1
    IN_DM = 2


@dataclass(frozen=True)
class ControllerState:
    """Region latch plus first-entry times into D_0 and D_M."""

    region: Region = Region.OUTSIDE_D0
    t0: float | None = None
    t_m: float | None = None


def ubar_from_lie(y: float, a0: float, b0: float, mu: float, b_eps: float = B_EPS) -> float:
    """Sontag-style command from precomputed Lie derivatives.

    -(a0 + (mu/y) sqrt(a0^2 + b0^4)) / b0, and 0 on the |b0| <= b_eps zone.
    Along the closed loop this enforces y*(a0 + b0*u) = -mu sqrt(a0^2+b0^4).
    """
    if abs(b0) <= b_eps:
        return 0.0
    # hypot(a0, b0^2) = sqrt(a0^2 + b0^4) without overflow on extreme states
    return -(a0 + (mu / y) * math.hypot(a0, b0 * b0)) / b0


def ubar(y: float, x, clf: Clf, model: SystemModel, mu: float, b_eps: float = B_EPS) -> float:
    """Sontag-style command at state x with damping amplification 1/y."""
    if not y > 0:
        raise ValueError(f"gain y must be positive, got {y}")
    return ubar_from_lie(y, lie_a0(clf, model, x), lie_b0(clf, model, x), mu, b_eps)


def dm_threshold(dc: DerivedConstants) -> float:
    """V-level bounding the terminal region: c1 * (u_max/k)^2."""
    return dc.dm_threshold


def classify(
    x,
    st: ControllerState,
    cfg: ControllerConfig,
    dc: DerivedConstants,
    clf: Clf,
    model: SystemModel,
) -> Region:
    """Region of x, honoring the one-way latch in st.

    The terminal region is forward invariant and the latch enforces that
    numerically: a latched region is never left even if integration rounding
    momentarily places V above the threshold again.
    """
    if st.region == Region.IN_DM:
        return Region.IN_DM
    if float(clf.value(np.asarray(x, dtype=float))) <= dc.dm_threshold:
        return Region.IN_DM
    if st.region == Region.IN_D0:
        return Region.IN_D0
    if abs(ubar(1.0, x, clf, model, cfg.mu)) <= cfg.u_max:
        return Region.IN_D0
    return Region.OUTSIDE_D0


def saturated_command(
    region: Region, y: float, a0: float, b0: float, cfg: ControllerConfig
) -> float:
    """Per-region command with the final hard clamp to [-u_max, u_max].

    The clamp only engages inside the terminal region when the warp-gain
    floor is active near the singularity, where the exact-arithmetic bound
    |ubar| <= u_max is no longer guaranteed.
    """
    if region == Region.IN_DM:
        u = ubar_from_lie(y, a0, b0, cfg.mu)
    elif region == Region.IN_D0:
        u = ubar_from_lie(1.0, a0, b0, cfg.mu)
    else:
        ub = ubar_from_lie(1.0, a0, b0, cfg.mu)
        # sign(0) = 0: unreachable under the growth bounds but keeps u total
        u = cfg.u_max * ((ub > 0) - (ub < 0))
    return min(max(u, -cfg.u_max), cfg.u_max)


def initial_state(
    t: float,
    x,
    cfg: ControllerConfig,
    dc: DerivedConstants,
    clf: Clf,
    model: SystemModel,
) -> ControllerState:
    """Latch the starting region; entry times are t for regions already entered."""
    region = classify(x, ControllerState(), cfg, dc, clf, model)
    t0 = t if region >= Region.IN_D0 else None
    t_m = t if region == Region.IN_DM else None
    return ControllerState(region=region, t0=t0, t_m=t_m)


def control(
    t: float,
    x,
    st: ControllerState,
    cfg: ControllerConfig,
    dc: DerivedConstants,
    warp: TimeWarp,
    clf: Clf,
    model: SystemModel,
) -> tuple[float, ControllerState]:
    """Command at (t, x) and the controller state with entry times latched.

    Continuity across switches comes for free: on the D_0 boundary the
    saturated and unsaturated branches agree in magnitude, and at the
    terminal-region entry the warp gain starts at exactly 1.
    """
    region = classify(x, st, cfg, dc, clf, model)
    if region > st.region:
        t0 = st.t0 if st.t0 is not None else t
        t_m = t if region == Region.IN_DM else st.t_m
        st = replace(st, region=region, t0=t0, t_m=t_m)
    y = warp.warp_gain(st.t_m, t) if region == Region.IN_DM else 1.0
    a0 = lie_a0(clf, model, x)
    b0 = lie_b0(clf, model, x)
    return saturated_command(region, y, a0, b0, cfg), st

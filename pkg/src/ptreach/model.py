"""System, Lyapunov function, target set, and constants ledger.

Hosts the control-affine model xdot = f(x) + g(x) u (scalar u), the target
set S = {x | h(x) <= 0} with its computable surrogate distance, the CLF V
with its growth envelopes, and the constants derived from them that size the
controller's operating regions.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConfigError, HorizonWarning

VectorFn = Callable[[np.ndarray], np.ndarray]
ScalarFn = Callable[[np.ndarray], float]


@dataclass(frozen=True)
class SystemModel:
    """Control-affine dynamics xdot = drift(x) + input_map(x) * u, scalar u."""

    dim: int
    drift: VectorFn
    input_map: VectorFn

    def __post_init__(self):
        if not isinstance(self.dim, int) or self.dim < 1:
            raise ConfigError(f"state dimension must be a positive integer, got {self.dim}")


@dataclass(frozen=True)
class TargetSet:
    """Target set S = {x | level_fn(x) <= 0} with a surrogate set distance.

    ``surrogate_distance`` must be continuous, nonnegative, and zero exactly
    on S. When omitted it defaults to max(level_fn(x), 0), which matches how
    the growth-bound constants are usually established in closed form.
    """

    level_fn: ScalarFn
    surrogate_distance: ScalarFn | None = None

    def __post_init__(self):
        if self.surrogate_distance is None:
            level = self.level_fn
            object.__setattr__(
                self, "surrogate_distance", lambda x: max(float(level(x)), 0.0)
            )


@dataclass(frozen=True)
class Clf:
    """Continuously differentiable positive-definite V with its gradient.

    ``gradient`` must match central finite differences of ``value`` to
    relative 1e-6; V vanishes exactly where the surrogate distance does
    (on the sampled domain outside the target set).
    """

    value: ScalarFn
    gradient: VectorFn


@dataclass(frozen=True)
class BoundsProfile:
    """Growth-bound constants, valid on an annulus of surrogate distances.

    k1*d <= |b0(x)| <= k2*d and |a0(x)| <= l*d^2 with d the surrogate set
    distance, plus the quadratic CLF envelope c1*d^2 <= V(x) <= c2*d^2.
    ``domain_annulus`` = (inner, outer) records the d-range on which the
    constants were established; simulation warns when a trajectory leaves it.
    """

    k1: float
    k2: float
    l: float
    c1: float
    c2: float
    domain_annulus: tuple[float, float] = (0.0, math.inf)

    def __post_init__(self):
        for name in ("k1", "k2", "l", "c1", "c2"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"bound constant {name} must be positive")
        if self.k1 > self.k2:
            raise ConfigError(f"k1={self.k1} must not exceed k2={self.k2}")
        if self.c1 > self.c2:
            raise ConfigError(f"c1={self.c1} must not exceed c2={self.c2}")
        inner, outer = self.domain_annulus
        if inner < 0 or not outer > inner:
            raise ConfigError(f"invalid annulus {self.domain_annulus}")


@dataclass(frozen=True)
class ControllerConfig:
    """Tuning parameter mu, input bound u_max, horizon T, and the bounds profile."""

    mu: float
    u_max: float
    T: float
    bounds: BoundsProfile

    def __post_init__(self):
        for name in ("mu", "u_max", "T"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")


@dataclass(frozen=True)
class DerivedConstants:
    """Constants computed from a ControllerConfig; see derive_constants."""

    k: float
    c: float
    delta: float
    gamma: float
    m2: float
    T_min: float
    dm_threshold: float
    dbar_radius: float


def _as_state(x, dim: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (dim,):
        raise ConfigError(f"state has shape {x.shape}, expected ({dim},)")
    return x


def lie_a0(clf: Clf, model: SystemModel, x) -> float:
    """Lie derivative of V along the drift: grad V(x) . f(x)."""
    x = _as_state(x, model.dim)
    return float(np.dot(clf.gradient(x), model.drift(x)))


def lie_b0(clf: Clf, model: SystemModel, x) -> float:
    """Lie derivative of V along the input map: grad V(x) . g(x)."""
    x = _as_state(x, model.dim)
    return float(np.dot(clf.gradient(x), model.input_map(x)))


def set_distance(ts: TargetSet, x) -> float:
    """Surrogate distance from x to the target set; zero iff h(x) <= 0."""
    return float(ts.surrogate_distance(np.asarray(x, dtype=float)))


def derive_constants(cfg: ControllerConfig) -> DerivedConstants:
    """Compute the derived constants of the saturated prescribed-time design.

    k = l(1+mu)/k1 + mu*k2 bounds |ubar(1,x)|/d; c = k1^2 lower-bounds
    sqrt(a0^2+b0^4)/d^2; delta = c*u_max/k and gamma = mu*delta/sqrt(c2)
    drive the reach-time estimates; m2 = mu*c/(2 c2) is the distance decay
    rate; T_min = 2 c2/(mu c) is the horizon floor under which the warped
    command can exceed u_max; dm_threshold = c1 (u_max/k)^2 is the V-level
    of the terminal region; dbar_radius bounds the surrogate distance on
    which the finite-time reach estimate is certified.
    """
    b = cfg.bounds
    k = b.l * (1.0 + cfg.mu) / b.k1 + cfg.mu * b.k2
    c = b.k1 * b.k1
    delta = c * cfg.u_max / k
    gamma = cfg.mu * delta / math.sqrt(b.c2)
    m2 = cfg.mu * c / (2.0 * b.c2)
    t_min = 2.0 * b.c2 / (cfg.mu * c)
    dm_threshold = b.c1 * (cfg.u_max / k) ** 2
    dbar_radius = cfg.mu * c * cfg.u_max * b.c1 / (b.l * b.c2 * k)
    dc = DerivedConstants(k, c, delta, gamma, m2, t_min, dm_threshold, dbar_radius)
    for name in dc.__dataclass_fields__:
        if not getattr(dc, name) > 0:
            raise ConfigError(f"derived constant {name} is not positive")
    return dc


def warn_if_horizon_tight(cfg: ControllerConfig, dc: DerivedConstants | None = None) -> float:
    """Warn (not fail) when T <= T_min; the floor is sufficient, not necessary.

    Returns T_min so callers can echo it in run summaries.
    """
    if dc is None:
        dc = derive_constants(cfg)
    if cfg.T <= dc.T_min:
        warnings.warn(
            f"configured T={cfg.T} does not exceed the analytic floor "
            f"T_min={dc.T_min}; the in-region command bound is no longer certified",
            HorizonWarning,
            stacklevel=2,
        )
    return dc.T_min

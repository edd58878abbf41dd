"""Planar benchmark: reach the unit disk against destabilizing drift.

x1' = x2 + x1*p + x1*u,  x2' = -x1 + zeta(x2)*p + x2*u,  p = x1^2 + x2^2 - 1.

With u = 0 the radial term pushes trajectories away from the disk. The CLF
V = p^2/2 vanishes exactly on the disk boundary, and the surrogate set
distance max(p, 0) makes every growth bound available in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConfigError
from .model import (
    BoundsProfile,
    Clf,
    ControllerConfig,
    SystemModel,
    TargetSet,
    warn_if_horizon_tight,
)


def zeta(v: float) -> float:
    """Odd saturating nonlinearity (0.8 + 0.2 e^{-100|v|}) tanh(v)."""
    return (0.8 + 0.2 * math.exp(-100.0 * abs(v))) * math.tanh(v)


def _drift(x: np.ndarray) -> np.ndarray:
    p = x[0] * x[0] + x[1] * x[1] - 1.0
    return np.array([x[1] + x[0] * p, -x[0] + zeta(x[1]) * p])


def _input_map(x: np.ndarray) -> np.ndarray:
    return np.array([x[0], x[1]])


def _value(x: np.ndarray) -> float:
    p = x[0] * x[0] + x[1] * x[1] - 1.0
    return 0.5 * p * p


def _gradient(x: np.ndarray) -> np.ndarray:
    p = x[0] * x[0] + x[1] * x[1] - 1.0
    return np.array([2.0 * p * x[0], 2.0 * p * x[1]])


def _level(x: np.ndarray) -> float:
    return float(x[0] * x[0] + x[1] * x[1] - 1.0)


def analytic_a0_b0(x) -> tuple[float, float]:
    """Closed-form Lie derivatives: a0 = 2 p^2 (x1^2 + x2 zeta(x2)), b0 = 2 p |x|^2."""
    x1, x2 = float(x[0]), float(x[1])
    q = x1 * x1 + x2 * x2
    p = q - 1.0
    return 2.0 * p * p * (x1 * x1 + x2 * zeta(x2)), 2.0 * p * q


@dataclass(frozen=True)
class ExampleBundle:
    """Benchmark system, CLF, target set, and analytic bounds profile."""

    model: SystemModel
    clf: Clf
    target: TargetSet
    analytic_bounds: BoundsProfile


def make_example(
    u_max: float = 7.0, mu: float = 0.05, T: float = 5.0, R: float = 2.0
) -> tuple[ExampleBundle, ControllerConfig]:
    """Bundle the benchmark with bounds certified on the annulus 1 <= |x| <= R.

    On that annulus (set distance d = |x|^2 - 1 in (0, R^2 - 1]):
    b0/d = 2|x|^2 lies in [2, 2R^2], |a0|/d^2 = 2|x1^2 + x2 zeta(x2)| is at
    most 2(R^2 + R) (conservative but exact), and V = d^2/2 identically, so
    c1 = c2 = 1/2. Warns when T does not exceed the derived floor T_min.
    """
    if not R > 1:
        raise ConfigError(f"annulus radius R must exceed 1, got {R}")
    bounds = BoundsProfile(
        k1=2.0,
        k2=2.0 * R * R,
        l=2.0 * (R * R + R),
        c1=0.5,
        c2=0.5,
        domain_annulus=(0.0, R * R - 1.0),
    )
    bundle = ExampleBundle(
        model=SystemModel(dim=2, drift=_drift, input_map=_input_map),
        clf=Clf(value=_value, gradient=_gradient),
        target=TargetSet(level_fn=_level),
        analytic_bounds=bounds,
    )
    cfg = ControllerConfig(mu=mu, u_max=u_max, T=T, bounds=bounds)
    warn_if_horizon_tight(cfg)
    return bundle, cfg


# Systems addressable from config files.
REGISTRY: dict[str, Callable[..., tuple[ExampleBundle, ControllerConfig]]] = {
    "paper-example": make_example,
}

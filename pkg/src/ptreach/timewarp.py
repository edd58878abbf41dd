"""Time dilation between the prescribed horizon [0, T) and the stretched axis [0, inf).

The map is t = theta(s) = T*(1 - exp(-s/T)): theta(0) = 0, theta'(0) = 1,
theta is strictly increasing, theta -> T and theta' -> 0 as s -> inf.
Asymptotic convergence on the s axis therefore lands by time T on the t axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigError


@dataclass(frozen=True)
class TimeWarp:
    """Exponential time dilation with horizon ``T`` (seconds).

    ``y_floor`` bounds the gain returned by :meth:`warp_gain` away from zero;
    the controller's 1/y factor would otherwise overflow as t approaches the
    singularity at t_m + T.
    """

    T: float
    y_floor: float = 1e-9

    def __post_init__(self):
        if not self.T > 0:
            raise ConfigError(f"horizon T must be positive, got {self.T}")
        if not 0 < self.y_floor < 1:
            raise ConfigError(f"y_floor must lie in (0, 1), got {self.y_floor}")

    def theta(self, s: float) -> float:
        """Dilated time t for stretched time s >= 0; lies in [0, T)."""
        if s < 0:
            raise ValueError(f"stretched time must be >= 0, got {s}")
        return -self.T * math.expm1(-s / self.T)

    def theta_prime(self, s: float) -> float:
        """Derivative d theta/ds = exp(-s/T); lies in (0, 1]."""
        if s < 0:
            raise ValueError(f"stretched time must be >= 0, got {s}")
        return math.exp(-s / self.T)

    def theta_inverse(self, t: float) -> float:
        """Stretched time s for dilated time 0 <= t < T."""
        if not 0 <= t < self.T:
            raise ValueError(f"dilated time must lie in [0, {self.T}), got {t}")
        return -self.T * math.log1p(-t / self.T)

    def warp_gain(self, t_m: float, t: float) -> float:
        """Gain theta'(theta_inverse(t - t_m)) = 1 - (t - t_m)/T, clamped at y_floor.

        ``t_m`` is the entry time into the terminal region; ``t >= t_m``.
        The closed form is exact for this warp, so no inverse needs solving.
        """
        if t < t_m:
            raise ValueError(f"t={t} precedes the entry time t_m={t_m}")
        return max(1.0 - (t - t_m) / self.T, self.y_floor)

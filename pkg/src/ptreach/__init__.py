"""Prescribed-time set-reaching control under input saturation.

Synthesis of the piecewise saturated controller, deterministic closed-loop
simulation with event-localized switching, numerical verification of the
design's identities and envelopes, and the planar benchmark system.
"""

from .controller import (
    B_EPS,
    ControllerState,
    Region,
    classify,
    control,
    dm_threshold,
    initial_state,
    saturated_command,
    ubar,
    ubar_from_lie,
)
from .errors import (
    AnnulusWarning,
    AssumptionViolation,
    ConfigError,
    HorizonWarning,
    IntegrationError,
    ParseError,
)
from .example import ExampleBundle, analytic_a0_b0, make_example, zeta
from .model import (
    BoundsProfile,
    Clf,
    ControllerConfig,
    DerivedConstants,
    SystemModel,
    TargetSet,
    derive_constants,
    lie_a0,
    lie_b0,
    set_distance,
    warn_if_horizon_tight,
)
from .simulator import (
    SimConfig,
    SwitchTimes,
    Trajectory,
    locate_event,
    measure_times,
    rk4_step,
    simulate,
)
from .timewarp import TimeWarp

__version__ = "0.1.0"

__all__ = [
    "AnnulusWarning",
    "AssumptionViolation",
    "B_EPS",
    "BoundsProfile",
    "Clf",
    "ConfigError",
    "ControllerConfig",
    "ControllerState",
    "DerivedConstants",
    "ExampleBundle",
    "HorizonWarning",
    "IntegrationError",
    "ParseError",
    "Region",
    "SimConfig",
    "SwitchTimes",
    "SystemModel",
    "TargetSet",
    "TimeWarp",
    "Trajectory",
    "analytic_a0_b0",
    "classify",
    "control",
    "derive_constants",
    "dm_threshold",
    "initial_state",
    "lie_a0",
    "lie_b0",
    "locate_event",
    "make_example",
    "measure_times",
    "rk4_step",
    "saturated_command",
    "set_distance",
    "simulate",
    "ubar",
    "ubar_from_lie",
    "warn_if_horizon_tight",
    "zeta",
]

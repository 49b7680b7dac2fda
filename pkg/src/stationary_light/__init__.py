"""Stationary light pulses in EIT media: 1D simulation and analytics."""

from .params import (
    DegenerateControlError,
    Grid,
    MixingAngles,
    PhysicalParams,
    group_velocity,
    mixing_angles,
    phase_matched_detuning,
)
from .profiles import (
    CombProfile,
    CombTone,
    ControlProfile,
    FocusPath,
    GaussianFoci,
    HomogeneousProfile,
    TanhRamp,
    TanhSchedule,
    control_field_at,
)

__version__ = "0.1.0"

__all__ = [
    "PhysicalParams",
    "Grid",
    "MixingAngles",
    "mixing_angles",
    "group_velocity",
    "phase_matched_detuning",
    "DegenerateControlError",
    "ControlProfile",
    "HomogeneousProfile",
    "TanhSchedule",
    "GaussianFoci",
    "CombProfile",
    "CombTone",
    "TanhRamp",
    "FocusPath",
    "control_field_at",
    "__version__",
]

"""Arrival-time distributions from space-conditional quantum states.

Time-conditional states ``psi(x|t)`` and space-conditional states
``phi(t, y|x)`` of a free particle, with the densities, reference
distributions and constraint checks that compare them.
"""

from .arrival import (
    arrival_density,
    arrival_time_density,
    detect_backflow,
    kijowski_reference,
    mode_superposition,
    moments,
    probability_current,
    sc_conditional_y_at_time,
    sc_cumulative_y,
)
from .constraint import (
    ConstraintReport,
    HistoryState,
    build_history_space,
    build_history_time,
    constraint_residual,
    project_slice,
    slice_norm_report,
    verify_generalized_evolution,
)
from .distributions import ArrivalDistribution, FluxSeries
from .errors import (
    ConfigError,
    DomainError,
    NoSupportError,
    SingularCoefficientError,
    StageError,
    StepSizeError,
    TruncationError,
    WindowError,
)
from .qm import ScalarField, TCMomentumAmplitude, tc_position_field
from .spectral import GaussianPacketSpec, PhysicalConstants, UniformGrid1D, make_grid
from .sts import (
    SCEnergyAmplitude,
    SCMomentumAmplitude,
    SpinorField,
    energy_to_momentum,
    momentum_to_energy,
    sc_field,
    sc_norm,
    sc_schrodinger_residual,
    shift_to_plane,
)

__version__ = "0.1.0"

__all__ = [
    "ArrivalDistribution",
    "ConfigError",
    "ConstraintReport",
    "DomainError",
    "FluxSeries",
    "GaussianPacketSpec",
    "HistoryState",
    "NoSupportError",
    "PhysicalConstants",
    "ScalarField",
    "SCEnergyAmplitude",
    "SCMomentumAmplitude",
    "SingularCoefficientError",
    "SpinorField",
    "StageError",
    "StepSizeError",
    "TCMomentumAmplitude",
    "TruncationError",
    "UniformGrid1D",
    "WindowError",
    "arrival_density",
    "arrival_time_density",
    "build_history_space",
    "build_history_time",
    "constraint_residual",
    "detect_backflow",
    "energy_to_momentum",
    "kijowski_reference",
    "make_grid",
    "mode_superposition",
    "moments",
    "momentum_to_energy",
    "probability_current",
    "project_slice",
    "sc_conditional_y_at_time",
    "sc_cumulative_y",
    "sc_field",
    "sc_norm",
    "sc_schrodinger_residual",
    "shift_to_plane",
    "slice_norm_report",
    "tc_position_field",
    "verify_generalized_evolution",
]

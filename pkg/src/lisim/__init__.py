"""Coupled-dipole LIS MIMO simulator: channel model, MF/WMMSE precoding, experiments."""

__version__ = "0.1.0"

from .dipole import (
    FREE_SPACE_IMPEDANCE,
    Geometry,
    PhysicalConfig,
    linear_array,
    mutual_impedance,
    planar_array,
    self_impedance_real,
    ue_line,
)
from .errors import ConfigError, NumericalError
from .network import (
    ChannelModel,
    Constraints,
    ImpedanceSystem,
    assemble,
    build_channel,
    channel_matrix,
    loss_resistance_from_efficiency,
    precoded_powers,
    precoded_received_powers,
    radiated_resistance_matrix,
    received_currents,
    received_power_per_ue,
    thermal_loss,
    transmit_power,
)
from .precoding import (
    MetricsReport,
    PrecoderSolution,
    ReceiveState,
    mf_dual,
    mf_loss_constrained,
    mf_radiated_constrained,
    sinr_per_user,
    sum_capacity,
    wmmse,
)
from .scenario import ResultRow, ScenarioConfig, SweepSpec, run, sweep

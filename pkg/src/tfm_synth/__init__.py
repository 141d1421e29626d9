"""Simulation and inverse design of time-frequency-mode biphoton sources.

An integrated source built from an N-tap FIR pump shaper, an M-stage
coupled-ring resonator, and spontaneous four-wave mixing generates
biphoton states entangled in the time-frequency Hermite-Gaussian basis.
This package provides the forward model (pump shaping, coupled-mode
resonances, phase matching, joint spectral amplitude), the analysis
stack (Schmidt decomposition, mode projection, fidelity, pair rate),
and the inverse-design loop that recovers shaper and coupler settings
for a requested target state.
"""

from .config import (
    ConfigError,
    DeviceConfig,
    PRESET_NAMES,
    load_config,
    load_preset,
    preset_path,
    save_config,
)
from .simulate import SimulationResult, analysis_report, simulate

__version__ = "1.0.0"

__all__ = [
    "ConfigError",
    "DeviceConfig",
    "PRESET_NAMES",
    "SimulationResult",
    "analysis_report",
    "load_config",
    "load_preset",
    "preset_path",
    "save_config",
    "simulate",
    "__version__",
]

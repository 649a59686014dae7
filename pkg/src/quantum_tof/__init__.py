"""Quantum and classical time-of-flight distributions of a falling matter-wave cat state."""
from .model import CatConfig, Gravity, Particle, TimeGrid, ValidatedConfig, as_validated, sodium
from .current import TofSignal, current_breakdown, quantum_tof
from .classical import ThermalCloud, classical_distribution, monte_carlo_tof
from .analysis import FringeReport, fringe_report, sweep

__version__ = "0.1.0"

__all__ = [
    "CatConfig",
    "FringeReport",
    "Gravity",
    "Particle",
    "ThermalCloud",
    "TimeGrid",
    "TofSignal",
    "ValidatedConfig",
    "as_validated",
    "classical_distribution",
    "current_breakdown",
    "fringe_report",
    "monte_carlo_tof",
    "quantum_tof",
    "sodium",
    "sweep",
]

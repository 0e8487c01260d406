"""Pulse-efficient transpilation, pulse scheduling and noisy simulation for small QML experiments."""

from .circuit import Circuit, Gate, build_feature_map, build_hva_tfim, build_qnn_ansatz
from .device import DeviceModel
from .noise import NoiseConfig
from .scheduler import insert_dd, schedule
from .transpiler import transpile

__version__ = "0.1.0"

__all__ = [
    "Circuit",
    "DeviceModel",
    "Gate",
    "NoiseConfig",
    "build_feature_map",
    "build_hva_tfim",
    "build_qnn_ansatz",
    "insert_dd",
    "schedule",
    "transpile",
    "__version__",
]

"""Device duration and noise parameters."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace
from typing import Any, Mapping

import numpy as np


def _per_qubit(value, n: int, name: str) -> tuple[float, ...]:
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        arr = np.full(n, float(arr))
    if arr.shape != (n,):
        raise ValueError(f"{name} must be a scalar or have {n} entries")
    return tuple(float(v) for v in arr)


@dataclass(frozen=True)
class DeviceModel:
    """Linear-chain device; times in ns, rates in rad/ns.

    The defaults are order-of-magnitude stand-ins for a fixed-frequency
    transmon device: a CNOT built from echoed CR(pi/4) pulses lasts about
    484 ns.
    """

    n_qubits: int
    t1: tuple[float, ...] = None
    t2: tuple[float, ...] = None
    t_1q: float = 35.0
    t_edge: float = 50.0
    omega_zx: float = 0.005
    t_meas: float = 700.0
    readout_p01: tuple[float, ...] = None
    readout_p10: tuple[float, ...] = None
    sigma_idle: float = 1e-4
    cr_angle_error: float = 0.0

    def __post_init__(self):
        n = int(self.n_qubits)
        if n < 1:
            raise ValueError("n_qubits must be >= 1")
        defaults = {"t1": 100_000.0, "t2": 80_000.0, "readout_p01": 0.02, "readout_p10": 0.02}
        for name, default in defaults.items():
            value = getattr(self, name)
            object.__setattr__(self, name, _per_qubit(default if value is None else value, n, name))
        for name in ("t_1q", "t_edge", "t_meas", "sigma_idle"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.omega_zx <= 0:
            raise ValueError("omega_zx must be > 0")
        for q in range(n):
            if self.t1[q] <= 0 or self.t2[q] <= 0:
                raise ValueError(f"qubit {q}: T1 and T2 must be > 0")
            if self.t2[q] > 2 * self.t1[q] * (1 + 1e-12):
                raise ValueError(f"qubit {q}: T2 = {self.t2[q]} exceeds 2*T1 = {2 * self.t1[q]}")
            for name in ("readout_p01", "readout_p10"):
                p = getattr(self, name)[q]
                if not 0 <= p <= 0.5:
                    raise ValueError(f"qubit {q}: {name} = {p} outside [0, 0.5]")

    def t_phi(self, q: int) -> float:
        """Pure-dephasing time from 1/T_phi = 1/T2 - 1/(2 T1); inf when T2 = 2 T1."""
        rate = 1.0 / self.t2[q] - 0.5 / self.t1[q]
        return math.inf if rate <= 0 else 1.0 / rate

    @property
    def cnot_duration(self) -> float:
        return 2 * (self.t_edge + (math.pi / 4) / self.omega_zx) + 2 * self.t_1q

    def with_qubits(self, n: int) -> "DeviceModel":
        """Same per-qubit-uniform parameters on a chain of ``n`` qubits."""
        def first(values):
            return values[0] if len(set(values)) == 1 else None

        params = {}
        for name in ("t1", "t2", "readout_p01", "readout_p10"):
            value = first(getattr(self, name))
            if value is None:
                values = getattr(self, name)
                if n > len(values):
                    raise ValueError(f"cannot extend non-uniform {name} to {n} qubits")
                value = values[:n]
            params[name] = value
        return replace(self, n_qubits=n, **params)

    def to_dict(self) -> dict:
        data = asdict(self)
        for name in ("t1", "t2", "readout_p01", "readout_p10"):
            data[name] = list(data[name])
        return data

    @classmethod
    def from_dict(cls, data: Mapping[str, Any], n_qubits: int | None = None) -> "DeviceModel":
        data = dict(data)
        if n_qubits is not None:
            data["n_qubits"] = n_qubits
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown device parameters: {sorted(unknown)}")
        return cls(**data)

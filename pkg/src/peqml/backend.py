"""Execution variants shared by the experiment harnesses.

A variant names a transpilation pipeline and whether dynamical decoupling
is inserted: ``noiseless`` (ideal logical circuit), ``pe``, ``pe+dd``,
``cnot`` and ``cnot+dd``. Noise settings come from the
:class:`~peqml.noise.NoiseConfig`; with every noise source off the PE and
CNOT variants run their transpiled circuits on the statevector path.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from .circuit import Circuit, evaluate_state
from .device import DeviceModel
from .noise import NoiseConfig, Program, compile_schedule
from .scheduler import Schedule, insert_dd, schedule
from .transpiler import transpile

MODES = ("logical", "pe", "cnot")


def parse_variant(variant: str) -> tuple[str, bool]:
    name = variant.strip().lower()
    if name in ("noiseless", "ideal", "logical"):
        return "logical", False
    dd = name.endswith("+dd")
    mode = name[:-3] if dd else name
    if mode not in ("pe", "cnot"):
        raise ValueError(f"unknown variant {variant!r}; use noiseless, pe, pe+dd, cnot or cnot+dd")
    return mode, dd


@dataclass(frozen=True)
class Backend:
    mode: str = "logical"
    dd: bool = False
    device: DeviceModel | None = None
    noise: NoiseConfig = field(default_factory=NoiseConfig.noiseless)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == "logical" and self.dd:
            raise ValueError("dynamical decoupling needs a scheduled (pe or cnot) mode")
        if self.mode != "logical" and self.device is None:
            raise ValueError(f"mode {self.mode!r} needs a device model")

    @classmethod
    def from_variant(cls, variant: str, device: DeviceModel | None, noise: NoiseConfig) -> "Backend":
        mode, dd = parse_variant(variant)
        if mode == "logical":
            return cls("logical", False, device, NoiseConfig.noiseless(noise.seed))
        return cls(mode, dd, device, noise)

    @property
    def label(self) -> str:
        if self.mode == "logical":
            return "noiseless"
        return self.mode + ("+dd" if self.dd else "")

    @property
    def noisy(self) -> bool:
        return self.mode != "logical" and (self.noise.any_gate_noise or self.noise.readout)

    def lower(self, c: Circuit) -> Circuit:
        return c if self.mode == "logical" else transpile(c, self.mode)

    def schedule(self, c: Circuit, fresh: bool = True) -> Schedule:
        """Transpile and schedule; ``fresh`` marks a segment starting from |0...0>."""
        if self.mode == "logical":
            raise ValueError("the noiseless variant has no pulse schedule")
        s = schedule(self.lower(c), self.device.with_qubits(c.width))
        if self.dd:
            s = insert_dd(s, self.device, skip_leading=fresh)
        return s

    def program(self, c: Circuit, detunings=None, fresh: bool = True) -> Program:
        dev = self.device.with_qubits(c.width)
        return compile_schedule(self.schedule(c, fresh), dev, self.noise, detunings)

    def state(self, c: Circuit) -> np.ndarray:
        """Noise-free statevector of the (transpiled) circuit."""
        return evaluate_state(self.lower(c))


def readout_zero_observable(device: DeviceModel | None, n: int, readout: bool) -> np.ndarray:
    """Diagonal operator whose expectation is P(read 0...0)."""
    if readout and device is not None:
        vecs = [np.array([1 - device.readout_p01[q], device.readout_p10[q]]) for q in range(n)]
    else:
        vecs = [np.array([1.0, 0.0])] * n
    diag = reduce(np.kron, vecs)
    return np.diag(diag).astype(complex)

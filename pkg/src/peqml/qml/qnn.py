"""Quantum neural network: parity readout of feature map plus ansatz."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..backend import Backend
from ..circuit import build_feature_map, build_qnn_ansatz, evaluate_unitary
from ..noise import (
    expectation_parity,
    mitigate_readout,
    parity_signs,
    readout_distribution,
    run_program,
)
from ..scheduler import Schedule
from .dataset import QNN_FEATURE_DEPTH


@dataclass
class QnnModel:
    n: int
    theta: np.ndarray = None
    depth: int = QNN_FEATURE_DEPTH
    variant: str = "noiseless"
    shots: int | None = None

    def __post_init__(self):
        if self.theta is None:
            self.theta = np.zeros(2 * self.n)
        self.theta = np.asarray(self.theta, dtype=float)
        if self.theta.shape != (2 * self.n,):
            raise ValueError(f"QNN on {self.n} qubits has {2 * self.n} parameters, got {self.theta.shape}")
        if self.shots is not None and self.shots < 1:
            raise ValueError("shots must be >= 1")


def _p0_from_parity(parity: np.ndarray) -> np.ndarray:
    return np.clip(0.5 * (1.0 + np.asarray(parity)), 0.0, 1.0)


@dataclass
class QnnEvaluator:
    """Class-0 probabilities for a fixed sample set, reusing feature-map work.

    The feature map is simulated once per sample. Each call then only runs
    the ansatz, scheduled as a second segment after a synchronisation
    point, on the cached states.
    """

    backend: Backend
    xs: np.ndarray
    depth: int = QNN_FEATURE_DEPTH
    shots: int | None = None
    detunings: np.ndarray | None = None
    _cache: list = field(default=None, init=False, repr=False)

    def __post_init__(self):
        self.xs = np.atleast_2d(np.asarray(self.xs, dtype=float))
        self.n = self.xs.shape[1]
        if self.backend.noisy:
            dev = self.backend.device.with_qubits(self.n)
            self.device = dev
            rhos = []
            for x in self.xs:
                prog = self.backend.program(build_feature_map(x, self.depth), self.detunings, fresh=True)
                rho = np.zeros((1 << self.n, 1 << self.n), dtype=complex)
                rho[0, 0] = 1.0
                rhos.append(run_program(prog, rho))
            self._cache = rhos
        else:
            self._cache = np.array([self.backend.state(build_feature_map(x, self.depth)) for x in self.xs])

    def ansatz(self, theta) -> "Circuit":  # noqa: F821
        return build_qnn_ansatz(self.n, theta).measure_all()

    def distributions(self, theta) -> np.ndarray:
        """Exact (infinite-shot) measured bitstring distributions, one row per sample."""
        theta = np.asarray(theta, dtype=float)
        if not self.backend.noisy:
            u = evaluate_unitary(self.backend.lower(build_qnn_ansatz(self.n, theta)))
            return np.abs(self._cache @ u.T) ** 2
        prog = self.backend.program(self.ansatz(theta), self.detunings, fresh=False)
        out = []
        for rho in self._cache:
            probs = np.clip(np.diag(run_program(prog, rho.copy())).real, 0.0, None)
            if self.backend.noise.readout:
                probs = readout_distribution(probs, self.device, self.n)
            out.append(probs / probs.sum())
        return np.array(out)

    def p0(self, theta, rng: np.random.Generator | None = None) -> np.ndarray:
        """Readout-mitigated class-0 probability (1 + <P>) / 2 per sample."""
        dists = self.distributions(theta)
        signs = parity_signs(self.n)
        if self.shots is None:
            # mitigation inverts the readout channel exactly
            return _p0_from_parity(self._ideal_parity(theta, dists, signs))
        if rng is None:
            raise ValueError("a random generator is needed for finite shots")
        parities = []
        for d in dists:
            freq = rng.multinomial(self.shots, d) / self.shots
            if self.backend.noisy and self.backend.noise.readout:
                freq = mitigate_readout(freq, self.device)
            parities.append(expectation_parity(freq))
        return _p0_from_parity(parities)

    def _ideal_parity(self, theta, dists, signs) -> np.ndarray:
        if self.backend.noisy and self.backend.noise.readout:
            return np.array([expectation_parity(mitigate_readout(d, self.device)) for d in dists])
        return dists @ signs

    def schedules(self, theta) -> list[Schedule]:
        """Full per-sample schedules (feature map, then ansatz and measurement)."""
        tail = self.backend.schedule(self.ansatz(theta), fresh=False)
        return [self.backend.schedule(build_feature_map(x, self.depth), fresh=True) + tail for x in self.xs]


def qnn_forward(model: QnnModel, x, backend: Backend, rng: np.random.Generator | None = None) -> float:
    """Class-0 probability for one feature vector."""
    x = np.asarray(x, dtype=float)
    if len(x) != model.n:
        raise ValueError(f"model has {model.n} qubits, feature vector has {len(x)} entries")
    ev = QnnEvaluator(backend, x[None, :], model.depth, model.shots)
    return float(ev.p0(model.theta, rng)[0])

"""Density-matrix simulation of schedules under duration-dependent noise.

Each scheduled operation applies its unitary and then, on every qubit it
touches, amplitude damping (gamma = 1 - exp(-d/T1)) and pure dephasing
(lambda = 1 - exp(-d/T_phi)). Delays add a quasi-static Z rotation by
``delta * d`` where ``delta`` is a per-qubit detuning.

Schedules are first compiled into a :class:`Program`: a list of fused
one- and two-qubit superoperators. Single-qubit work is accumulated per
qubit and folded into the next two-qubit operation on that qubit, and
consecutive two-qubit operations on the same pair are multiplied together.
Operations on disjoint qubits commute, so the fused program is exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import gates as G
from . import kernels
from .device import DeviceModel
from .scheduler import Schedule

MAX_DM_QUBITS = 10
_CALIBRATED_CR = math.pi / 4


@dataclass(frozen=True)
class NoiseConfig:
    amplitude_damping: bool = True
    dephasing: bool = True
    quasi_static: bool = True
    readout: bool = True
    seed: int = 0

    @classmethod
    def noiseless(cls, seed: int = 0) -> "NoiseConfig":
        return cls(False, False, False, False, seed)

    @property
    def any_gate_noise(self) -> bool:
        return self.amplitude_damping or self.dephasing or self.quasi_static


# -- superoperator algebra ---------------------------------------------------


def unitary_superop(u: np.ndarray) -> np.ndarray:
    return np.kron(u, u.conj())


def relaxation_superop(gamma: float, lam: float) -> np.ndarray:
    """Amplitude damping followed by dephasing, single qubit."""
    s = np.zeros((4, 4), dtype=complex)
    coherence = math.sqrt(1.0 - gamma) * (1.0 - lam)
    s[0, 0] = 1.0
    s[0, 3] = gamma
    s[3, 3] = 1.0 - gamma
    s[1, 1] = coherence
    s[2, 2] = coherence
    return s


def pair_superop(s0: np.ndarray, s1: np.ndarray) -> np.ndarray:
    """Two-qubit superoperator of independent single-qubit ones."""
    t = np.kron(s0, s1).reshape((2,) * 8)
    # kron index (r0 c0 r1 c1) -> superop index (r0 r1 c0 c1)
    t = t.transpose(0, 2, 1, 3, 4, 6, 5, 7)
    return t.reshape(16, 16)


def swap_superop(s: np.ndarray) -> np.ndarray:
    """Reorder a two-qubit superoperator's qubits."""
    t = s.reshape((2,) * 8).transpose(1, 0, 3, 2, 5, 4, 7, 6)
    return t.reshape(16, 16)


@dataclass
class Program:
    """Fused superoperators in application order."""

    n_qubits: int
    ops: list[tuple[tuple[int, ...], np.ndarray]] = field(default_factory=list)

    def __len__(self):
        return len(self.ops)


class _Compiler:
    def __init__(self, dev: DeviceModel, cfg: NoiseConfig, detunings):
        self.dev = dev
        self.cfg = cfg
        self.detunings = detunings
        self._relax_cache: dict[tuple[int, float], np.ndarray] = {}

    def relax(self, q: int, d: float) -> np.ndarray | None:
        cfg = self.cfg
        if d <= 0 or not (cfg.amplitude_damping or cfg.dephasing):
            return None
        key = (q, d)
        s = self._relax_cache.get(key)
        if s is None:
            gamma = 1.0 - math.exp(-d / self.dev.t1[q]) if cfg.amplitude_damping else 0.0
            lam = 0.0
            if cfg.dephasing:
                t_phi = self.dev.t_phi(q)
                lam = 0.0 if math.isinf(t_phi) else 1.0 - math.exp(-d / t_phi)
            s = relaxation_superop(gamma, lam)
            self._relax_cache[key] = s
        return s

    def gate_unitary(self, g) -> np.ndarray:
        if g.kind == "CRPulse":
            err = self.dev.cr_angle_error
            if err and not math.isclose(g.angle, _CALIBRATED_CR, rel_tol=0, abs_tol=1e-12):
                return G.cr_pulse(g.angle, g.sign, err)
        return g.matrix()

    def one_qubit(self, op) -> np.ndarray | None:
        g = op.gate
        q = g.qubits[0]
        if g.kind == "Delay":
            s = None
            if self.cfg.quasi_static and self.detunings is not None:
                phase = self.detunings[q] * op.duration
                if phase != 0.0:
                    s = unitary_superop(G.rz(phase))
        else:
            s = unitary_superop(self.gate_unitary(g))
        r = self.relax(q, op.duration)
        if r is not None:
            s = r if s is None else r @ s
        return s

    def compile(self, s: Schedule) -> Program:
        n = s.n_qubits
        eye4 = None
        pending: list[np.ndarray | None] = [None] * n
        fused: list[list] = []
        last = [-1] * n
        for op in s.ops:
            g = op.gate
            if g.kind == "Measure":
                continue
            if len(g.qubits) == 1:
                sup = self.one_qubit(op)
                q = g.qubits[0]
                if sup is not None:
                    pending[q] = sup if pending[q] is None else sup @ pending[q]
                continue
            a, b = g.qubits
            sup = unitary_superop(self.gate_unitary(g))
            ra, rb = self.relax(a, op.duration), self.relax(b, op.duration)
            if ra is not None or rb is not None:
                if eye4 is None:
                    eye4 = np.eye(4, dtype=complex)
                sup = pair_superop(eye4 if ra is None else ra, eye4 if rb is None else rb) @ sup
            if pending[a] is not None or pending[b] is not None:
                if eye4 is None:
                    eye4 = np.eye(4, dtype=complex)
                pa = eye4 if pending[a] is None else pending[a]
                pb = eye4 if pending[b] is None else pending[b]
                sup = sup @ pair_superop(pa, pb)
                pending[a] = pending[b] = None
            k = last[a]
            if k >= 0 and last[b] == k:
                prev_qubits, prev = fused[k]
                if prev_qubits != (a, b):
                    sup = swap_superop(sup)
                fused[k][1] = sup @ prev
            else:
                fused.append([(a, b), sup])
                last[a] = last[b] = len(fused) - 1
        program = Program(n, [(tuple(qs), m) for qs, m in fused])
        for q in range(n):
            if pending[q] is not None:
                program.ops.append(((q,), pending[q]))
        return program


def draw_detunings(dev: DeviceModel, rng: np.random.Generator) -> np.ndarray:
    """Quasi-static idle detunings, one per qubit, from N(0, sigma_idle)."""
    return rng.normal(0.0, dev.sigma_idle, size=dev.n_qubits)


def compile_schedule(
    s: Schedule,
    dev: DeviceModel,
    cfg: NoiseConfig,
    detunings: Sequence[float] | None = None,
) -> Program:
    if s.n_qubits > dev.n_qubits:
        raise ValueError(f"schedule has {s.n_qubits} qubits, device has {dev.n_qubits}")
    if cfg.quasi_static and detunings is None:
        detunings = draw_detunings(dev, np.random.default_rng(cfg.seed))
    return _Compiler(dev, cfg, detunings).compile(s)


# -- density matrices ----------------------------------------------------------


@dataclass
class DensityMatrix:
    n: int
    rho: np.ndarray

    @classmethod
    def zero_state(cls, n: int) -> "DensityMatrix":
        if n > MAX_DM_QUBITS:
            raise ValueError(f"density-matrix simulation is limited to {MAX_DM_QUBITS} qubits")
        rho = np.zeros((1 << n, 1 << n), dtype=complex)
        rho[0, 0] = 1.0
        return cls(n, rho)

    @classmethod
    def from_state(cls, psi: np.ndarray) -> "DensityMatrix":
        psi = np.asarray(psi, dtype=complex)
        n = int(round(math.log2(len(psi))))
        return cls(n, np.outer(psi, psi.conj()))

    def copy(self) -> "DensityMatrix":
        return DensityMatrix(self.n, self.rho.copy())

    def trace(self) -> float:
        return float(np.trace(self.rho).real)

    def probabilities(self) -> np.ndarray:
        return np.clip(np.diag(self.rho).real, 0.0, None)

    def expectation(self, observable: np.ndarray) -> float:
        return float(np.real(np.einsum("ij,ji->", observable, self.rho)))

    def check(self, tol: float = 1e-9) -> None:
        """Raise if trace, Hermiticity or positivity is violated beyond ``tol``."""
        if abs(np.trace(self.rho) - 1.0) > tol:
            raise ValueError(f"trace {np.trace(self.rho)} differs from 1")
        herm = np.max(np.abs(self.rho - self.rho.conj().T))
        if herm > tol:
            raise ValueError(f"not Hermitian (max deviation {herm:.3e})")
        lowest = np.linalg.eigvalsh(0.5 * (self.rho + self.rho.conj().T))[0]
        if lowest < -tol:
            raise ValueError(f"negative eigenvalue {lowest:.3e}")


def run_program(program: Program, rho: np.ndarray, adjoint: bool = False) -> np.ndarray:
    """Apply a fused program to ``rho`` in place and return it.

    With ``adjoint`` the Heisenberg-picture map is applied instead: each
    superoperator is conjugate-transposed and the order is reversed, so
    ``tr(O E(rho)) == tr(E^dag(O) rho)``.
    """
    n = program.n_qubits
    ops = reversed(program.ops) if adjoint else program.ops
    for qubits, sup in ops:
        m = sup.conj().T if adjoint else sup
        m = np.ascontiguousarray(m)
        if len(qubits) == 1:
            kernels.apply_superop_1q(rho, m, qubits[0], n)
        else:
            kernels.apply_superop_2q(rho, m, qubits[0], qubits[1], n)
    return rho


def evolve(
    s: Schedule,
    dev: DeviceModel,
    cfg: NoiseConfig,
    detunings: Sequence[float] | None = None,
    initial: DensityMatrix | None = None,
) -> DensityMatrix:
    """Walk the schedule in time order from |0...0> (or ``initial``).

    ``detunings`` overrides the quasi-static draw, letting a harness share
    one realisation across the circuits of a run.
    """
    n = s.n_qubits
    if n > MAX_DM_QUBITS:
        raise ValueError(f"density-matrix simulation is limited to {MAX_DM_QUBITS} qubits")
    state = DensityMatrix.zero_state(n) if initial is None else initial.copy()
    program = compile_schedule(s, dev, cfg, detunings)
    run_program(program, state.rho)
    return state


# -- measurement -----------------------------------------------------------------


@dataclass(frozen=True)
class Counts:
    """Shot histogram; ``counts[i]`` is the count of basis index ``i``."""

    n: int
    counts: np.ndarray

    @property
    def shots(self) -> int:
        return int(self.counts.sum())

    def as_dict(self) -> dict[str, int]:
        return {
            format(i, f"0{self.n}b"): int(c) for i, c in enumerate(self.counts) if c
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, int]) -> "Counts":
        if not data:
            raise ValueError("empty counts")
        n = len(next(iter(data)))
        arr = np.zeros(1 << n, dtype=np.int64)
        for bits, c in data.items():
            if len(bits) != n:
                raise ValueError("bitstrings of unequal length")
            arr[int(bits, 2)] += int(c)
        return cls(n, arr)

    def distribution(self) -> np.ndarray:
        shots = self.shots
        if shots == 0:
            raise ValueError("empty counts")
        return self.counts / shots


def _assignment_matrix(dev: DeviceModel, q: int) -> np.ndarray:
    p01, p10 = dev.readout_p01[q], dev.readout_p10[q]
    return np.array([[1 - p01, p10], [p01, 1 - p10]])


def apply_per_qubit(dist: np.ndarray, mats: Sequence[np.ndarray]) -> np.ndarray:
    """Apply ``mats[q]`` (2x2) along qubit ``q`` of a 2**n distribution."""
    n = len(mats)
    t = np.asarray(dist, dtype=float).reshape((2,) * n)
    for q, m in enumerate(mats):
        t = np.moveaxis(np.tensordot(m, t, axes=([1], [q])), 0, q)
    return t.reshape(-1)


def readout_distribution(probs: np.ndarray, dev: DeviceModel, n: int) -> np.ndarray:
    """Distribution of read bitstrings after independent per-bit flips."""
    return apply_per_qubit(probs, [_assignment_matrix(dev, q) for q in range(n)])


def sample(
    rho: DensityMatrix,
    shots: int,
    dev: DeviceModel,
    cfg: NoiseConfig,
    rng: np.random.Generator | None = None,
) -> Counts:
    """Draw ``shots`` bitstrings from diag(rho), with readout flips if enabled.

    Flipping each bit independently per shot is equivalent in distribution to
    one multinomial draw from the readout-composed distribution, which is
    what is done here.
    """
    if shots <= 0:
        raise ValueError("shots must be >= 1")
    rng = np.random.default_rng(cfg.seed) if rng is None else rng
    probs = rho.probabilities()
    if cfg.readout:
        probs = readout_distribution(probs, dev, rho.n)
    probs = np.clip(probs, 0.0, None)
    probs = probs / probs.sum()
    return Counts(rho.n, rng.multinomial(shots, probs))


def mitigate_readout(counts: Counts | np.ndarray, dev: DeviceModel) -> np.ndarray:
    """Tensored readout mitigation; returns quasi-probabilities (may be < 0)."""
    dist = counts.distribution() if isinstance(counts, Counts) else np.asarray(counts, float)
    if dist.size == 0 or not np.isfinite(dist).all():
        raise ValueError("empty or invalid distribution")
    n = int(round(math.log2(dist.size)))
    inverses = []
    for q in range(n):
        a = _assignment_matrix(dev, q)
        if abs(np.linalg.det(a)) < 1e-12:
            raise ValueError(f"qubit {q}: singular assignment matrix (p01 + p10 = 1)")
        inverses.append(np.linalg.inv(a))
    return apply_per_qubit(dist, inverses)


def _as_distribution(d) -> np.ndarray:
    if isinstance(d, Counts):
        return d.distribution()
    if isinstance(d, Mapping):
        return Counts.from_dict(d).distribution()
    arr = np.asarray(d, dtype=float)
    if arr.size == 0:
        raise ValueError("empty distribution")
    return arr


def parity_signs(n: int) -> np.ndarray:
    idx = np.arange(1 << n)
    parity = np.zeros(1 << n, dtype=np.int64)
    for q in range(n):
        parity ^= (idx >> q) & 1
    return 1 - 2 * parity


def expectation_parity(d) -> float:
    """Sum over b of p(b) (-1)^popcount(b)."""
    p = _as_distribution(d)
    n = int(round(math.log2(p.size)))
    return float(np.dot(p, parity_signs(n)))


def expectation_z0z1(d) -> float:
    """Sum over b of p(b) (-1)^(b_0 + b_1) for the two leading qubits."""
    p = _as_distribution(d)
    n = int(round(math.log2(p.size)))
    if n < 2:
        raise ValueError("Z0Z1 needs at least two qubits")
    idx = np.arange(p.size)
    signs = 1 - 2 * (((idx >> (n - 1)) ^ (idx >> (n - 2))) & 1)
    return float(np.dot(p, signs))


def zero_bitstring_frequency(d) -> float:
    return float(_as_distribution(d)[0])

"""Circuit IR, the three circuit families, and exact small-scale evaluation.

Circuits are immutable: passes and builders return new objects. Qubit 0 is
the most significant bit of every basis index and the leftmost character of
every bitstring.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

from . import gates as G

MAX_EXACT_QUBITS = 12


@dataclass(frozen=True)
class Param:
    """Symbolic angle ``scale * <name> + offset``."""

    name: str
    scale: float = 1.0
    offset: float = 0.0

    def resolve(self, values: Mapping[str, float]) -> float:
        try:
            value = values[self.name]
        except KeyError:
            raise KeyError(f"no value bound for parameter {self.name!r}") from None
        return self.scale * float(value) + self.offset

    def __neg__(self) -> "Param":
        return Param(self.name, -self.scale, -self.offset)


Angle = Union[float, Param, None]


@dataclass(frozen=True)
class Gate:
    kind: str
    qubits: tuple[int, ...]
    angle: Angle = None
    sign: int = 1

    def __post_init__(self):
        if self.kind not in G.KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        qubits = tuple(int(q) for q in self.qubits)
        object.__setattr__(self, "qubits", qubits)
        arity = 2 if self.kind in G.TWO_QUBIT else 1
        if len(qubits) != arity:
            raise ValueError(f"{self.kind} acts on {arity} qubit(s), got {qubits}")
        if arity == 2:
            if qubits[0] == qubits[1]:
                raise ValueError(f"{self.kind} qubits must be distinct: {qubits}")
            if abs(qubits[0] - qubits[1]) != 1:
                raise ValueError(
                    f"{self.kind} on {qubits}: only neighbouring pairs of the "
                    "linear chain are coupled"
                )
        if min(qubits) < 0:
            raise ValueError(f"negative qubit index in {qubits}")
        if self.kind in G.ANGLED:
            if self.angle is None:
                raise ValueError(f"{self.kind} requires an angle")
            if not isinstance(self.angle, Param):
                angle = float(self.angle)
                if not math.isfinite(angle):
                    raise ValueError(f"{self.kind} angle must be finite")
                object.__setattr__(self, "angle", angle)
        elif self.angle is not None:
            raise ValueError(f"{self.kind} takes no angle")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        if self.kind == "CRPulse" and not isinstance(self.angle, Param):
            if self.angle < 0:
                raise ValueError("CRPulse angle must be >= 0; use the sign flag")
        if self.kind == "Delay" and not isinstance(self.angle, Param):
            if self.angle < 0:
                raise ValueError("Delay duration must be >= 0")

    @property
    def is_bound(self) -> bool:
        return not isinstance(self.angle, Param)

    @property
    def is_single_qubit(self) -> bool:
        return self.kind in G.ONE_QUBIT

    @property
    def is_two_qubit(self) -> bool:
        return self.kind in G.TWO_QUBIT

    def bind(self, values: Mapping[str, float]) -> "Gate":
        if self.is_bound:
            return self
        angle = self.angle.resolve(values)
        if self.kind == "CRPulse" and angle < 0:
            return Gate(self.kind, self.qubits, -angle, -self.sign)
        return Gate(self.kind, self.qubits, angle, self.sign)

    def matrix(self) -> np.ndarray:
        if not self.is_bound:
            raise ValueError(f"unbound parameter {self.angle.name!r} in {self.kind}")
        return G.matrix(self.kind, self.angle, self.sign)

    def inverse(self) -> "Gate":
        if self.kind in ("H", "X", "CNOT"):
            return self
        if self.kind == "SX":
            return Gate("RX", self.qubits, -math.pi / 2)
        if self.kind == "CRPulse":
            return Gate(self.kind, self.qubits, self.angle, -self.sign)
        if self.kind in G.DIRECTIVES:
            raise ValueError(f"{self.kind} has no inverse")
        return Gate(self.kind, self.qubits, -self.angle)


@dataclass(frozen=True)
class Circuit:
    width: int
    gates: tuple[Gate, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.width < 1:
            raise ValueError("circuit width must be >= 1")
        object.__setattr__(self, "gates", tuple(self.gates))
        for g in self.gates:
            if max(g.qubits) >= self.width:
                raise ValueError(f"{g.kind} on {g.qubits} exceeds width {self.width}")

    def __len__(self) -> int:
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)

    def __add__(self, other: "Circuit") -> "Circuit":
        if other.width != self.width:
            raise ValueError("cannot compose circuits of different widths")
        return Circuit(self.width, self.gates + other.gates)

    @property
    def parameters(self) -> frozenset[str]:
        return frozenset(g.angle.name for g in self.gates if not g.is_bound)

    @property
    def is_bound(self) -> bool:
        return all(g.is_bound for g in self.gates)

    def bind(self, values: Mapping[str, float]) -> "Circuit":
        return Circuit(self.width, tuple(g.bind(values) for g in self.gates))

    def inverse(self) -> "Circuit":
        return Circuit(self.width, tuple(g.inverse() for g in reversed(self.gates)))

    def count(self, kind: str) -> int:
        return sum(1 for g in self.gates if g.kind == kind)

    def measure_all(self) -> "Circuit":
        extra = tuple(Gate("Measure", (q,)) for q in range(self.width))
        return Circuit(self.width, self.gates + extra)


# -- builders -----------------------------------------------------------------


def feature_angles(x: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    """RZ angles ``2 x_i`` and RZZ angles ``2 (pi - x_i)(pi - x_j)``."""
    x = np.asarray(x, dtype=float)
    rz_angles = 2.0 * x
    zz_angles = 2.0 * (np.pi - x[:-1]) * (np.pi - x[1:])
    return rz_angles, zz_angles


def build_feature_map(x: Sequence[float], depth: int = 1, width: int | None = None) -> Circuit:
    """Data-encoding circuit repeated ``depth`` times.

    Each layer applies H on all qubits, RZ(2 x_i) on qubit i and
    RZZ(2 (pi - x_i)(pi - x_j)) on every neighbouring pair.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError("feature vector must be one-dimensional")
    n = len(x) if width is None else int(width)
    if len(x) != n:
        raise ValueError(f"feature vector has {len(x)} entries, circuit width is {n}")
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if np.any(x < 0) or np.any(x >= 1):
        raise ValueError("features must lie in [0, 1)")
    rz_angles, zz_angles = feature_angles(x)
    layer = [Gate("H", (q,)) for q in range(n)]
    layer += [Gate("RZ", (q,), rz_angles[q]) for q in range(n)]
    layer += [Gate("RZZ", (q, q + 1), zz_angles[q]) for q in range(n - 1)]
    return Circuit(n, tuple(layer) * depth)


def build_qnn_ansatz(n: int, theta: Sequence[float] | None = None) -> Circuit:
    """RY layer, CNOT ladder on neighbours, RY layer (2n angles).

    With ``theta=None`` the angles are the symbolic parameters
    ``theta_0 ... theta_{2n-1}``.
    """
    if n < 1:
        raise ValueError("need at least one qubit")
    if theta is None:
        angles = [Param(f"theta_{k}") for k in range(2 * n)]
    else:
        angles = list(np.asarray(theta, dtype=float).ravel())
        if len(angles) != 2 * n:
            raise ValueError(f"ansatz on {n} qubits takes {2 * n} angles, got {len(angles)}")
    gates = [Gate("RY", (q,), angles[q]) for q in range(n)]
    gates += [Gate("CNOT", (q, q + 1)) for q in range(n - 1)]
    gates += [Gate("RY", (q,), angles[n + q]) for q in range(n)]
    return Circuit(n, tuple(gates))


def build_hva_tfim(n: int, layers: int, gammas, betas) -> Circuit:
    """Transverse-field Ising HVA: per layer exp(-i H_zz) then exp(-i H_x).

    ``gammas`` has shape (layers, n) and ``betas`` (layers, n - 1); they enter
    as RZZ(2 beta) and RX(2 gamma).
    """
    if n < 2:
        raise ValueError("HVA needs at least two qubits")
    gammas = np.asarray(gammas, dtype=float)
    betas = np.asarray(betas, dtype=float)
    if gammas.shape != (layers, n):
        raise ValueError(f"gammas must have shape {(layers, n)}, got {gammas.shape}")
    if betas.shape != (layers, n - 1):
        raise ValueError(f"betas must have shape {(layers, n - 1)}, got {betas.shape}")
    gates = []
    for layer in range(layers):
        gates += [Gate("RZZ", (q, q + 1), 2.0 * betas[layer, q]) for q in range(n - 1)]
        gates += [Gate("RX", (q,), 2.0 * gammas[layer, q]) for q in range(n)]
    return Circuit(n, tuple(gates))


# -- exact evaluation ---------------------------------------------------------


def apply_gate_to_state(state: np.ndarray, gate: Gate, n: int) -> np.ndarray:
    """Apply ``gate`` to the leading ``n`` qubit axes of ``state``.

    ``state`` has shape (2**n, ...) and is returned with the same shape.
    """
    u = gate.matrix()
    k = len(gate.qubits)
    rest = state.shape[1:]
    t = state.reshape((2,) * n + rest)
    t = np.tensordot(u.reshape((2,) * (2 * k)), t, axes=(list(range(k, 2 * k)), list(gate.qubits)))
    t = np.moveaxis(t, list(range(k)), list(gate.qubits))
    return t.reshape(state.shape)


def _check_exact(c: Circuit, allow_directives: bool) -> None:
    if c.width > MAX_EXACT_QUBITS:
        raise ValueError(f"exact evaluation limited to {MAX_EXACT_QUBITS} qubits")
    if not c.is_bound:
        raise ValueError(f"unbound parameters: {sorted(c.parameters)}")
    if not allow_directives and any(g.kind in G.DIRECTIVES for g in c.gates):
        raise ValueError("unitary evaluation does not accept Measure or Delay")


def evaluate_unitary(c: Circuit) -> np.ndarray:
    _check_exact(c, allow_directives=False)
    dim = 1 << c.width
    u = np.eye(dim, dtype=complex)
    for g in c.gates:
        u = apply_gate_to_state(u, g, c.width)
    return u


def evaluate_state(c: Circuit) -> np.ndarray:
    """State vector from |0...0>; Delay is identity and Measure is ignored."""
    _check_exact(c, allow_directives=True)
    psi = np.zeros(1 << c.width, dtype=complex)
    psi[0] = 1.0
    for g in c.gates:
        if g.kind in G.DIRECTIVES:
            continue
        psi = apply_gate_to_state(psi, g, c.width)
    return psi


# -- text format --------------------------------------------------------------


def dumps(c: Circuit) -> str:
    """One gate per line: ``KIND q0 [q1] [angle]``; CRPulse carries its sign in the angle."""
    if not c.is_bound:
        raise ValueError("only bound circuits can be serialised")
    lines = [f"qubits {c.width}"]
    for g in c.gates:
        fields = [g.kind, *map(str, g.qubits)]
        if g.kind == "CRPulse":
            fields.append(repr(g.sign * g.angle))
        elif g.angle is not None:
            fields.append(repr(g.angle))
        lines.append(" ".join(fields))
    return "\n".join(lines) + "\n"


def loads(text: str) -> Circuit:
    width = None
    gates: list[Gate] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        try:
            if fields[0] == "qubits":
                width = int(fields[1])
                continue
            kind = fields[0]
            if kind not in G.KINDS:
                raise ValueError(f"unknown gate kind {kind!r}")
            arity = 2 if kind in G.TWO_QUBIT else 1
            qubits = tuple(int(f) for f in fields[1 : 1 + arity])
            rest = fields[1 + arity :]
            if len(qubits) != arity or len(rest) > 1:
                raise ValueError("wrong number of fields")
            angle = float(rest[0]) if rest else None
            sign = 1
            if kind == "CRPulse" and angle is not None and angle < 0:
                angle, sign = -angle, -1
            gates.append(Gate(kind, qubits, angle, sign))
        except (ValueError, IndexError) as exc:
            raise ValueError(f"line {lineno}: {exc} in {raw!r}") from None
    if width is None:
        if not gates:
            raise ValueError("empty circuit text needs a 'qubits N' header")
        width = 1 + max(max(g.qubits) for g in gates)
    return Circuit(width, tuple(gates))


def random_circuit(
    rng: np.random.Generator,
    n: int,
    n_gates: int,
    kinds: Iterable[str] = ("H", "RX", "RY", "RZ", "RZZ", "RZX", "CNOT"),
) -> Circuit:
    """Random bound circuit over ``kinds`` on a linear chain (test helper)."""
    kinds = [k for k in kinds if n > 1 or k not in G.TWO_QUBIT]
    gates = []
    for _ in range(n_gates):
        kind = kinds[rng.integers(len(kinds))]
        if kind in G.TWO_QUBIT:
            q = int(rng.integers(n - 1))
            qubits = (q, q + 1) if rng.random() < 0.5 else (q + 1, q)
        else:
            qubits = (int(rng.integers(n)),)
        angle = None
        sign = 1
        if kind in G.ANGLED:
            angle = float(rng.uniform(-2 * np.pi, 2 * np.pi))
            if kind == "CRPulse":
                sign = 1 if angle >= 0 else -1
                angle = abs(angle)
        gates.append(Gate(kind, qubits, angle, sign))
    return Circuit(n, tuple(gates))

"""Lowering passes for the CNOT-based and pulse-efficient pipelines.

Every pass is a pure ``Circuit -> Circuit`` function and preserves the
circuit unitary up to a global phase. The gate set is closed over the
two-qubit kinds used by the builders (RZZ, RZX, CNOT, CRPulse), so no
general two-qubit synthesis is needed.
"""

from __future__ import annotations

import enum
import math

import numpy as np

from . import gates as G
from .circuit import Circuit, Gate, Param, evaluate_unitary

ANGLE_TOL = 1e-10


class BasisTarget(enum.Enum):
    CNOT = "cnot"
    RZX = "rzx"
    ECHOED_PULSE = "pe"


def _scaled(angle, factor):
    if isinstance(angle, Param):
        return Param(angle.name, angle.scale * factor, angle.offset * factor)
    return angle * factor


def _wrap_half_turns(theta: float) -> tuple[float, int]:
    """Split theta = reduced + k*pi with reduced in [-pi/2, pi/2]."""
    k = int(math.floor(theta / math.pi + 0.5))
    reduced = theta - k * math.pi
    if reduced > math.pi / 2:
        reduced, k = reduced - math.pi, k + 1
    return reduced, k


def _rzz_to_cnot(a: int, b: int, theta) -> list[Gate]:
    return [Gate("CNOT", (a, b)), Gate("RZ", (b,), theta), Gate("CNOT", (a, b))]


def lower_to_cnot(c: Circuit) -> Circuit:
    """Rewrite every two-qubit gate into CNOTs and single-qubit gates.

    RZZ(t) -> CNOT . RZ(t) on target . CNOT and RZX(t) -> H . RZZ(t) . H on
    the target; CRPulse is first read as the RZX it implements.
    """
    out: list[Gate] = []
    for g in c.gates:
        if g.kind == "RZZ":
            out += _rzz_to_cnot(*g.qubits, g.angle)
        elif g.kind in ("RZX", "CRPulse"):
            ctrl, tgt = g.qubits
            theta = g.angle if g.kind == "RZX" else _scaled(g.angle, g.sign)
            out.append(Gate("H", (tgt,)))
            out += _rzz_to_cnot(ctrl, tgt, theta)
            out.append(Gate("H", (tgt,)))
        elif g.kind in G.KINDS:
            out.append(g)
        else:  # pragma: no cover - Gate validation rejects unknown kinds
            raise ValueError(f"unsupported gate kind {g.kind!r}")
    return Circuit(c.width, tuple(out))


def _rzx_canonical(ctrl: int, tgt: int, theta) -> list[Gate]:
    # RZX(pi) = -i Z(x)X, which is RZ(pi) (x) RX(pi) up to phase
    if isinstance(theta, Param):
        return [Gate("RZX", (ctrl, tgt), theta)]
    reduced, k = _wrap_half_turns(theta)
    out = [Gate("RZX", (ctrl, tgt), reduced)]
    if k % 2:
        out += [Gate("RZ", (ctrl,), math.pi), Gate("RX", (tgt,), math.pi)]
    return out


def lower_to_rzx(c: Circuit, canonicalize: bool = True) -> Circuit:
    """Rewrite two-qubit gates as RZX rotations plus single-qubit gates.

    RZZ(t) on (a, b) becomes H_b . RZX(t) . H_b, and CNOT becomes
    RZX(-pi/2) dressed with RZ(pi/2) on the control and RX(pi/2) on the
    target. With ``canonicalize`` the RZX angle is folded into
    [-pi/2, pi/2] by peeling off half turns, which are local Pauli products
    and cost no CR time.
    """
    out: list[Gate] = []
    for g in c.gates:
        if g.kind == "RZZ":
            a, b = g.qubits
            theta = g.angle
            if canonicalize and not isinstance(theta, Param):
                theta, k = _wrap_half_turns(theta)
                if k % 2:
                    out += [Gate("RZ", (a,), math.pi), Gate("RZ", (b,), math.pi)]
            out += [Gate("H", (b,)), Gate("RZX", (a, b), theta), Gate("H", (b,))]
        elif g.kind in ("RZX", "CRPulse"):
            theta = g.angle if g.kind == "RZX" else _scaled(g.angle, g.sign)
            if canonicalize:
                out += _rzx_canonical(*g.qubits, theta)
            else:
                out.append(Gate("RZX", g.qubits, theta))
        elif g.kind == "CNOT":
            ctrl, tgt = g.qubits
            out += [
                Gate("RZX", (ctrl, tgt), -math.pi / 2),
                Gate("RZ", (ctrl,), math.pi / 2),
                Gate("RX", (tgt,), math.pi / 2),
            ]
        else:
            out.append(g)
    return Circuit(c.width, tuple(out))


def expand_echo(c: Circuit) -> Circuit:
    """Expose each RZX(t) as X_c, CR(-t/2), X_c, CR(+t/2) in time order.

    With CR(a) = exp(-i a ZX / 2) the operator product
    CR(t/2) X_c CR(-t/2) X_c equals RZX(t) exactly.
    """
    out: list[Gate] = []
    for g in c.gates:
        if g.kind in ("RZZ", "CNOT"):
            raise ValueError(f"expand_echo expects an RZX-basis circuit, found {g.kind}")
        if g.kind != "RZX":
            out.append(g)
            continue
        if isinstance(g.angle, Param):
            raise ValueError("expand_echo needs bound RZX angles")
        ctrl, tgt = g.qubits
        sign = 1 if g.angle >= 0 else -1
        half = abs(g.angle) / 2
        out += [
            Gate("X", (ctrl,)),
            Gate("CRPulse", (ctrl, tgt), half, -sign),
            Gate("X", (ctrl,)),
            Gate("CRPulse", (ctrl, tgt), half, sign),
        ]
    return Circuit(c.width, tuple(out))


def _wrap_pi(angle: float) -> float:
    return (angle + math.pi) % (2 * math.pi) - math.pi


def zyz_angles(u: np.ndarray) -> tuple[float, float, float]:
    """Angles (a, b, c) with u = e^{i phi} RZ(a) RY(b) RZ(c)."""
    v = u / np.sqrt(np.linalg.det(u))
    b = 2.0 * math.atan2(abs(v[1, 0]), abs(v[0, 0]))
    if abs(v[0, 0]) > 1e-12 and abs(v[1, 0]) > 1e-12:
        plus = 2.0 * np.angle(v[1, 1])
        minus = 2.0 * np.angle(v[1, 0])
    elif abs(v[1, 0]) <= 1e-12:
        plus, minus = 2.0 * np.angle(v[1, 1]), 0.0
    else:
        plus, minus = 0.0, 2.0 * np.angle(v[1, 0])
    a = (plus + minus) / 2
    c = (plus - minus) / 2
    return a, b, c


def _canonical_run(q: int, run: list[Gate]) -> list[Gate]:
    u = np.eye(2, dtype=complex)
    for g in run:
        u = g.matrix() @ u
    a, b, c = zyz_angles(u)
    if b < ANGLE_TOL:
        total = _wrap_pi(a + c)
        return [] if abs(total) < ANGLE_TOL else [Gate("RZ", (q,), total)]
    out = []
    c = _wrap_pi(c)
    a = _wrap_pi(a)
    if abs(c) >= ANGLE_TOL:
        out.append(Gate("RZ", (q,), c))
    out.append(Gate("RY", (q,), b))
    if abs(a) >= ANGLE_TOL:
        out.append(Gate("RZ", (q,), a))
    return out


def merge_single_qubit(c: Circuit) -> Circuit:
    """Collapse each maximal run of single-qubit gates to RZ . RY . RZ.

    Runs that multiply to the identity (up to phase) vanish, and runs without
    an RY component become one RZ. Zero-angle CR pulses are dropped, so the
    echo X gates around them cancel. Two-qubit gates, Measure and Delay are
    barriers for the qubits they touch; unbound gates are left in place.
    """
    out: list[Gate] = []
    pending: dict[int, list[Gate]] = {q: [] for q in range(c.width)}

    def flush(q):
        if pending[q]:
            out.extend(_canonical_run(q, pending[q]))
            pending[q] = []

    for g in c.gates:
        if g.is_single_qubit and g.is_bound:
            pending[g.qubits[0]].append(g)
            continue
        if g.kind == "CRPulse" and g.is_bound and g.angle < ANGLE_TOL:
            continue
        for q in g.qubits:
            flush(q)
        out.append(g)
    for q in range(c.width):
        flush(q)
    return Circuit(c.width, tuple(out))


def transpile(c: Circuit, mode: str) -> Circuit:
    """Full pipeline: ``"cnot"`` (CNOT basis) or ``"pe"`` (echoed CR pulses)."""
    if mode == "cnot":
        return merge_single_qubit(lower_to_cnot(c))
    if mode == "pe":
        return merge_single_qubit(expand_echo(lower_to_rzx(c)))
    raise ValueError(f"unknown transpilation mode {mode!r}; expected 'cnot' or 'pe'")


def basis_of(c: Circuit) -> set[BasisTarget]:
    """Basis targets the circuit already satisfies."""
    kinds = {g.kind for g in c.gates}
    two = kinds & G.TWO_QUBIT
    found = set()
    if two <= {"CNOT"}:
        found.add(BasisTarget.CNOT)
    if two <= {"RZX"}:
        found.add(BasisTarget.RZX)
    if two <= {"CRPulse"}:
        found.add(BasisTarget.ECHOED_PULSE)
    return found


def phase_aligned_distance(ua: np.ndarray, ub: np.ndarray) -> float:
    """max |ua - e^{i phi} ub| with phi taken from ub's largest entry."""
    idx = np.unravel_index(np.argmax(np.abs(ub)), ub.shape)
    ratio = ua[idx] / ub[idx]
    phase = ratio / abs(ratio) if abs(ratio) > 0 else 1.0
    return float(np.max(np.abs(ua - phase * ub)))


def check_equivalence(a: Circuit, b: Circuit, tol: float = 1e-8) -> bool:
    if a.width != b.width:
        raise ValueError(f"width mismatch: {a.width} vs {b.width}")
    if a.width > 10:
        raise ValueError("equivalence checking is limited to 10 qubits")
    return phase_aligned_distance(evaluate_unitary(a), evaluate_unitary(b)) <= tol

"""Gate kinds and their matrices.

All rotations follow R_G(theta) = exp(-i theta G / 2). Two-qubit matrices
use ``qubits[0]`` as the more significant bit, so ``RZX`` on ``(c, t)`` is
``exp(-i theta Z_c X_t / 2)``.
"""

import numpy as np

ONE_QUBIT = frozenset({"H", "X", "SX", "RX", "RY", "RZ"})
TWO_QUBIT = frozenset({"RZZ", "RZX", "CNOT", "CRPulse"})
DIRECTIVES = frozenset({"Measure", "Delay"})
KINDS = ONE_QUBIT | TWO_QUBIT | DIRECTIVES

ANGLED = frozenset({"RX", "RY", "RZ", "RZZ", "RZX", "CRPulse", "Delay"})

I2 = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
SQRT_X = 0.5 * np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]], dtype=complex)
CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)
ZZ = np.kron(PAULI_Z, PAULI_Z)
ZX = np.kron(PAULI_Z, PAULI_X)


def rx(theta):
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


def ry(theta):
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rz(theta):
    return np.array(
        [[np.exp(-0.5j * theta), 0], [0, np.exp(0.5j * theta)]], dtype=complex
    )


def rzz(theta):
    phase = np.exp(-0.5j * theta * np.array([1, -1, -1, 1]))
    return np.diag(phase).astype(complex)


def rzx(theta):
    # ZX is Hermitian and squares to identity
    return np.cos(theta / 2) * np.eye(4) - 1j * np.sin(theta / 2) * ZX


def cr_pulse(angle, sign=1, error=0.0):
    """Non-echoed CR pulse: exp(-i sign * angle * (1 + error) ZX / 2)."""
    return rzx(sign * angle * (1.0 + error))


def matrix(kind, angle=None, sign=1):
    """Unitary for a gate kind; raises for directives."""
    if kind == "H":
        return HADAMARD
    if kind == "X":
        return PAULI_X
    if kind == "SX":
        return SQRT_X
    if kind == "RX":
        return rx(angle)
    if kind == "RY":
        return ry(angle)
    if kind == "RZ":
        return rz(angle)
    if kind == "RZZ":
        return rzz(angle)
    if kind == "RZX":
        return rzx(angle)
    if kind == "CNOT":
        return CNOT
    if kind == "CRPulse":
        return cr_pulse(angle, sign)
    raise ValueError(f"gate kind {kind!r} has no unitary")

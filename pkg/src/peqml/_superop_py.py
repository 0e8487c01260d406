"""Pure-NumPy superoperator kernels (fallback for the compiled module).

Same index conventions as ``_superop.pyx``: qubit 0 is the most significant
bit; a superoperator maps the (row bits, column bits) block of its targets.
"""

import numpy as np


def _apply(rho, sop, qubits, n):
    k = len(qubits)
    dim = 1 << n
    if rho.shape != (dim, dim):
        raise ValueError("density matrix shape does not match qubit count")
    tensor = rho.reshape((2,) * (2 * n))
    axes = list(qubits) + [n + q for q in qubits]
    s = sop.reshape((2,) * (4 * k))
    out = np.tensordot(s, tensor, axes=(list(range(2 * k, 4 * k)), axes))
    out = np.moveaxis(out, list(range(2 * k)), axes)
    rho[...] = out.reshape(dim, dim)


def apply_superop_1q(rho, sop, qubit, n):
    if sop.shape != (4, 4):
        raise ValueError("single-qubit superoperator must be 4x4")
    _apply(rho, sop, (qubit,), n)


def apply_superop_2q(rho, sop, q0, q1, n):
    if q0 == q1:
        raise ValueError("two-qubit superoperator needs distinct qubits")
    if sop.shape != (16, 16):
        raise ValueError("two-qubit superoperator must be 16x16")
    _apply(rho, sop, (q0, q1), n)

import math

import numpy as np
import pytest
from conftest import X, Z, rotation
from hypothesis import given, settings
from hypothesis import strategies as st

from peqml.circuit import Circuit, Gate, evaluate_unitary
from peqml.transpiler import (
    BasisTarget,
    basis_of,
    check_equivalence,
    expand_echo,
    lower_to_cnot,
    lower_to_rzx,
    merge_single_qubit,
    phase_aligned_distance,
    transpile,
    zyz_angles,
)

KINDS = ("H", "RX", "RY", "RZ", "RZZ", "RZX", "CNOT")
special = st.sampled_from([0.0, math.pi / 2, -math.pi / 2, math.pi, -math.pi, 2 * math.pi, 1e-12])
angles = st.one_of(st.floats(-3 * math.pi, 3 * math.pi, allow_nan=False), special)


@st.composite
def circuits(draw, max_qubits=3, max_gates=8):
    n = draw(st.integers(1, max_qubits))
    kinds = [k for k in KINDS if n > 1 or k in ("H", "RX", "RY", "RZ")]
    gates = []
    for _ in range(draw(st.integers(0, max_gates))):
        kind = draw(st.sampled_from(kinds))
        if kind in ("RZZ", "RZX", "CNOT"):
            q = draw(st.integers(0, n - 2))
            qubits = (q, q + 1) if draw(st.booleans()) else (q + 1, q)
        else:
            qubits = (draw(st.integers(0, n - 1)),)
        angle = draw(angles) if kind not in ("H", "CNOT") else None
        gates.append(Gate(kind, qubits, angle))
    return Circuit(n, tuple(gates))


def distance(a, b):
    return phase_aligned_distance(evaluate_unitary(a), evaluate_unitary(b))


@settings(max_examples=150, deadline=None)
@given(circuits())
def test_every_stage_preserves_unitary(c):
    cnot = lower_to_cnot(c)
    rzx = lower_to_rzx(c)
    echo = expand_echo(rzx)
    assert distance(c, cnot) < 1e-8
    assert distance(c, rzx) < 1e-8
    assert distance(c, echo) < 1e-8
    assert distance(c, merge_single_qubit(c)) < 1e-8
    assert distance(c, transpile(c, "cnot")) < 1e-8
    assert distance(c, transpile(c, "pe")) < 1e-8


@settings(max_examples=60, deadline=None)
@given(circuits())
def test_pipelines_reach_their_basis(c):
    assert BasisTarget.CNOT in basis_of(transpile(c, "cnot"))
    assert BasisTarget.RZX in basis_of(lower_to_rzx(c))
    assert BasisTarget.ECHOED_PULSE in basis_of(transpile(c, "pe"))


@settings(max_examples=60, deadline=None)
@given(circuits())
def test_canonical_rzx_angles_are_folded(c):
    for g in lower_to_rzx(c).gates:
        if g.kind == "RZX":
            assert abs(g.angle) <= math.pi / 2 + 1e-12


@settings(max_examples=60, deadline=None)
@given(circuits())
def test_merge_leaves_short_runs(c):
    merged = merge_single_qubit(c)
    run = {q: 0 for q in range(c.width)}
    for g in merged.gates:
        if g.is_single_qubit:
            run[g.qubits[0]] += 1
            assert run[g.qubits[0]] <= 3
        else:
            for q in g.qubits:
                run[q] = 0


def test_echo_identity_random_angles(rng):
    # CR(t/2) X_c CR(-t/2) X_c = RZX(t), checked against matrix exponentials
    xc = np.kron(X, np.eye(2))
    for theta in rng.uniform(-math.pi, math.pi, 50):
        cr = lambda a: rotation(np.kron(Z, X), a)  # noqa: E731
        product = cr(theta / 2) @ xc @ cr(-theta / 2) @ xc
        assert np.max(np.abs(product - rotation(np.kron(Z, X), theta))) < 1e-12
        c = expand_echo(Circuit(2, (Gate("RZX", (0, 1), theta),)))
        assert np.max(np.abs(evaluate_unitary(c) - rotation(np.kron(Z, X), theta))) < 1e-12


def test_pe_pulse_area_scales_with_angle():
    for theta in (0.1, 0.5, 1.0):
        pe = transpile(Circuit(2, (Gate("RZZ", (0, 1), theta),)), "pe")
        pulses = [g for g in pe.gates if g.kind == "CRPulse"]
        assert len(pulses) == 2
        assert math.isclose(sum(g.angle for g in pulses), theta)


def test_zero_angle_two_qubit_gate_vanishes():
    pe = transpile(Circuit(2, (Gate("RZZ", (0, 1), 0.0),)), "pe")
    assert pe.count("CRPulse") == 0


def test_zyz_reconstructs(rng):
    from scipy.stats import unitary_group

    for _ in range(20):
        u = unitary_group.rvs(2, random_state=rng)
        a, b, c = zyz_angles(u)
        v = rotation(Z, a) @ rotation(np.array([[0, -1j], [1j, 0]]), b) @ rotation(Z, c)
        assert phase_aligned_distance(u, v) < 1e-10


def test_unknown_mode_and_bad_echo_input():
    c = Circuit(2, (Gate("RZZ", (0, 1), 0.3),))
    with pytest.raises(ValueError, match="unknown transpilation mode"):
        transpile(c, "magic")
    with pytest.raises(ValueError, match="RZX-basis"):
        expand_echo(c)


def test_check_equivalence_detects_difference():
    a = Circuit(1, (Gate("RX", (0,), 0.2),))
    b = Circuit(1, (Gate("RX", (0,), 0.2 + 1e-6),))
    assert check_equivalence(a, a)
    assert not check_equivalence(a, b)

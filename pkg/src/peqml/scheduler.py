"""ASAP pulse scheduling, dynamical decoupling and duration reports."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .circuit import Circuit, Gate
from .device import DeviceModel

_TIME_EPS = 1e-9


def gate_duration(g: Gate, dev: DeviceModel) -> float:
    """Duration in ns. RZ is virtual (0 ns); CR pulses scale with |angle|."""
    if not g.is_bound:
        raise ValueError(f"cannot time unbound {g.kind}")
    kind = g.kind
    if kind == "RZ":
        return 0.0
    if kind in ("H", "X", "SX", "RX", "RY"):
        return dev.t_1q
    if kind == "CRPulse":
        return dev.t_edge + abs(g.angle) / dev.omega_zx
    if kind == "CNOT":
        return dev.cnot_duration
    if kind == "Measure":
        return dev.t_meas
    if kind == "Delay":
        return g.angle
    raise ValueError(
        f"no duration rule for {kind}; lower the circuit to the CNOT or echoed-pulse basis first"
    )


@dataclass(frozen=True)
class TimedOp:
    start: float
    duration: float
    gate: Gate

    @property
    def end(self) -> float:
        return self.start + self.duration

    @property
    def qubits(self) -> tuple[int, ...]:
        return self.gate.qubits


@dataclass(frozen=True)
class Schedule:
    """Timed operations in execution order; idle time is explicit Delay."""

    n_qubits: int
    ops: tuple[TimedOp, ...]
    total_duration: float

    def per_qubit(self, q: int) -> list[TimedOp]:
        return [op for op in self.ops if q in op.qubits]

    def shifted(self, offset: float) -> "Schedule":
        ops = tuple(TimedOp(op.start + offset, op.duration, op.gate) for op in self.ops)
        return Schedule(self.n_qubits, ops, self.total_duration + offset)

    def __add__(self, other: "Schedule") -> "Schedule":
        """Run ``other`` after every qubit has finished ``self``."""
        if other.n_qubits != self.n_qubits:
            raise ValueError("cannot concatenate schedules of different widths")
        later = other.shifted(self.total_duration)
        return Schedule(self.n_qubits, self.ops + later.ops, later.total_duration)

    def validate(self) -> None:
        """Raise if any interval is negative, overlaps, or leaves a gap."""
        cursor = [0.0] * self.n_qubits
        for op in self.ops:
            if op.duration < 0 or op.start < -_TIME_EPS:
                raise ValueError(f"negative interval: {op}")
            for q in op.qubits:
                if abs(op.start - cursor[q]) > _TIME_EPS * max(1.0, op.start):
                    raise ValueError(f"qubit {q}: {op} does not start at {cursor[q]}")
                cursor[q] = op.end
        end = max(cursor) if cursor else 0.0
        if abs(end - self.total_duration) > _TIME_EPS * max(1.0, end):
            raise ValueError(f"total_duration {self.total_duration} != last end time {end}")


def schedule(c: Circuit, dev: DeviceModel) -> Schedule:
    """As-soon-as-possible list schedule.

    Gates start when all their qubits are free. Consecutive Measure gates
    form one readout group that starts once every qubit is free (aligned
    readout). Every gap, including the
    tail up to the makespan, becomes an explicit Delay.
    """
    if c.width > dev.n_qubits:
        raise ValueError(f"circuit has {c.width} qubits, device has {dev.n_qubits}")
    n = c.width
    avail = [0.0] * n
    ops: list[TimedOp] = []

    def pad(q, until):
        if until - avail[q] > _TIME_EPS:
            ops.append(TimedOp(avail[q], until - avail[q], Gate("Delay", (q,), until - avail[q])))
        avail[q] = max(avail[q], until)

    readout = None  # start time of the current group of aligned measurements
    for g in c.gates:
        d = gate_duration(g, dev)
        if g.kind == "Measure":
            q = g.qubits[0]
            if readout is None or avail[q] > readout + _TIME_EPS:
                readout = max(avail)
            start = readout
        else:
            readout = None
            start = max(avail[q] for q in g.qubits)
        for q in g.qubits:
            pad(q, start)
        ops.append(TimedOp(start, d, g))
        for q in g.qubits:
            avail[q] = start + d
    total = max(avail) if n else 0.0
    for q in range(n):
        pad(q, total)
    order = sorted(range(len(ops)), key=lambda i: (ops[i].start, i))
    return Schedule(n, tuple(ops[i] for i in order), total)


def insert_dd(s: Schedule, dev: DeviceModel, skip_leading: bool = True) -> Schedule:
    """Fill idle windows longer than two single-qubit gates with an echo.

    A window of length T becomes tau/2 - X_p - tau - X_m - tau/2 with
    tau = (T - 2 t_1q) / 2, so its length is unchanged. X_p and X_m are
    RX(pi) and RX(-pi). Windows before a qubit's first operation are left
    alone when ``skip_leading`` is set, since the qubit is still in |0>.
    """
    t = dev.t_1q
    touched = [False] * s.n_qubits
    ops: list[TimedOp] = []
    for op in s.ops:
        g = op.gate
        if g.kind != "Delay":
            for q in g.qubits:
                touched[q] = True
            ops.append(op)
            continue
        q = g.qubits[0]
        idle = op.duration
        if idle <= 2 * t + _TIME_EPS or (skip_leading and not touched[q]):
            ops.append(op)
            continue
        tau = (idle - 2 * t) / 2
        t0 = op.start
        seq = [
            (t0, tau / 2, Gate("Delay", (q,), tau / 2)),
            (t0 + tau / 2, t, Gate("RX", (q,), math.pi)),
            (t0 + tau / 2 + t, tau, Gate("Delay", (q,), tau)),
            (t0 + 1.5 * tau + t, t, Gate("RX", (q,), -math.pi)),
            (t0 + 1.5 * tau + 2 * t, tau / 2, Gate("Delay", (q,), tau / 2)),
        ]
        ops.extend(TimedOp(*item) for item in seq)
    order = sorted(range(len(ops)), key=lambda i: (ops[i].start, i))
    return Schedule(s.n_qubits, tuple(ops[i] for i in order), s.total_duration)


def total_duration(s: Schedule) -> float:
    return s.total_duration


def mean_duration(schedules: Iterable[Schedule]) -> float:
    durations = [s.total_duration for s in schedules]
    if not durations:
        raise ValueError("no schedules to average")
    return float(np.mean(durations))


def duration_report_rows(entries: Sequence[tuple[str, str, Schedule]]) -> list[dict]:
    """Rows for the duration CSV: circuit_id, mode, n_qubits, total_duration_ns."""
    return [
        {
            "circuit_id": cid,
            "mode": mode,
            "n_qubits": s.n_qubits,
            "total_duration_ns": s.total_duration,
        }
        for cid, mode, s in entries
    ]

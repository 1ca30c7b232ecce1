"""Elementary gates and the gate-decomposed quantum Fourier transform.

Forward QFT kernel is ``exp(+2*pi*i*n*m/N)/sqrt(N)``; the inverse is its
conjugate.  ``qft_circuit`` includes the bit-reversal swaps, so its output is
in standard bit order.
"""
from __future__ import annotations

import functools
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .state import StateVector, apply_register_matrix

KINDS = ("phase", "rotation", "hadamard", "controlled_phase", "swap")
_H = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2)


@dataclass(frozen=True)
class GateOp:
    """One gate.  ``qubits`` are global qubit indices.

    phase(theta, q):                 diag(1, e^{i theta})
    rotation(theta, q):              [[cos, -sin], [sin, cos]]  (real O(2))
    hadamard(q):                     QFT mixing gate, the reflection variant of O(2)
    controlled_phase(theta, c, t):   e^{i theta} on |11>
    swap(a, b)
    """

    kind: str
    qubits: tuple[int, ...]
    angle: float = 0.0

    def __post_init__(self):
        arity = {"phase": 1, "rotation": 1, "hadamard": 1, "controlled_phase": 2, "swap": 2}
        if self.kind not in arity:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if len(self.qubits) != arity[self.kind]:
            raise ValueError(f"{self.kind} acts on {arity[self.kind]} qubit(s)")
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError("gate qubits must be distinct")

    def shifted(self, offset: int) -> "GateOp":
        return GateOp(self.kind, tuple(q + offset for q in self.qubits), self.angle)

    def inverse(self) -> "GateOp":
        if self.kind in ("hadamard", "swap"):
            return self
        return GateOp(self.kind, self.qubits, -self.angle)

    def dump(self) -> str:
        args = ",".join(str(q) for q in self.qubits)
        if self.kind in ("hadamard", "swap"):
            return f"{self.kind},{args}"
        return f"{self.kind},{self.angle!r},{args}"

    @classmethod
    def parse(cls, line: str) -> "GateOp":
        parts = line.strip().split(",")
        kind = parts[0]
        if kind in ("hadamard", "swap"):
            return cls(kind, tuple(int(p) for p in parts[1:]))
        return cls(kind, tuple(int(p) for p in parts[2:]), float(parts[1]))


def phase(theta: float, q: int) -> GateOp:
    return GateOp("phase", (q,), theta)


def rotation(theta: float, q: int) -> GateOp:
    return GateOp("rotation", (q,), theta)


def hadamard(q: int) -> GateOp:
    return GateOp("hadamard", (q,))


def controlled_phase(theta: float, control: int, target: int) -> GateOp:
    return GateOp("controlled_phase", (control, target), theta)


def swap(a: int, b: int) -> GateOp:
    return GateOp("swap", (a, b))


@dataclass
class CircuitStats:
    gate_count: int
    breakdown: dict[str, int] = field(default_factory=dict)


def circuit_stats(gates: Sequence[GateOp]) -> CircuitStats:
    counts = Counter(g.kind for g in gates)
    return CircuitStats(sum(counts.values()), {k: counts.get(k, 0) for k in KINDS})


def _split(amps: np.ndarray, q: int, n: int) -> np.ndarray:
    return amps.reshape(1 << (n - q - 1), 2, 1 << q)


def apply_gate(state: StateVector, gate: GateOp) -> StateVector:
    n = state.layout.num_qubits
    for q in gate.qubits:
        if not 0 <= q < n:
            raise ValueError(f"qubit {q} out of range for {n} qubits")
    amps = state.amplitudes.copy()
    if gate.kind in ("phase", "rotation", "hadamard"):
        t = _split(amps, gate.qubits[0], n)
        if gate.kind == "phase":
            t[:, 1, :] *= np.exp(1j * gate.angle)
        else:
            if gate.kind == "rotation":
                c, s = np.cos(gate.angle), np.sin(gate.angle)
                m = np.array([[c, -s], [s, c]])
            else:
                m = _H
            a0 = t[:, 0, :].copy()
            a1 = t[:, 1, :]
            t[:, 0, :] = m[0, 0] * a0 + m[0, 1] * a1
            t[:, 1, :] = m[1, 0] * a0 + m[1, 1] * a1
        return StateVector(amps, state.layout)

    a, b = gate.qubits
    hi, lo = max(a, b), min(a, b)
    t = amps.reshape(1 << (n - hi - 1), 2, 1 << (hi - lo - 1), 2, 1 << lo)
    if gate.kind == "controlled_phase":
        t[:, 1, :, 1, :] *= np.exp(1j * gate.angle)
    else:
        tmp = t[:, 0, :, 1, :].copy()
        t[:, 0, :, 1, :] = t[:, 1, :, 0, :]
        t[:, 1, :, 0, :] = tmp
    return StateVector(amps, state.layout)


def apply_circuit(state: StateVector, gates: Sequence[GateOp]) -> StateVector:
    for g in gates:
        state = apply_gate(state, g)
    return state


def apply_multiplexed_rotation(state: StateVector, qubit: int, angles: np.ndarray) -> StateVector:
    """O(2) rotation of ``qubit`` whose angle depends on the other qubits.

    ``angles`` is indexed by global basis index; only entries with ``qubit``
    cleared are read.  This is a uniformly controlled rotation: one 2x2 block
    per setting of the remaining bits.
    """
    n = state.layout.num_qubits
    amps = state.amplitudes.copy()
    t = _split(amps, qubit, n)
    base = np.arange(state.layout.dim).reshape(t.shape)[:, 0, :]
    theta = np.asarray(angles)[base]
    c, s = np.cos(theta), np.sin(theta)
    a0 = t[:, 0, :].copy()
    a1 = t[:, 1, :].copy()
    t[:, 0, :] = c * a0 - s * a1
    t[:, 1, :] = s * a0 + c * a1
    return StateVector(amps, state.layout)


def qft_circuit(l: int) -> list[GateOp]:
    """QFT on qubits 0..l-1 (qubit l-1 most significant)."""
    if l < 1:
        raise ValueError("QFT needs at least one qubit")
    gates = []
    for i in range(l - 1, -1, -1):
        gates.append(hadamard(i))
        for j in range(i - 1, -1, -1):
            gates.append(controlled_phase(np.pi / (1 << (i - j)), j, i))
    for i in range(l // 2):
        gates.append(swap(i, l - 1 - i))
    return gates


def inverse_circuit(gates: Sequence[GateOp]) -> list[GateOp]:
    return [g.inverse() for g in reversed(gates)]


def apply_qft(state: StateVector, register: str, direction: str = "forward") -> StateVector:
    layout = state.layout
    gates = qft_circuit(layout.register(register).qubits)
    if direction == "inverse":
        gates = inverse_circuit(gates)
    elif direction != "forward":
        raise ValueError(f"direction must be 'forward' or 'inverse', got {direction!r}")
    off = layout.offset(register)
    return apply_circuit(state, [g.shifted(off) for g in gates])


@functools.lru_cache(maxsize=8)
def dft_matrix(size: int, direction: str = "forward") -> np.ndarray:
    """Dense unitary DFT matrix (cached and read-only)."""
    sign = {"forward": 1.0, "inverse": -1.0}[direction]
    n = np.arange(size)
    # reduce n*m mod size before scaling to keep the phase argument small
    m = np.exp(sign * 2j * np.pi * ((np.outer(n, n)) % size) / size) / np.sqrt(size)
    m.setflags(write=False)
    return m


def dft_direct(state: StateVector, register: str, direction: str = "forward") -> StateVector:
    """O(N^2) reference for :func:`apply_qft`."""
    size = state.layout.register(register).size
    return apply_register_matrix(state, register, dft_matrix(size, direction))


def dumps_circuit(gates: Sequence[GateOp]) -> str:
    return "".join(g.dump() + "\n" for g in gates)


def loads_circuit(text: str) -> list[GateOp]:
    return [GateOp.parse(ln) for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]

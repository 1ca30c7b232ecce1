"""Diagonal phase transforms |n> -> exp(i c F(n)) |n>.

``F`` is a fixed-point table: raw integers with ``b_frac`` fractional bits,
so the value used is ``raw / 2**b_frac``.  Two routes apply it:

* :func:`apply_phase_direct` multiplies each amplitude by its phase.
* :func:`apply_phase_ancilla` writes F(n) into an ancilla register
  (a reversible modular add), phases the ancilla one qubit at a time and
  subtracts F(n) again, leaving the ancilla in |0>.

The ancilla holds F in two's complement, so the representable range is
``|raw| < 2**(w - 1)`` for an ancilla of ``w`` qubits, i.e.
``|F| < 2**(w - b_frac - 1)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .gates import apply_circuit, phase
from .state import LayoutError, StateVector, apply_diagonal, marginal

DEFAULT_B_FRAC = 24
MAX_TABLE = 1 << 20


class AncillaError(ValueError):
    pass


@dataclass
class PhaseTable:
    raw: np.ndarray
    c: float
    arity: int = 1
    b_frac: int = DEFAULT_B_FRAC

    def __post_init__(self):
        self.raw = np.asarray(self.raw, dtype=np.int64).reshape(-1)
        if self.arity not in (1, 2, 3):
            raise ValueError("arity must be 1, 2 or 3")
        if self.raw.size > MAX_TABLE:
            raise ValueError(f"phase table larger than {MAX_TABLE} entries")
        if self.b_frac < 0:
            raise ValueError("b_frac must be non-negative")

    @classmethod
    def from_values(cls, values, c: float, arity: int = 1, b_frac: int = DEFAULT_B_FRAC) -> "PhaseTable":
        """Quantise real F values to the nearest multiple of 2**-b_frac."""
        values = np.asarray(values, dtype=np.float64).reshape(-1)
        raw = np.rint(values * float(1 << b_frac)).astype(np.int64)
        return cls(raw, c, arity, b_frac)

    @property
    def values(self) -> np.ndarray:
        return self.raw / float(1 << self.b_frac)

    @property
    def phases(self) -> np.ndarray:
        return self.c * self.values

    def required_bits(self) -> int:
        """Smallest two's-complement ancilla width holding every raw value."""
        m = int(np.max(np.abs(self.raw))) if self.raw.size else 0
        return max(1, m.bit_length() + 1)


def _check(state: StateVector, registers: Sequence[str], table: PhaseTable) -> None:
    if len(registers) != table.arity:
        raise ValueError(f"table arity {table.arity} but {len(registers)} registers given")
    size = int(np.prod([state.layout.register(r).size for r in registers]))
    if size != table.raw.size:
        raise LayoutError(f"table has {table.raw.size} entries, registers span {size}")


def apply_phase_direct(state: StateVector, registers: Sequence[str], table: PhaseTable) -> StateVector:
    _check(state, registers, table)
    return apply_diagonal(state, registers, np.exp(1j * table.phases))


def bitwise_gates(qubits: Sequence[int], c: float, signed: bool = False) -> list:
    """phase(c * 2**j) on the j-th qubit; with ``signed`` the top qubit carries -2**(w-1)."""
    w = len(qubits)
    gates = []
    for j, q in enumerate(qubits):
        weight = float(1 << j)
        if signed and j == w - 1:
            weight = -weight
        gates.append(phase(c * weight, q))
    return gates


def bitwise_phase(state: StateVector, register: str, c: float) -> StateVector:
    """|n> -> exp(i c n)|n> with exactly one phase gate per qubit."""
    return apply_circuit(state, bitwise_gates(state.layout.qubits_of(register), c))


def _domain_index(state: StateVector, registers: Sequence[str]) -> np.ndarray:
    """Flat table index for every global basis index."""
    layout = state.layout
    idx = np.zeros(layout.dim, dtype=np.int64)
    stride = 1
    for name in registers:
        idx += layout.values(name) * stride
        stride *= layout.register(name).size
    return idx


def modular_add(state: StateVector, registers: Sequence[str], table: PhaseTable,
                ancilla: str, sign: int = 1) -> StateVector:
    """|n, a> -> |n, a + sign*raw(n) mod 2**w>, a permutation of the basis."""
    layout = state.layout
    anc = layout.register(ancilla)
    off = layout.offset(ancilla)
    f = table.raw[_domain_index(state, registers)]
    a = layout.values(ancilla)
    g = np.arange(layout.dim, dtype=np.int64)
    target = g - (a << off) + (((a + sign * f) & (anc.size - 1)) << off)
    out = np.empty_like(state.amplitudes)
    out[target] = state.amplitudes
    return StateVector(out, layout)


def apply_phase_ancilla(state: StateVector, registers: Sequence[str], table: PhaseTable,
                        ancilla: str) -> StateVector:
    _check(state, registers, table)
    if ancilla in registers:
        raise ValueError("ancilla cannot be a domain register")
    anc = state.layout.register(ancilla)
    if table.required_bits() > anc.qubits:
        raise AncillaError(
            f"F needs {table.required_bits()} ancilla qubits, register {ancilla!r} has {anc.qubits}"
        )
    excited = 1.0 - marginal(state, ancilla)[0]
    if excited > 1e-12:
        raise AncillaError(f"ancilla {ancilla!r} is not in |0> (excited mass {excited:.3e})")

    state = modular_add(state, registers, table, ancilla, +1)
    scale = table.c / float(1 << table.b_frac)
    state = apply_circuit(state, bitwise_gates(state.layout.qubits_of(ancilla), scale, signed=True))
    return modular_add(state, registers, table, ancilla, -1)


# ---- text format ------------------------------------------------------------

def dumps_table(table: PhaseTable) -> str:
    lines = [f"# arity={table.arity} b_frac={table.b_frac} c={table.c!r}"]
    lines += [f"{i},{float(v)!r}" for i, v in enumerate(table.values)]
    return "\n".join(lines) + "\n"


def loads_table(text: str) -> PhaseTable:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    head = dict(tok.split("=", 1) for tok in lines[0].lstrip("# ").split())
    entries = [ln.split(",") for ln in lines[1:]]
    values = np.zeros(len(entries))
    for i, v in entries:
        values[int(i)] = float(v)
    return PhaseTable.from_values(values, float(head["c"]), int(head["arity"]), int(head["b_frac"]))


def load_values(path) -> np.ndarray:
    """Read an ``index,value`` file (header lines starting with # are skipped)."""
    rows = []
    with open(path) as fh:
        for ln in fh:
            if ln.strip() and not ln.startswith("#"):
                i, v = ln.split(",")[:2]
                rows.append((int(i), float(v)))
    out = np.zeros(len(rows))
    for i, v in rows:
        out[i] = v
    return out

"""Decay towards the ground state through a bath of two-level systems.

Bath qubit ``j`` has gap ``E0 * 2**-j``.  Each Trotter step applies the
system step, the bath free phases and, for every bath qubit, an O(2)
rotation whose angle is proportional to the system position measured from
the grid centre (coupling ``g * x * sigma_y``).  All three factors carry the
propagator's sign convention (``exp(+i H dt)``) so that resonant exchange
moves energy from the system into the bath.

After every ``reset_period`` steps the bath is observed and reset to |0>.
The energy recorded for a cycle is the system's <H> just before that reset;
measuring the bath does not change it on average.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .gates import apply_circuit, apply_multiplexed_rotation, phase
from .propagator import GridSpec, PotentialSpec, energy, trotter_step
from .state import (
    Register,
    RegisterLayout,
    StateVector,
    make_rng,
    measure_register,
    permute_register,
)

MAX_BATH_QUBITS = 4


@dataclass(frozen=True)
class BathSpec:
    n_levels: int = 1
    E0: float = 1.0
    g: float = 0.2
    reset_period: int = 50
    ramp: str = "constant"
    register: str = "bath"

    def __post_init__(self):
        if not 1 <= self.n_levels <= MAX_BATH_QUBITS:
            raise ValueError(f"bath needs 1..{MAX_BATH_QUBITS} levels")
        if self.g < 0:
            raise ValueError("coupling must be non-negative")
        if self.reset_period < 1:
            raise ValueError("reset period must be at least one step")
        if self.ramp not in ("constant", "linear"):
            raise ValueError(f"unknown ramp {self.ramp!r}")

    @property
    def gaps(self) -> np.ndarray:
        return self.E0 * 2.0 ** -np.arange(self.n_levels)

    def coupling_at(self, cycle: int, total_cycles: int | None) -> float:
        if self.ramp == "constant" or not total_cycles:
            return self.g
        return self.g * max(0.0, 1.0 - cycle / total_cycles)


@dataclass
class CycleRecord:
    cycle: int
    energy: float
    coupling: float
    outcomes: tuple[int, ...]


@dataclass
class CoolingReport:
    records: list[CycleRecord] = field(default_factory=list)

    @property
    def energies(self) -> np.ndarray:
        return np.array([r.energy for r in self.records])

    def dumps(self) -> str:
        lines = ["# cycle,energy,coupling,outcomes"]
        for r in self.records:
            bits = "".join(str(b) for b in r.outcomes)
            lines.append(f"{r.cycle},{r.energy!r},{r.coupling!r},{bits}")
        return "\n".join(lines) + "\n"


def attach_bath(state: StateVector, bath: BathSpec) -> StateVector:
    if bath.register in state.layout.names:
        return state
    layout = RegisterLayout(list(state.layout.registers) + [Register(bath.register, bath.n_levels, "bath")])
    amps = np.zeros(layout.dim, dtype=np.complex128)
    amps[: state.layout.dim] = state.amplitudes
    return StateVector(amps, layout)


def cooling_step(state: StateVector, system_register: str, grid: GridSpec, potential: PotentialSpec,
                 bath: BathSpec, cycle: int = 0, total_cycles: int | None = None) -> StateVector:
    """``reset_period`` joint Trotter steps of system, bath and coupling."""
    state = attach_bath(state, bath)
    layout = state.layout
    g = bath.coupling_at(cycle, total_cycles)
    bath_qubits = layout.qubits_of(bath.register)
    free = [phase(e * grid.dt, q) for e, q in zip(bath.gaps, bath_qubits)]
    x = (layout.values(system_register) - grid.N // 2) * grid.dx
    angles = -g * grid.dt * x
    for _ in range(bath.reset_period):
        state = trotter_step(state, system_register, grid, potential)
        state = apply_circuit(state, free)
        if g:
            for q in bath_qubits:
                state = apply_multiplexed_rotation(state, q, angles)
    return state


def reset_bath(state: StateVector, bath_register: str, seed) -> tuple[StateVector, tuple[int, ...]]:
    """Observe the bath, then flip the observed bits back to |0>.

    Returns the reset state and one outcome bit per bath qubit (qubit 0 first).
    """
    sample = measure_register(state, bath_register, seed)
    k = sample.outcome
    size = state.layout.register(bath_register).size
    mapping = np.arange(size) ^ k
    out = permute_register(sample.post_state, bath_register, mapping)
    bits = tuple((k >> j) & 1 for j in range(state.layout.register(bath_register).qubits))
    return out, bits


def run_cooling(initial: StateVector, system_register: str, grid: GridSpec, potential: PotentialSpec,
                bath: BathSpec, total_cycles: int, seed: int) -> tuple[StateVector, CoolingReport]:
    state = attach_bath(initial, bath)
    report = CoolingReport()
    for cycle in range(total_cycles):
        state = cooling_step(state, system_register, grid, potential, bath, cycle, total_cycles)
        e = energy(state, system_register, grid, potential)
        state, bits = reset_bath(state, bath.register, make_rng((seed, cycle)))
        report.records.append(CycleRecord(cycle, e, bath.coupling_at(cycle, total_cycles), bits))
    return state, report

"""Split-operator time steps built from a QFT and two diagonal phases.

Units: hbar = 1.  A grid of N = 2**l points with spacing ``dx`` and mass
``m`` is tied to its time step by ``m * dx**2 / dt = 2*pi*A / N`` with A a
positive integer.  Callers choose A and dt is derived.

One step maps amplitudes by the circulant kernel

    K[n, n'] = exp(-i*pi*A*(n - n')**2 / N + i*V(n)*dt) / sqrt(N)

factored as chirp(n') -> QFT_A -> chirp(n) * exp(i V(n) dt).  For A = 1 the
kinetic factor is exactly exp(+i T dt) with T = p**2/2m on the folded DFT
momenta (up to the constant Gauss-sum phase exp(-i pi/4)), so a step tracks
``exp(+i H dt)``.  The dense oracle :func:`reference_evolve` follows the same
sign so the two can be compared directly.  Odd A > 1 keeps the kernel unitary
but its momentum eigenphases are aliased; even A makes it singular and is
rejected.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .gates import apply_qft
from .phase import PhaseTable, apply_phase_direct
from .state import StateVector, apply_diagonal, apply_register_matrix, permute_register

MAX_ORACLE_QUBITS = 10


@dataclass(frozen=True)
class GridSpec:
    l: int
    dx: float
    mass: float = 1.0
    A: int = 1

    def __post_init__(self):
        if self.l < 1:
            raise ValueError("grid needs at least one qubit")
        if self.dx <= 0 or self.mass <= 0:
            raise ValueError("dx and mass must be positive")
        if int(self.A) != self.A or self.A < 1:
            raise ValueError("A must be a positive integer")

    @property
    def N(self) -> int:
        return 1 << self.l

    @property
    def dt(self) -> float:
        return self.mass * self.dx ** 2 * self.N / (2 * math.pi * self.A)

    @property
    def length(self) -> float:
        return self.N * self.dx

    @property
    def positions(self) -> np.ndarray:
        return np.arange(self.N) * self.dx

    @property
    def momenta(self) -> np.ndarray:
        """DFT momenta folded into (-N/2, N/2] cells, in units of 1/length."""
        k = np.arange(self.N)
        k = np.where(k > self.N // 2, k - self.N, k)
        return 2 * math.pi * k / (self.N * self.dx)

    @classmethod
    def for_box(cls, l: int, length: float, mass: float = 1.0, A: int = 1) -> "GridSpec":
        return cls(l, length / (1 << l), mass, A)

    def check(self) -> None:
        """dt is derived from dx, so only the A/N compatibility can fail."""
        if self.A > 1 and math.gcd(self.A, self.N) != 1:
            raise ValueError(f"A={self.A} shares a factor with N={self.N}; the step would not be unitary")


@dataclass
class PotentialSpec:
    values: np.ndarray
    provenance: str = "file"

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if not np.all(np.isfinite(self.values)):
            raise ValueError("potential has non-finite entries")

    def __len__(self):
        return len(self.values)

    def at(self, n) -> np.ndarray:
        return self.values[np.asarray(n) % len(self.values)]


def free_potential(grid: GridSpec) -> PotentialSpec:
    return PotentialSpec(np.zeros(grid.N), "free")


def harmonic_potential(grid: GridSpec, omega: float = 1.0) -> PotentialSpec:
    x = (np.arange(grid.N) - grid.N // 2) * grid.dx
    return PotentialSpec(0.5 * grid.mass * omega ** 2 * x ** 2, f"harmonic(omega={omega!r})")


def square_well_potential(grid: GridSpec, depth: float, width: float) -> PotentialSpec:
    x = (np.arange(grid.N) - grid.N // 2) * grid.dx
    v = np.where(np.abs(x) < width / 2, -depth, 0.0)
    return PotentialSpec(v, f"square_well(depth={depth!r}, width={width!r})")


def harmonic_grid(l: int, omega: float = 1.0, mass: float = 1.0, sigmas: float = 6.0) -> GridSpec:
    """A = 1 grid whose box spans +-``sigmas`` ground-state widths around N/2."""
    sigma = 1.0 / math.sqrt(2 * mass * omega)  # std of |psi0|**2
    return GridSpec.for_box(l, 2 * sigmas * sigma, mass, 1)


# ---- factored step ----------------------------------------------------------

def _chirp(grid: GridSpec) -> np.ndarray:
    n = np.arange(grid.N, dtype=np.int64)
    q = (grid.A * (n * n)) % (2 * grid.N)
    return np.exp(-1j * math.pi * q / grid.N)


def trotter_step(state: StateVector, register: str, grid: GridSpec, potential: PotentialSpec) -> StateVector:
    grid.check()
    if state.layout.register(register).qubits != grid.l:
        raise ValueError("register width does not match grid")
    if len(potential) != grid.N:
        raise ValueError("potential length does not match grid")
    chirp = _chirp(grid)
    state = apply_diagonal(state, [register], chirp)
    if grid.A > 1:
        state = permute_register(state, register, (grid.A * np.arange(grid.N)) % grid.N)
    state = apply_qft(state, register, "forward")
    return apply_diagonal(state, [register], chirp * np.exp(1j * potential.values * grid.dt))


def step_phase(grid: GridSpec) -> complex:
    """Constant global phase of one factored step relative to exp(+i H dt) (the Gauss sum)."""
    return complex(np.sum(_chirp(grid)) / math.sqrt(grid.N))


@dataclass
class CouplingSpec:
    """Diagonal multi-register energy F(n, n', ...) applied as exp(+i F dt)."""

    registers: tuple[str, ...]
    table: PhaseTable

    def __post_init__(self):
        self.registers = tuple(self.registers)
        if len(self.registers) not in (2, 3):
            raise ValueError("coupling acts on 2 or 3 registers")
        if self.table.arity != len(self.registers):
            raise ValueError("coupling table arity does not match registers")


def quadratic_coupling(registers: Sequence[str], grid: GridSpec, kappa: float) -> CouplingSpec:
    """F(n, n') = kappa * ((n - n') dx)**2 with the separation folded to the periodic window."""
    n = np.arange(grid.N)
    d = (n[None, :] - n[:, None]) % grid.N
    d = np.where(d > grid.N // 2, d - grid.N, d)
    f = kappa * (d * grid.dx) ** 2
    return CouplingSpec(tuple(registers), PhaseTable.from_values(f.reshape(-1), grid.dt, arity=2))


def evolve(state: StateVector, registers, grid: GridSpec, potential: PotentialSpec,
           couplings: Sequence[CouplingSpec] = (), steps: int = 1) -> StateVector:
    if steps < 0:
        raise ValueError("steps must be non-negative")
    if isinstance(registers, str):
        registers = [registers]
    for _ in range(steps):
        for reg in registers:
            state = trotter_step(state, reg, grid, potential)
        for cp in couplings:
            state = apply_phase_direct(state, cp.registers, cp.table)
    return state


# ---- dense oracle -----------------------------------------------------------

def kinetic_matrix(grid: GridSpec) -> np.ndarray:
    """p**2/2m on folded DFT momenta, as a dense position-space matrix."""
    tk = grid.momenta ** 2 / (2 * grid.mass)
    eye = np.eye(grid.N)
    return np.fft.ifft(tk[:, None] * np.fft.fft(eye, axis=0), axis=0)


def hamiltonian_matrix(grid: GridSpec, potential: PotentialSpec) -> np.ndarray:
    if grid.l > MAX_ORACLE_QUBITS:
        raise ValueError(f"dense oracle limited to l <= {MAX_ORACLE_QUBITS}")
    h = kinetic_matrix(grid) + np.diag(potential.values)
    return 0.5 * (h + h.conj().T)


@functools.lru_cache(maxsize=16)
def _eigh_cached(key: tuple, vbytes: bytes):
    l, dx, mass, A = key
    grid = GridSpec(l, dx, mass, A)
    pot = PotentialSpec(np.frombuffer(vbytes, dtype=np.float64))
    w, v = np.linalg.eigh(hamiltonian_matrix(grid, pot))
    w.setflags(write=False)
    v.setflags(write=False)
    return w, v


@dataclass
class Eigensystem:
    energies: np.ndarray
    vectors: np.ndarray  # columns are eigenvectors in position basis
    discretization_error: float = field(default=float("nan"))

    def state(self, j: int) -> np.ndarray:
        v = self.vectors[:, j].astype(np.complex128)
        # fix the sign so the largest component is real positive
        k = int(np.argmax(np.abs(v)))
        return v * (abs(v[k]) / v[k])


def eigensystem(grid: GridSpec, potential: PotentialSpec) -> Eigensystem:
    """Dense eigendecomposition of the discretised Hamiltonian.

    For a harmonic potential the discretisation error is reported as the
    largest deviation of the two lowest levels from omega*(j + 1/2).
    """
    w, v = _eigh_cached((grid.l, grid.dx, grid.mass, grid.A), potential.values.tobytes())
    err = float("nan")
    if potential.provenance.startswith("harmonic(omega="):
        omega = float(potential.provenance[len("harmonic(omega="):-1])
        err = float(max(abs(w[0] - omega / 2), abs(w[1] - 1.5 * omega)))
    return Eigensystem(w, v, err)


def reference_evolve(state: StateVector, register: str, grid: GridSpec, potential: PotentialSpec,
                     steps: float = 1) -> StateVector:
    """Exact exp(+i H steps*dt) on one register, the counterpart of ``steps`` factored steps."""
    es = eigensystem(grid, potential)
    u = (es.vectors * np.exp(1j * es.energies * steps * grid.dt)) @ es.vectors.conj().T
    return apply_register_matrix(state, register, u)


def energy(state: StateVector, register: str, grid: GridSpec, potential: PotentialSpec) -> float:
    """<H_system> for the given register on the joint state."""
    h = hamiltonian_matrix(grid, potential)
    hs = apply_register_matrix(state, register, h)
    return float(np.vdot(state.amplitudes, hs.amplitudes).real)


def two_particle_hamiltonian(grid: GridSpec, potential: PotentialSpec, coupling: CouplingSpec) -> np.ndarray:
    """Dense H on registers (a, b) with a least significant: T_a + T_b + V_a + V_b + F."""
    h1 = hamiltonian_matrix(grid, potential)
    eye = np.eye(grid.N)
    h = np.kron(eye, h1) + np.kron(h1, eye)
    return h + np.diag(coupling.table.values)

"""Loading a wave function into a register with a binary tree of O(2) rotations.

Level ``i`` of the tree splits the register range into ``2**i`` cells and
stores the probability ``I[i][k]`` of cell ``k``.  Round ``i`` of the
preparation rotates register qubit ``l - i`` conditioned on the ``i - 1``
more significant qubits already fixed, with ``sin(phi) = sqrt(I[i][2k+1] /
I[i-1][k])``.  The most significant qubit is split first.

Cells are either ``[k L/2**i, (k+1) L/2**i)`` (``centered=False``) or the
same intervals shifted left by half a leaf (``centered=True``, the default),
which makes leaf ``n`` the cell centred on the grid point ``n L/2**l``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .gates import apply_multiplexed_rotation
from .phase import PhaseTable, apply_phase_ancilla
from .state import RegisterLayout, StateVector, marginal, new_basis_state, swap_registers


class ZeroNormError(ValueError):
    pass


@dataclass
class TargetWavefunction:
    """Periodic target on [0, length): ``density`` is |psi(x)|**2, ``phase`` is arg psi(x)."""

    density: Callable[[np.ndarray], np.ndarray]
    length: float
    phase: Callable[[np.ndarray], np.ndarray] | None = None
    name: str = "custom"

    def __call__(self, x):
        return self.density(np.mod(x, self.length))

    def amplitudes(self, l: int) -> np.ndarray:
        """Directly sampled psi(n L / 2**l), normalised."""
        x = np.arange(1 << l) * self.length / (1 << l)
        a = np.sqrt(self(x)).astype(np.complex128)
        if self.phase is not None:
            a = a * np.exp(1j * self.phase(x))
        nrm = np.linalg.norm(a)
        if nrm == 0:
            raise ZeroNormError("target vanishes on every grid point")
        return a / nrm


def gaussian_target(length: float, center: float, sigma: float, momentum: float = 0.0) -> TargetWavefunction:
    """|psi|**2 ~ exp(-(x - center)**2 / (2 sigma**2)), optionally times exp(i momentum x)."""
    def density(x):
        d = x - center
        return np.exp(-d * d / (2 * sigma * sigma))
    phase = None
    if momentum:
        def phase(x):
            return momentum * x
    return TargetWavefunction(density, length, phase, f"gaussian({center!r},{sigma!r})")


def uniform_target(length: float) -> TargetWavefunction:
    return TargetWavefunction(lambda x: np.ones_like(x, dtype=float), length, None, "uniform")


def delta_target(length: float, l: int, n0: int) -> TargetWavefunction:
    """Indicator of the cell centred on grid point n0."""
    dx = length / (1 << l)

    def density(x):
        d = np.mod(x - n0 * dx + dx / 2, length)
        return (d < dx).astype(float)
    return TargetWavefunction(density, length, None, f"delta({n0})")


def plane_wave_target(length: float, k: int) -> TargetWavefunction:
    """Uniform magnitude with phase 2 pi k x / length."""
    return TargetWavefunction(lambda x: np.ones_like(x, dtype=float), length,
                              lambda x: 2 * math.pi * k * x / length, f"plane_wave({k})")


def sampled_target(values: np.ndarray, length: float) -> TargetWavefunction:
    """Piecewise-constant target from complex samples, one per grid cell (cells centred on samples)."""
    values = np.asarray(values, dtype=np.complex128)
    n = len(values)
    dx = length / n

    def idx(x):
        return np.floor(np.mod(x + dx / 2, length) / dx).astype(int) % n
    return TargetWavefunction(lambda x: np.abs(values[idx(x)]) ** 2, length,
                              lambda x: np.angle(values[idx(x)]), "sampled")


@dataclass
class SplitTree:
    l: int
    integrals: list[np.ndarray]  # integrals[i] has 2**i entries, integrals[0] == [1.0]
    angles: list[np.ndarray]     # angles[i] has 2**(i-1) entries for i >= 1; angles[0] unused
    quadrature_error: float = 0.0

    @property
    def leaves(self) -> np.ndarray:
        return self.integrals[self.l]


def leaf_integrals(target: TargetWavefunction, l: int, q: int = 16, centered: bool = True) -> np.ndarray:
    """Midpoint rule with q points per leaf (q * 2**(l-i) per level-i cell)."""
    if q < 1:
        raise ValueError("need at least one quadrature point per leaf")
    n = 1 << l
    dx = target.length / n
    h = dx / q
    start = -dx / 2 if centered else 0.0
    x = start + (np.arange(n * q) + 0.5) * h
    return target(x).reshape(n, q).sum(axis=1) * h


def build_split_tree(target: TargetWavefunction, l: int, q: int = 16, centered: bool = True) -> SplitTree:
    leaves = leaf_integrals(target, l, q, centered)
    # Richardson-style estimate of the leaf quadrature error from a half-resolution pass
    if q >= 2:
        coarse = leaf_integrals(target, l, q // 2, centered)
    else:
        coarse = leaf_integrals(target, l, 2, centered)
    total = leaves.sum()
    if not total > 0:
        raise ZeroNormError("target has zero total integral")
    leaves = leaves / total
    qerr = float(np.max(np.abs(coarse / coarse.sum() - leaves)) / 3.0)

    integrals = [None] * (l + 1)
    integrals[l] = leaves
    for i in range(l - 1, -1, -1):
        child = integrals[i + 1]
        integrals[i] = child[0::2] + child[1::2]
    angles = [np.zeros(0)]
    for i in range(1, l + 1):
        parent = integrals[i - 1]
        right = integrals[i][1::2]
        with np.errstate(invalid="ignore", divide="ignore"):
            ratio = np.where(parent > 0, right / parent, 0.0)
        angles.append(np.arcsin(np.sqrt(np.clip(ratio, 0.0, 1.0))))
    return SplitTree(l, integrals, angles, qerr)


def prepare_magnitude(layout: RegisterLayout, register: str, tree: SplitTree,
                      state: StateVector | None = None) -> StateVector:
    reg = layout.register(register)
    if reg.qubits != tree.l:
        raise ValueError("tree depth does not match register width")
    if state is None:
        state = new_basis_state(layout, 0)
    if 1.0 - marginal(state, register)[0] > 1e-12:
        raise ValueError(f"register {register!r} is not in |0>")
    l = tree.l
    off = layout.offset(register)
    values = layout.values(register)
    for i in range(1, l + 1):
        parent = values >> (l - i + 1)
        state = apply_multiplexed_rotation(state, off + l - i, tree.angles[i][parent])
    return state


def prepare_full(layout: RegisterLayout, register: str, target: TargetWavefunction, l: int,
                 ancilla: str, q: int = 16, centered: bool = True) -> StateVector:
    """Magnitude from the split tree, then arg psi through the ancilla phase route.

    The phase is stored as a fraction of a turn in two's complement, using
    every ancilla qubit but the sign bit for fractional precision.
    """
    tree = build_split_tree(target, l, q, centered)
    state = prepare_magnitude(layout, register, tree)
    if target.phase is None:
        return state
    w = layout.register(ancilla).qubits
    x = np.arange(1 << l) * target.length / (1 << l)
    turns = np.mod(target.phase(x) / (2 * math.pi) + 0.5, 1.0) - 0.5
    # |turns| <= 1/2 keeps |raw| <= 2**(w-2), inside the w-bit two's-complement range
    table = PhaseTable.from_values(turns, 2 * math.pi, arity=1, b_frac=w - 1)
    return apply_phase_ancilla(state, [register], table, ancilla)


def symmetrize_two_particle(state: StateVector, reg_a: str, reg_b: str, sign: int) -> StateVector:
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    swapped = swap_registers(state, reg_a, reg_b)
    out = state.amplitudes + sign * swapped.amplitudes
    nrm = np.linalg.norm(out)
    if nrm < 1e-12:
        raise ZeroNormError("projection onto the requested exchange symmetry is zero")
    return StateVector(out / nrm, state.layout)

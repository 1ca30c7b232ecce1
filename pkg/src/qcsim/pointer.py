"""Von Neumann pointer coupling H = k P A, spectra and eigenstate projection.

The pointer is a periodic register of ``p`` qubits (cells 0..2**p - 1).  The
coupling moves it to its momentum basis with an inverse QFT, applies the
phase ``exp(-2 pi i mu' k t a / 2**p)`` where ``mu'`` is the momentum index
folded into (-2**(p-1), 2**(p-1)], and returns with a forward QFT.  On an
A-eigenstate with eigenvalue ``a`` the pointer ends up displaced by ``k t a``
cells; a non-integer displacement gives a sinc-shaped peak around it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .gates import apply_qft
from .phase import PhaseTable, apply_phase_direct
from .propagator import GridSpec, PotentialSpec, eigensystem
from .state import (
    Register,
    RegisterLayout,
    StateVector,
    apply_register_matrix,
    from_register_states,
    make_rng,
    marginal,
    measure_register,
    sample_index,
    system_slice,
)

PEAK_MIN_FRACTION = 0.02
SUPPORT_TOL = 1e-9


class PointerError(ValueError):
    pass


@dataclass
class ObservableSpec:
    """Either a diagonal grid function ``values`` or a grid Hamiltonian.

    ``bounds`` default to the full eigenvalue range.  Narrower bounds are a
    promise about the input state's spectral support and are checked when
    the pointer is coupled.
    """

    register: str
    values: np.ndarray | None = None
    grid: GridSpec | None = None
    potential: PotentialSpec | None = None
    bounds: tuple[float, float] | None = None

    def __post_init__(self):
        if (self.values is None) == (self.grid is None):
            raise ValueError("give either diagonal values or a grid Hamiltonian")
        if self.values is not None:
            self.values = np.asarray(self.values, dtype=np.float64)
        if self.bounds is None:
            self.bounds = self.full_range()
        lo, hi = self.bounds
        if not (math.isfinite(lo) and math.isfinite(hi) and lo <= hi):
            raise ValueError(f"bad eigenvalue bounds {self.bounds}")

    @property
    def kind(self) -> str:
        return "diagonal" if self.values is not None else "hamiltonian"

    def full_range(self) -> tuple[float, float]:
        if self.values is not None:
            return float(self.values.min()), float(self.values.max())
        tmax = float(np.max(self.grid.momenta ** 2) / (2 * self.grid.mass))
        v = self.potential.values
        return float(v.min()), float(tmax + v.max())

    def spectral_weights(self, state: StateVector) -> tuple[np.ndarray, np.ndarray]:
        """Eigenvalues and the state's weight on each."""
        if self.values is not None:
            return self.values, marginal(state, self.register)
        es = eigensystem(self.grid, self.potential)
        rotated = apply_register_matrix(state, self.register, es.vectors.conj().T)
        return es.energies, marginal(rotated, self.register)


@dataclass
class PointerSpec:
    pointer: str
    qubits: int
    k: float
    t: float
    observable: ObservableSpec

    def __post_init__(self):
        lo, hi = self.observable.bounds
        if self.kt * (hi - lo) >= self.cells:
            raise PointerError(
                f"k*t*(a_max - a_min) = {self.kt * (hi - lo):.4g} does not fit {self.cells} pointer cells"
            )

    @property
    def kt(self) -> float:
        return self.k * self.t

    @property
    def cells(self) -> int:
        return 1 << self.qubits

    def folded_momenta(self) -> np.ndarray:
        mu = np.arange(self.cells)
        return np.where(mu > self.cells // 2, mu - self.cells, mu)

    def unwrap(self, cell) -> np.ndarray:
        """Map pointer cells into the window starting at floor(k t a_min)."""
        base = math.floor(self.kt * self.observable.bounds[0])
        cell = np.asarray(cell)
        return base + np.mod(cell - base, self.cells)

    def eigenvalue(self, cell) -> np.ndarray:
        return self.unwrap(cell) / self.kt


@dataclass
class SpectrumEstimate:
    histogram: np.ndarray
    peaks: list[tuple[float, float]]
    shots: int
    spec: PointerSpec = field(repr=False)

    def dumps(self) -> str:
        lines = ["# cell,count,eigenvalue_estimate"]
        for cell in np.nonzero(self.histogram)[0]:
            lines.append(f"{cell},{self.histogram[cell]},{float(self.spec.eigenvalue(cell))!r}")
        return "\n".join(lines) + "\n"


def attach_pointer(state: StateVector, spec: PointerSpec) -> StateVector:
    """Append the pointer register (most significant) in |0>."""
    if spec.pointer in state.layout.names:
        return state
    layout = RegisterLayout(list(state.layout.registers) + [Register(spec.pointer, spec.qubits, "pointer")])
    amps = np.zeros(layout.dim, dtype=np.complex128)
    amps[: state.layout.dim] = state.amplitudes
    return StateVector(amps, layout)


def _check_support(state: StateVector, spec: PointerSpec) -> None:
    lo, hi = spec.observable.bounds
    full_lo, full_hi = spec.observable.full_range()
    if lo <= full_lo and hi >= full_hi:
        return
    evals, weights = spec.observable.spectral_weights(state)
    outside = float(weights[(evals < lo) | (evals > hi)].sum())
    if outside > SUPPORT_TOL:
        raise PointerError(f"state has weight {outside:.3e} outside the declared bounds {spec.observable.bounds}")


def couple_pointer(state: StateVector, spec: PointerSpec) -> StateVector:
    state = attach_pointer(state, spec)
    if state.layout.register(spec.pointer).qubits != spec.qubits:
        raise PointerError("pointer register width does not match spec")
    if 1.0 - marginal(state, spec.pointer)[0] > 1e-12:
        raise PointerError("pointer register is not at cell 0")
    _check_support(state, spec)

    obs = spec.observable
    mu = spec.folded_momenta().astype(np.float64)
    state = apply_qft(state, spec.pointer, "inverse")
    c = -2 * math.pi * spec.kt / spec.cells
    if obs.kind == "diagonal":
        f = np.outer(obs.values, mu)  # flat index mu + cells * n
        state = apply_phase_direct(state, [spec.pointer, obs.register], PhaseTable.from_values(f, c, arity=2))
    else:
        es = eigensystem(obs.grid, obs.potential)
        state = apply_register_matrix(state, obs.register, es.vectors.conj().T)
        f = np.outer(es.energies, mu)
        state = apply_phase_direct(state, [spec.pointer, obs.register], PhaseTable.from_values(f, c, arity=2))
        state = apply_register_matrix(state, obs.register, es.vectors)
    return apply_qft(state, spec.pointer, "forward")


def find_peaks(histogram: np.ndarray, shots: int, spec: PointerSpec) -> list[tuple[float, float]]:
    """Local maxima with at least 2% of shots; weight and centroid over +-1 cell."""
    if shots == 0:
        return []
    h = np.asarray(histogram)
    m = len(h)
    peaks = []
    for x in range(m):
        left, right = h[(x - 1) % m], h[(x + 1) % m]
        if h[x] > left and h[x] >= right and h[x] >= PEAK_MIN_FRACTION * shots:
            cells = np.array([x - 1, x, x + 1])
            counts = h[cells % m].astype(np.float64)
            centre = spec.unwrap(x)
            centroid = float(np.dot(counts, centre + np.array([-1, 0, 1])) / counts.sum())
            peaks.append((centroid / spec.kt, float(counts.sum() / shots)))
    peaks.sort()
    return peaks


def pointer_distribution(state: StateVector, spec: PointerSpec) -> np.ndarray:
    return marginal(couple_pointer(state, spec), spec.pointer)


def sample_spectrum(state: StateVector, spec: PointerSpec, shots: int, seed: int) -> SpectrumEstimate:
    """Histogram of ``shots`` couple-and-observe runs on the same input.

    The coupled state does not depend on the shot, so it is computed once and
    each shot draws from the pointer marginal with its own generator seeded by
    ``(seed, shot)``.
    """
    hist = np.zeros(spec.cells, dtype=np.int64)
    if shots > 0:
        probs = pointer_distribution(state, spec)
        for shot in range(shots):
            hist[sample_index(probs, make_rng((seed, shot)))] += 1
    return SpectrumEstimate(hist, find_peaks(hist, shots, spec), shots, spec)


def project_to_eigenstate(state: StateVector, spec: PointerSpec, seed: int) -> tuple[float, StateVector]:
    """One coupled run and pointer observation; returns the estimate and the conditioned system state."""
    coupled = couple_pointer(state, spec)
    sample = measure_register(coupled, spec.pointer, seed)
    keep = [n for n in coupled.layout.names if n != spec.pointer]
    post = system_slice(sample.post_state, keep, {spec.pointer: sample.outcome})
    post.amplitudes /= np.linalg.norm(post.amplitudes)
    return float(spec.eigenvalue(sample.outcome)), post


# ---- repeated observation correlators ----------------------------------------

@dataclass
class CorrelatorRow:
    i: str
    j: str
    mean: float
    stderr: float
    mean_i: float
    mean_j: float
    connected: float
    connected_stderr: float


def estimate_two_point(state_factory: Callable[[], StateVector], register_pairs: Sequence[tuple[str, str]],
                       shots: int, seed: int,
                       evolve_between: Callable[[StateVector], StateVector] | None = None) -> list[CorrelatorRow]:
    """Sample <x_i x_j> by observing register i, optionally evolving, then observing j.

    Each (pair, shot) uses a fresh state from ``state_factory`` and a
    generator seeded by ``(seed, pair_index, shot)``.
    """
    rows = []
    for p, (ri, rj) in enumerate(register_pairs):
        xi = np.zeros(shots)
        xj = np.zeros(shots)
        for shot in range(shots):
            rng = make_rng((seed, p, shot))
            s = measure_register(state_factory(), ri, rng)
            state = s.post_state
            if evolve_between is not None:
                state = evolve_between(state)
            xi[shot] = s.outcome
            xj[shot] = measure_register(state, rj, rng).outcome
        prod = xi * xj
        cen = (xi - xi.mean()) * (xj - xj.mean())
        se = lambda v: float(v.std(ddof=1) / math.sqrt(shots)) if shots > 1 else float("nan")
        rows.append(CorrelatorRow(ri, rj, float(prod.mean()) if shots else float("nan"), se(prod),
                                  float(xi.mean()) if shots else float("nan"),
                                  float(xj.mean()) if shots else float("nan"),
                                  float(cen.mean()) if shots else float("nan"), se(cen)))
    return rows


def dumps_correlators(rows: Sequence[CorrelatorRow]) -> str:
    lines = ["# i,j,mean,stderr"] + [f"{r.i},{r.j},{r.mean!r},{r.stderr!r}" for r in rows]
    return "\n".join(lines) + "\n"


def two_lowest_mixture(grid: GridSpec, potential: PotentialSpec, layout: RegisterLayout, register: str,
                       levels: Sequence[int] = (0, 1)) -> StateVector:
    """Equal superposition of the given oracle eigenstates on ``register``."""
    es = eigensystem(grid, potential)
    v = sum(es.state(j) for j in levels) / math.sqrt(len(levels))
    return from_register_states(layout, {register: v})

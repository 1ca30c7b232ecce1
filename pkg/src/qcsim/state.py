"""Joint state vector over named qubit registers.

Bit order: within a register qubit 0 is the least-significant bit of the
register value.  Registers concatenate with the first listed register in the
least-significant bits of the global index, so for registers ``(a, b)`` the
global index is ``a + 2**len(a) * b``.

Sampling uses numpy's ``PCG64`` bit generator seeded through
``numpy.random.SeedSequence``.  A single uniform double is drawn per
measurement and mapped through the cumulative outcome distribution, so a
given seed reproduces the same outcome on every platform.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

MAX_QUBITS = 26
ROLES = ("system", "ancilla", "pointer", "bath")


class LayoutError(ValueError):
    pass


@dataclass(frozen=True)
class Register:
    name: str
    qubits: int
    role: str = "system"

    def __post_init__(self):
        if self.qubits < 1:
            raise LayoutError(f"register {self.name!r} needs at least one qubit")
        if self.role not in ROLES:
            raise LayoutError(f"unknown register role {self.role!r}")

    @property
    def size(self) -> int:
        return 1 << self.qubits


@dataclass(frozen=True)
class RegisterLayout:
    registers: tuple[Register, ...]

    def __init__(self, registers: Iterable):
        regs = tuple(r if isinstance(r, Register) else Register(*r) for r in registers)
        if not regs:
            raise LayoutError("layout needs at least one register")
        names = [r.name for r in regs]
        if len(set(names)) != len(names):
            raise LayoutError(f"duplicate register names in {names}")
        total = sum(r.qubits for r in regs)
        if total > MAX_QUBITS:
            raise LayoutError(f"{total} qubits exceeds the desk-scale cap of {MAX_QUBITS}")
        object.__setattr__(self, "registers", regs)

    @classmethod
    def single(cls, name: str, qubits: int, role: str = "system") -> "RegisterLayout":
        return cls([Register(name, qubits, role)])

    @property
    def num_qubits(self) -> int:
        return sum(r.qubits for r in self.registers)

    @property
    def dim(self) -> int:
        return 1 << self.num_qubits

    @property
    def names(self) -> list[str]:
        return [r.name for r in self.registers]

    def position(self, name: str) -> int:
        for i, r in enumerate(self.registers):
            if r.name == name:
                return i
        raise LayoutError(f"unknown register {name!r}")

    def register(self, name: str) -> Register:
        return self.registers[self.position(name)]

    def offset(self, name: str) -> int:
        """Global qubit index of the register's least-significant qubit."""
        pos = self.position(name)
        return sum(r.qubits for r in self.registers[:pos])

    def qubits_of(self, name: str) -> list[int]:
        off = self.offset(name)
        return list(range(off, off + self.register(name).qubits))

    def axis(self, name: str) -> int:
        """Axis of the register in :meth:`StateVector.tensor` views."""
        return len(self.registers) - 1 - self.position(name)

    @property
    def tensor_shape(self) -> tuple[int, ...]:
        return tuple(r.size for r in reversed(self.registers))

    def values(self, name: str) -> np.ndarray:
        """Register value for every global basis index."""
        idx = np.arange(self.dim, dtype=np.int64)
        return (idx >> self.offset(name)) & (self.register(name).size - 1)

    def without(self, *names: str) -> "RegisterLayout":
        return RegisterLayout([r for r in self.registers if r.name not in names])

    def header(self) -> str:
        regs = ";".join(f"{r.name}:{r.qubits}" for r in self.registers)
        return f"# L={self.num_qubits} registers={regs}"


@dataclass
class StateVector:
    amplitudes: np.ndarray
    layout: RegisterLayout = field(repr=False)

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=np.complex128)
        if self.amplitudes.shape != (self.layout.dim,):
            raise LayoutError(
                f"expected {self.layout.dim} amplitudes, got shape {self.amplitudes.shape}"
            )

    def copy(self) -> "StateVector":
        return StateVector(self.amplitudes.copy(), self.layout)

    def tensor(self) -> np.ndarray:
        """View with one axis per register, last listed register first."""
        return self.amplitudes.reshape(self.layout.tensor_shape)

    @classmethod
    def from_tensor(cls, tensor: np.ndarray, layout: RegisterLayout) -> "StateVector":
        return cls(np.ascontiguousarray(tensor).reshape(-1), layout)


@dataclass
class MeasurementSample:
    register_name: str
    outcome: int
    post_state: StateVector


def new_basis_state(layout: RegisterLayout, index: int) -> StateVector:
    if not 0 <= index < layout.dim:
        raise ValueError(f"basis index {index} out of range for {layout.num_qubits} qubits")
    amps = np.zeros(layout.dim, dtype=np.complex128)
    amps[index] = 1.0
    return StateVector(amps, layout)


def product_state(layout: RegisterLayout, values: dict[str, int]) -> StateVector:
    """Basis state with each named register set to the given value (others 0)."""
    index = 0
    for name, v in values.items():
        reg = layout.register(name)
        if not 0 <= v < reg.size:
            raise ValueError(f"value {v} does not fit register {name!r}")
        index |= v << layout.offset(name)
    return new_basis_state(layout, index)


def from_register_states(layout: RegisterLayout, parts: dict[str, np.ndarray]) -> StateVector:
    """Tensor product of per-register amplitude vectors; missing registers are |0>."""
    out = np.ones(1, dtype=np.complex128)
    for reg in reversed(layout.registers):
        vec = parts.get(reg.name)
        if vec is None:
            vec = np.zeros(reg.size, dtype=np.complex128)
            vec[0] = 1.0
        vec = np.asarray(vec, dtype=np.complex128)
        if vec.shape != (reg.size,):
            raise LayoutError(f"register {reg.name!r} expects {reg.size} amplitudes")
        out = np.kron(out, vec)
    return StateVector(out, layout)


def norm(state: StateVector) -> float:
    return float(np.sqrt(np.sum(np.abs(state.amplitudes) ** 2)))


def inner(a: StateVector, b: StateVector) -> complex:
    if a.layout != b.layout:
        raise LayoutError("states have different layouts")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def fidelity(a: StateVector, b: StateVector) -> float:
    return abs(inner(a, b)) ** 2


def distance(a: StateVector, b: StateVector) -> float:
    """Euclidean distance minimised over a global phase, sqrt(2 - 2|<a|b>|)."""
    return float(np.sqrt(max(0.0, 2.0 - 2.0 * abs(inner(a, b)))))


def make_rng(seed: int | Sequence[int]) -> np.random.Generator:
    """PCG64 generator; ``seed`` may be an int or a tuple of ints (e.g. seed, shot)."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def sample_index(probs: np.ndarray, rng: np.random.Generator) -> int:
    cdf = np.cumsum(probs)
    u = rng.random() * cdf[-1]
    k = int(np.searchsorted(cdf, u, side="right"))
    # guard against u landing on a zero-probability tail after rounding
    k = min(k, len(probs) - 1)
    while probs[k] == 0.0 and k > 0:
        k -= 1
    return k


def marginal(state: StateVector, register: str) -> np.ndarray:
    """Probability of each value of ``register``."""
    t = np.abs(state.tensor()) ** 2
    ax = state.layout.axis(register)
    other = tuple(i for i in range(t.ndim) if i != ax)
    return t.sum(axis=other)


def project(state: StateVector, register: str, value: int) -> StateVector:
    """Unnormalised projection onto ``register == value``."""
    t = state.tensor()
    ax = state.layout.axis(register)
    out = np.zeros_like(t)
    sl = [slice(None)] * t.ndim
    sl[ax] = value
    out[tuple(sl)] = t[tuple(sl)]
    return StateVector.from_tensor(out, state.layout)


def measure_register(state: StateVector, register: str, rng_seed) -> MeasurementSample:
    probs = marginal(state, register)
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else make_rng(rng_seed)
    k = sample_index(probs, rng)
    post = project(state, register, k)
    post.amplitudes /= np.sqrt(probs[k])
    return MeasurementSample(register, k, post)


def apply_diagonal(state: StateVector, registers: Sequence[str], factors: np.ndarray) -> StateVector:
    """Multiply amplitudes by ``factors`` indexed by the listed registers.

    ``factors`` is flat over the listed registers with the first one least
    significant, the same convention as the global index.
    """
    layout = state.layout
    regs = [layout.register(r) for r in registers]
    factors = np.asarray(factors)
    expect = int(np.prod([r.size for r in regs]))
    if factors.size != expect:
        raise LayoutError(f"diagonal has {factors.size} entries, registers need {expect}")
    t = factors.reshape([r.size for r in reversed(regs)])
    axes = [layout.axis(r.name) for r in reversed(regs)]
    order = np.argsort(axes)
    t = t.transpose(order)
    shape = [1] * len(layout.registers)
    for ax in sorted(axes):
        shape[ax] = layout.tensor_shape[ax]
    out = state.tensor() * t.reshape(shape)
    return StateVector.from_tensor(out, layout)


def apply_register_matrix(state: StateVector, register: str, matrix: np.ndarray) -> StateVector:
    """Apply a dense matrix to one register, identity elsewhere."""
    t = state.tensor()
    ax = state.layout.axis(register)
    out = np.tensordot(matrix, t, axes=([1], [ax]))
    out = np.moveaxis(out, 0, ax)
    return StateVector.from_tensor(out, state.layout)


def permute_register(state: StateVector, register: str, mapping: np.ndarray) -> StateVector:
    """Basis permutation |v> -> |mapping[v]> on one register."""
    mapping = np.asarray(mapping)
    size = state.layout.register(register).size
    if sorted(mapping.tolist()) != list(range(size)):
        raise ValueError("mapping is not a permutation")
    t = state.tensor()
    ax = state.layout.axis(register)
    out = np.empty_like(t)
    src = [slice(None)] * t.ndim
    dst = [slice(None)] * t.ndim
    src[ax] = np.arange(size)
    dst[ax] = mapping
    out[tuple(dst)] = t[tuple(src)]
    return StateVector.from_tensor(out, state.layout)


def swap_registers(state: StateVector, reg_a: str, reg_b: str) -> StateVector:
    layout = state.layout
    if layout.register(reg_a).qubits != layout.register(reg_b).qubits:
        raise LayoutError("registers differ in width")
    t = np.swapaxes(state.tensor(), layout.axis(reg_a), layout.axis(reg_b))
    return StateVector.from_tensor(t, layout)


def system_slice(state: StateVector, keep: Sequence[str], fixed: dict[str, int]) -> StateVector:
    """Amplitudes of ``keep`` registers with the ``fixed`` registers pinned, unnormalised."""
    layout = state.layout
    t = state.tensor()
    sl = [slice(None)] * t.ndim
    for name, v in fixed.items():
        sl[layout.axis(name)] = v
    sub = t[tuple(sl)]
    new_layout = RegisterLayout([r for r in layout.registers if r.name in keep])
    return StateVector.from_tensor(sub, new_layout)


def expectation_diag(state: StateVector, register: str, values: np.ndarray) -> float:
    return float(np.dot(marginal(state, register), values))


# ---- text dump format -----------------------------------------------------

def dumps_state(state: StateVector) -> str:
    lines = [state.layout.header()]
    for i, a in enumerate(state.amplitudes):
        lines.append(f"{i},{float(a.real)!r},{float(a.imag)!r}")
    return "\n".join(lines) + "\n"


def parse_header(line: str) -> RegisterLayout:
    if not line.startswith("# "):
        raise ValueError(f"bad state header: {line!r}")
    fields = dict(tok.split("=", 1) for tok in line[2:].split())
    regs = []
    for item in fields["registers"].split(";"):
        name, q = item.split(":")
        regs.append(Register(name, int(q)))
    layout = RegisterLayout(regs)
    if int(fields["L"]) != layout.num_qubits:
        raise ValueError("header L disagrees with register widths")
    return layout


def loads_state(text: str, layout: RegisterLayout | None = None) -> StateVector:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    file_layout = parse_header(lines[0])
    if layout is not None and layout.num_qubits != file_layout.num_qubits:
        raise LayoutError("file layout does not match requested layout")
    layout = layout or file_layout
    amps = np.zeros(layout.dim, dtype=np.complex128)
    for ln in lines[1:]:
        i, re, im = ln.split(",")
        amps[int(i)] = complex(float(re), float(im))
    return StateVector(amps, layout)


def save_state(state: StateVector, path) -> None:
    with open(path, "w") as fh:
        fh.write(dumps_state(state))


def load_state(path, layout: RegisterLayout | None = None) -> StateVector:
    with open(path) as fh:
        return loads_state(fh.read(), layout)

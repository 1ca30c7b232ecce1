import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qcsim.phase import (
    AncillaError,
    PhaseTable,
    apply_phase_ancilla,
    apply_phase_direct,
    bitwise_gates,
    bitwise_phase,
    dumps_table,
    loads_table,
)
from qcsim.state import Register, RegisterLayout, StateVector, fidelity, marginal, product_state

from conftest import random_state


def with_ancilla(l, w, extra=()):
    return RegisterLayout([("x", l), *extra, Register("anc", w, "ancilla")])


def random_system_state(layout, rng, registers=("x",)):
    """Random amplitudes on the system registers, ancilla at |0>."""
    amps = np.zeros(layout.dim, dtype=complex)
    idx = np.arange(layout.dim)
    mask = layout.values("anc") == 0
    amps[mask] = rng.normal(size=mask.sum()) + 1j * rng.normal(size=mask.sum())
    return StateVector(amps / np.linalg.norm(amps), layout)


def test_zero_scale_identity(rng):
    lay = RegisterLayout.single("x", 4)
    s = random_state(lay, rng)
    t = PhaseTable.from_values(rng.normal(size=16), c=0.0)
    assert np.array_equal(apply_phase_direct(s, ["x"], t).amplitudes, s.amplitudes)


def test_parity_phase():
    lay = RegisterLayout.single("x", 1)
    s = StateVector(np.array([1, 1]) / np.sqrt(2), lay)
    out = apply_phase_direct(s, ["x"], PhaseTable.from_values([0, 1], np.pi, b_frac=0))
    assert np.allclose(out.amplitudes, np.array([1, -1]) / np.sqrt(2), atol=1e-15)


def test_direct_matches_elementwise(rng):
    lay = RegisterLayout([("a", 1), ("x", 6)])
    s = random_state(lay, rng)
    t = PhaseTable.from_values(rng.uniform(-50, 50, size=64), c=0.37)
    out = apply_phase_direct(s, ["x"], t)
    idx = np.arange(lay.dim)
    expected = s.amplitudes * np.exp(1j * 0.37 * t.values[idx >> 1])
    assert np.max(np.abs(out.amplitudes - expected)) < 1e-14


def test_direct_two_registers_elementwise(rng):
    lay = RegisterLayout([("a", 3), ("b", 2), ("c", 2)])
    s = random_state(lay, rng)
    vals = rng.uniform(-3, 3, size=8 * 4)
    t = PhaseTable.from_values(vals, c=1.3, arity=2)
    # domain order (c, a): flat index c + 4 * a
    out = apply_phase_direct(s, ["c", "a"], t)
    idx = np.arange(lay.dim)
    a, c = idx & 7, idx >> 5
    expected = s.amplitudes * np.exp(1j * 1.3 * t.values[c + 4 * a])
    assert np.max(np.abs(out.amplitudes - expected)) < 1e-14


def test_arity_mismatch(rng):
    lay = RegisterLayout([("a", 2), ("b", 2)])
    with pytest.raises(ValueError):
        apply_phase_direct(random_state(lay, rng), ["a"], PhaseTable.from_values(np.zeros(16), 1.0, arity=2))


def test_bitwise_single_qubit():
    lay = RegisterLayout.single("x", 1)
    s = StateVector(np.array([1, 1]) / np.sqrt(2), lay)
    assert np.allclose(bitwise_phase(s, "x", np.pi).amplitudes, np.array([1, -1]) / np.sqrt(2))


def test_bitwise_matches_direct(rng):
    lay = RegisterLayout.single("x", 8)
    for _ in range(5):
        s = random_state(lay, rng)
        c = float(rng.uniform(-3, 3))
        direct = apply_phase_direct(s, ["x"], PhaseTable.from_values(np.arange(256), c, b_frac=0))
        assert np.max(np.abs(bitwise_phase(s, "x", c).amplitudes - direct.amplitudes)) < 1e-12


def test_bitwise_gate_count():
    assert len(bitwise_gates(list(range(7)), 0.1)) == 7


def test_ancilla_zero_scale(rng):
    lay = with_ancilla(3, 6)
    s = random_system_state(lay, rng)
    t = PhaseTable.from_values(rng.integers(-10, 10, size=8), c=0.0, b_frac=0)
    out = apply_phase_ancilla(s, ["x"], t, "anc")
    assert np.max(np.abs(out.amplitudes - s.amplitudes)) < 1e-15
    assert 1 - marginal(out, "anc")[0] < 1e-14


def test_ancilla_identity_table_matches_direct(rng):
    lay = with_ancilla(5, 7)
    s = random_system_state(lay, rng)
    t = PhaseTable.from_values(np.arange(32), c=0.813, b_frac=0)
    a = apply_phase_ancilla(s, ["x"], t, "anc")
    d = apply_phase_direct(s, ["x"], t)
    assert np.max(np.abs(a.amplitudes - d.amplitudes)) < 1e-12


def test_ancilla_fractional_bound(rng):
    lay = with_ancilla(4, 22)
    s = random_system_state(lay, rng)
    f = rng.uniform(-10, 10, size=16)
    c = 2.7
    out = apply_phase_ancilla(s, ["x"], PhaseTable.from_values(f, c, b_frac=16), "anc")
    exact = apply_phase_direct(s, ["x"], PhaseTable.from_values(f, c, b_frac=40))
    keep = np.abs(s.amplitudes) > 0
    dphi = np.angle(out.amplitudes[keep] / exact.amplitudes[keep])
    assert np.max(np.abs(dphi)) <= abs(c) * 2.0 ** -16


def test_ancilla_two_register_coupling(rng):
    lay = with_ancilla(3, 9, extra=[("y", 3)])
    s = random_system_state(lay, rng)
    t = PhaseTable.from_values(rng.integers(-60, 60, size=64), c=0.21, arity=2, b_frac=0)
    a = apply_phase_ancilla(s, ["x", "y"], t, "anc")
    d = apply_phase_direct(s, ["x", "y"], t)
    assert np.max(np.abs(a.amplitudes - d.amplitudes)) < 1e-12


def test_ancilla_three_register_coupling(rng):
    lay = with_ancilla(2, 8, extra=[("y", 2), ("z", 2)])
    s = random_system_state(lay, rng)
    t = PhaseTable.from_values(rng.integers(-100, 100, size=64), c=-0.5, arity=3, b_frac=0)
    a = apply_phase_ancilla(s, ["x", "y", "z"], t, "anc")
    d = apply_phase_direct(s, ["x", "y", "z"], t)
    assert np.max(np.abs(a.amplitudes - d.amplitudes)) < 1e-12


def test_ancilla_not_zero_rejected():
    lay = with_ancilla(2, 3)
    s = product_state(lay, {"x": 1, "anc": 2})
    with pytest.raises(AncillaError):
        apply_phase_ancilla(s, ["x"], PhaseTable.from_values([0, 1, 2, 3], 1.0, b_frac=0), "anc")


def test_ancilla_overflow_rejected():
    lay = with_ancilla(2, 3)
    s = product_state(lay, {"x": 1})
    with pytest.raises(AncillaError):
        apply_phase_ancilla(s, ["x"], PhaseTable.from_values([0, 1, 2, 4], 1.0, b_frac=0), "anc")


@settings(max_examples=40, deadline=None)
@given(values=st.lists(st.integers(-127, 127), min_size=16, max_size=16),
       c=st.floats(-4, 4, allow_nan=False), seed=st.integers(0, 2**32 - 1))
def test_ancilla_route_property(values, c, seed):
    rng = np.random.default_rng(seed)
    lay = with_ancilla(4, 8)
    s = random_system_state(lay, rng)
    t = PhaseTable.from_values(values, c, b_frac=0)
    a = apply_phase_ancilla(s, ["x"], t, "anc")
    assert np.max(np.abs(a.amplitudes - apply_phase_direct(s, ["x"], t).amplitudes)) < 1e-12
    assert 1 - marginal(a, "anc")[0] < 1e-14
    assert np.max(np.abs(np.abs(a.amplitudes) - np.abs(s.amplitudes))) < 1e-14


def test_table_file_roundtrip(rng):
    t = PhaseTable.from_values(rng.uniform(-4, 4, size=16), 0.75, b_frac=20)
    text = dumps_table(t)
    assert text.startswith("# arity=1 b_frac=20 c=0.75\n")
    back = loads_table(text)
    assert np.array_equal(back.raw, t.raw)
    assert back.c == t.c

import math

import numpy as np
import pytest
from scipy.special import erf

from qcsim.gates import apply_qft
from qcsim.prep import (
    TargetWavefunction,
    ZeroNormError,
    build_split_tree,
    delta_target,
    gaussian_target,
    leaf_integrals,
    plane_wave_target,
    prepare_full,
    prepare_magnitude,
    symmetrize_two_particle,
    uniform_target,
)
from qcsim.state import (
    Register,
    RegisterLayout,
    StateVector,
    fidelity,
    marginal,
    new_basis_state,
    product_state,
    swap_registers,
    system_slice,
)


def prepared(target, l, **kw):
    lay = RegisterLayout.single("x", l)
    return prepare_magnitude(lay, "x", build_split_tree(target, l, **kw))


def gaussian_cell_oracle(length, center, sigma, l):
    """Exact cell integrals of exp(-(x-c)^2/(2 sigma^2)) via erf, cells centred on grid points."""
    n = 1 << l
    dx = length / n
    s = sigma * math.sqrt(2)

    def mass(a, b):
        return 0.5 * (erf((b - center) / s) - erf((a - center) / s))
    w = np.array([mass(max(0.0, (k - 0.5) * dx), min(length, (k + 0.5) * dx)) for k in range(n)])
    w[0] += mass(length - dx / 2, length)  # cell 0 wraps round the periodic box
    return w / w.sum()


def test_uniform_target():
    s = prepared(uniform_target(1.0), 4)
    assert np.allclose(s.amplitudes, 0.25, atol=1e-14)


def test_delta_target():
    s = prepared(delta_target(1.0, 5, 11), 5)
    assert abs(s.amplitudes[11]) == pytest.approx(1.0, abs=1e-14)


def test_one_sided_support_with_plain_cells():
    target = TargetWavefunction(lambda x: (x < 0.5).astype(float), 1.0)
    s = prepared(target, 4, centered=False)
    assert np.all(np.abs(s.amplitudes[8:]) == 0)
    assert np.allclose(np.abs(s.amplitudes[:8]) ** 2, 1 / 8, atol=1e-14)


def test_zero_target_rejected():
    with pytest.raises(ZeroNormError):
        build_split_tree(TargetWavefunction(lambda x: np.zeros_like(x), 1.0), 3)


def test_tree_consistency():
    tree = build_split_tree(gaussian_target(1.0, 0.4, 0.1), 6)
    assert tree.integrals[0][0] == pytest.approx(1.0, abs=1e-15)
    for i in range(6):
        assert np.allclose(tree.integrals[i], tree.integrals[i + 1][0::2] + tree.integrals[i + 1][1::2],
                           atol=1e-15)
    for i in range(1, 7):
        right = tree.integrals[i][1::2]
        parent = tree.integrals[i - 1]
        assert np.allclose(np.sin(tree.angles[i]) ** 2 * parent, right, atol=1e-15)


def test_gaussian_leaves_match_erf():
    l, L = 6, 1.0
    target = gaussian_target(L, L / 2, L / 10)
    leaves = leaf_integrals(target, l, q=4096)
    leaves = leaves / leaves.sum()
    oracle = gaussian_cell_oracle(L, L / 2, L / 10, l)
    big = oracle > 1e-12
    assert np.max(np.abs(leaves[big] - oracle[big]) / oracle[big]) < 1e-6


def test_prepared_probabilities_are_leaves():
    tree = build_split_tree(gaussian_target(1.0, 0.3, 0.07), 7)
    s = prepare_magnitude(RegisterLayout.single("x", 7), "x", tree)
    assert np.max(np.abs(np.abs(s.amplitudes) ** 2 - tree.leaves)) < 1e-14


@pytest.mark.parametrize("l,bound", [(6, 1e-5), (8, 1e-7)])
def test_gaussian_fidelity(l, bound):
    L = 1.0
    s = prepared(gaussian_target(L, L / 2, L / 10), l)
    x = np.arange(1 << l) * L / (1 << l)
    psi = np.exp(-((x - L / 2) ** 2) / (4 * (L / 10) ** 2))
    psi = psi / np.linalg.norm(psi)
    assert 1 - fidelity(s, StateVector(psi.astype(complex), s.layout)) < bound


def test_prepare_requires_zero_register():
    lay = RegisterLayout.single("x", 3)
    tree = build_split_tree(uniform_target(1.0), 3)
    with pytest.raises(ValueError):
        prepare_magnitude(lay, "x", tree, new_basis_state(lay, 1))


def test_prepare_leaves_other_registers():
    lay = RegisterLayout([("a", 2), ("x", 4)])
    start = product_state(lay, {"a": 3})
    tree = build_split_tree(gaussian_target(1.0, 0.5, 0.15), 4)
    s = prepare_magnitude(lay, "x", tree, start)
    assert marginal(s, "a")[3] == pytest.approx(1.0, abs=1e-14)


def test_plane_wave_matches_qft_column():
    l, w = 5, 10
    lay = RegisterLayout([("x", l), Register("anc", w, "ancilla")])
    for k in (0, 3, 17):
        s = prepare_full(lay, "x", plane_wave_target(1.0, k), l, "anc")
        col = apply_qft(new_basis_state(lay, k), "x")
        assert marginal(s, "anc")[0] == pytest.approx(1.0, abs=1e-14)
        assert 1 - fidelity(s, col) < 1e-12


def test_gaussian_with_momentum():
    l, w, L = 6, 14, 1.0
    lay = RegisterLayout([("x", l), Register("anc", w, "ancilla")])
    target = gaussian_target(L, L / 2, L / 10, momentum=40.0)
    s = prepare_full(lay, "x", target, l, "anc")
    x = np.arange(1 << l) * L / (1 << l)
    psi = np.exp(-((x - L / 2) ** 2) / (4 * (L / 10) ** 2) + 40j * x)
    psi = psi / np.linalg.norm(psi)
    sys = system_slice(s, ["x"], {"anc": 0})
    assert 1 - abs(np.vdot(psi, sys.amplitudes)) ** 2 < 1e-5


def test_symmetrize_examples():
    lay = RegisterLayout([("a", 1), ("b", 1)])
    s = product_state(lay, {"a": 0, "b": 1})
    plus = symmetrize_two_particle(s, "a", "b", +1)
    minus = symmetrize_two_particle(s, "a", "b", -1)
    assert np.allclose(plus.amplitudes, [0, 1, 1, 0] / np.sqrt(2))
    # index = a + 2 b: |a=0,b=1> is index 2, |a=1,b=0> is index 1
    assert np.allclose(minus.amplitudes, [0, -1, 1, 0] / np.sqrt(2))
    with pytest.raises(ZeroNormError):
        symmetrize_two_particle(product_state(lay, {"a": 1, "b": 1}), "a", "b", -1)
    with pytest.raises(ValueError):
        symmetrize_two_particle(s, "a", "b", 0)


def test_symmetrize_idempotent_and_exchange(rng):
    from conftest import random_state
    lay = RegisterLayout([("a", 3), ("b", 3)])
    for sign in (1, -1):
        s = symmetrize_two_particle(random_state(lay, rng), "a", "b", sign)
        again = symmetrize_two_particle(s, "a", "b", sign)
        assert np.max(np.abs(again.amplitudes - s.amplitudes)) < 1e-14
        sw = swap_registers(s, "a", "b")
        assert np.max(np.abs(sw.amplitudes - sign * s.amplitudes)) < 1e-14

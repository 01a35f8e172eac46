from fractions import Fraction

import numpy as np
import pytest
from oracles import brute_symmetrize_1d, dense_contract

from skewfd.lattice import Lattice, SiteIndex
from skewfd.skewtensor import (
    AsymmetricModulationError,
    GeneralTensor,
    SkewTensor,
    SymmetricModulation,
    bandwidth,
    canonical,
    contract,
    contract_partial,
    delta_tensor,
    divergence_residual,
    is_g_invariant,
    is_skew,
    mean_modulation,
    modulate,
    symmetrize,
    upwind_left_modulation,
)
from skewfd.stencil import central, to_tensor
from skewfd.symmetry import generate_group, multi_index, point_group

RING = Lattice("line1d", (8,))
NOGROUP = generate_group([], dimension=1)


def S(*ls):
    return multi_index(*ls)


def test_canonical_sorting_parity():
    key, par = canonical(S(2, 0, 1))
    assert [s.l for s in key] == [(0,), (1,), (2,)] and par == 1
    assert canonical(S(1, 0))[1] == -1
    assert canonical(S(1, 1)) == (None, 0)


def test_skew_storage_rejects_repeats():
    t = SkewTensor(2, {}, RING)
    t.add(S(0, 1), 3)
    assert t.value(S(1, 0)) == -3
    with pytest.raises(ValueError):
        t.add(S(2, 2), 1)
    t.add(S(1, 0), 3)
    assert len(t) == 0


def test_is_skew_on_general_tensors():
    g = GeneralTensor(2, {}, RING)
    g.add(S(0, 1), 1)
    assert not is_skew(g)
    g.add(S(1, 0), -1)
    assert is_skew(g)
    g.add(S(3, 3), 1)
    rep = is_skew(g)
    assert not rep and "repeated" in rep.detail


@pytest.mark.parametrize("base", [[0, 1], [0, 2], [0, 1, 2], [0, 1, 3], [0, 2, 1, 5]])
def test_symmetrize_matches_brute_force(base):
    t = symmetrize(delta_tensor(S(*base), 1, RING), NOGROUP, RING)
    ref = brute_symmetrize_1d(base, 8)
    got = {tuple(s.l[0] for s in k): v for k, v in t.full_entries()}
    assert got == ref


def test_symmetrized_tensor_is_translation_invariant():
    t = symmetrize(delta_tensor(S(0, 1, 2), 1, RING), NOGROUP, RING)
    assert is_g_invariant(t, NOGROUP, RING)
    refl = point_group("reflection", "line1d")
    assert not is_g_invariant(t, refl, RING)


def test_contract_exact_matches_loops():
    t = symmetrize(delta_tensor(S(0, 1, 3), 1, RING), NOGROUP, RING)
    rng = np.random.default_rng(0)
    g = [[Fraction(int(x), 3) for x in rng.integers(-5, 6, 8)] for _ in range(2)]
    arr = [np.array(x, dtype=object) for x in g]
    F = contract(t, arr)
    full = {tuple(s.l[0] for s in k): v for k, v in t.full_entries()}
    ref = dense_contract(full, g, 8)
    assert list(F[:, 0]) == ref
    assert all(isinstance(x, Fraction) for x in F.flat)


def test_contract_float_close_to_exact():
    t = symmetrize(delta_tensor(S(0, 1, 2), 1, RING), NOGROUP, RING)
    rng = np.random.default_rng(1)
    g = [rng.standard_normal(8) for _ in range(2)]
    ex = contract(t, [np.array([Fraction(x) for x in v], dtype=object) for v in g])
    fl = contract(t, g)
    assert np.allclose(fl, np.array(ex, dtype=float), atol=1e-14)


def test_contract_checks_arity_and_shape():
    t = to_tensor(central(), RING)
    with pytest.raises(ValueError):
        contract(t, [np.zeros(8), np.zeros(8)])
    with pytest.raises(ValueError):
        contract(t, [np.zeros(5)])


def test_contract_partial_gives_casimir():
    t = symmetrize(delta_tensor(S(0, 1, 2), 1, RING), NOGROUP, RING)
    c = np.array([Fraction(k * k - 3) for k in range(8)], dtype=object)
    k2 = contract_partial(t, c)
    assert k2.rank == 2
    rng = np.random.default_rng(2)
    v = np.array([Fraction(int(x)) for x in rng.integers(-4, 5, 8)], dtype=object)
    F = contract(k2, [v])[:, 0]
    assert sum(F * c) == 0


def test_json_roundtrip():
    t = symmetrize(delta_tensor(S(0, 1, 2), Fraction(1, 3), RING), NOGROUP, RING)
    back = SkewTensor.from_json(t.to_json())
    assert back == t and back.lattice == RING


def test_bandwidth():
    t = symmetrize(delta_tensor(S(0, 1, 3), 1, RING), NOGROUP, RING)
    assert bandwidth(t) == 3


def test_mean_modulation_rows():
    # 1/(2h) * (u_i + u_j)/2 on the central tensor: row 1 = (-(u0+u1)/2, 0, (u1+u2)/2)/(2h)
    h = 0.1
    lat = Lattice("line1d", (8,), h=h)
    k = to_tensor(central(), lat)
    k.scale = 1 / (2 * h)
    mt = modulate(k, mean_modulation())
    u = np.arange(8, dtype=float) + 1.0
    dense = mt.at(u).to_dense()
    assert dense[1, 0] == pytest.approx(-(u[0] + u[1]) / 2 / (2 * h))
    assert dense[1, 2] == pytest.approx((u[1] + u[2]) / 2 / (2 * h))
    assert dense[1, 1] == 0
    assert np.allclose(dense, -dense.T)


def test_asymmetric_modulation_rejected():
    k = to_tensor(central(), RING)
    with pytest.raises(AsymmetricModulationError):
        modulate(k, SymmetricModulation(lambda xi, xj, ui, uj: ui, "left-value"))


def test_divergence_of_modulations():
    h = 0.1
    lat = Lattice("line1d", (8,), h=h)
    k = to_tensor(central(), lat)
    k.scale = 1 / (2 * h)
    u = np.random.default_rng(3).uniform(0.5, 2.0, 8)
    assert divergence_residual(modulate(k, mean_modulation()), u) <= 1e-8
    assert divergence_residual(modulate(k, upwind_left_modulation()), u) >= 0.1 / h
    assert divergence_residual(k, u) == 0.0


def test_upwind_modulation_rows():
    h = 0.5
    lat = Lattice("line1d", (6,), h=h)
    k = to_tensor(central(), lat)
    k.scale = 1 / (2 * h)
    u = np.arange(6, dtype=float) + 1
    d = modulate(k, upwind_left_modulation()).at(u).to_dense()
    # row i: (-u_{i-1}, 0, u_i) / h
    assert d[2, 1] == pytest.approx(-u[1] / h) and d[2, 3] == pytest.approx(u[2] / h)
    assert d[0, 5] == pytest.approx(-u[5] / h)

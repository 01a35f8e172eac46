import numpy as np
import pytest

from skewfd.lattice import Lattice
from skewfd.symmetry import (
    GroupError,
    SignedPermutation,
    SignedSymmetry,
    generate_group,
    multi_index,
    permutation_parity,
    point_group,
    relocators,
)


@pytest.mark.parametrize("preset,kind,order", [
    ("translations", "square2d", 1),
    ("reflection", "square2d", 2),
    ("c4", "square2d", 4),
    ("d4", "square2d", 8),
    ("d3", "triangular2d", 6),
    ("d6", "triangular2d", 12),
    ("oh", "cubic3d", 48),
    ("oh", "fcc3d", 48),
    ("full", "line1d", 2),
])
def test_point_group_orders(preset, kind, order):
    assert len(point_group(preset, kind)) == order


def test_triangular_generators_preserve_neighbours():
    from skewfd.lattice import neighbor_offsets

    nb = set(neighbor_offsets("triangular2d"))
    for g in point_group("d6", "triangular2d"):
        assert {g.apply_l(o) for o in nb} == nb


def test_inconsistent_signs_rejected():
    # rotation3 has odd order, so it cannot carry sign -1
    with pytest.raises(GroupError):
        point_group("c3", "triangular2d", signs={"rotation3": -1})


def test_unknown_sign_override_rejected():
    with pytest.raises(GroupError):
        point_group("c4", "square2d", signs={"mirror": -1})


def test_non_unimodular_matrix_rejected():
    with pytest.raises(GroupError):
        SignedSymmetry([[2, 0], [0, 1]], (0, 0))


def test_max_order_guard():
    t = SignedSymmetry.translation((1,))
    with pytest.raises(GroupError):
        generate_group([t], max_order=50)
    # on a periodic lattice the same generator closes
    assert len(generate_group([t], lattice=Lattice("line1d", (5,)))) == 5


def test_compose_and_inverse():
    g = SignedSymmetry([[0, -1], [1, 0]], (2, 3), -1)
    e = g.compose(g.inverse())
    assert e.matrix == ((1, 0), (0, 1)) and e.shift == (0, 0) and e.sign == 1


def test_permutations():
    assert permutation_parity((1, 0, 2)) == -1
    assert permutation_parity((1, 2, 0)) == 1
    r = SignedPermutation.rotation(3, 1)
    assert r(("a", "b", "c")) == ("b", "c", "a")
    assert r.inverse()(r(("a", "b", "c"))) == ("a", "b", "c")
    # rotating an (p+1)-tuple by z has parity (-1)^(z p)
    for n in range(2, 6):
        for z in range(n):
            assert SignedPermutation.rotation(n, z).sign == (-1) ** (z * (n - 1))


def test_relocators_translations_only():
    mi = multi_index(0, 1, 2)
    rel = relocators(generate_group([], dimension=1), mi)
    assert len(rel) == 3
    for g, sigma in rel:
        moved = sigma(tuple(g(s) for s in mi))
        assert moved[0].l == (0,)


def test_relocators_dedupe_repeated_sites():
    mi = multi_index(0, 0, 1)
    rel = relocators(generate_group([], dimension=1), mi)
    assert len(rel) == 2


def test_component_map_action():
    g = SignedSymmetry(np.eye(1, dtype=int), (0,), 1, (1, 0))
    from skewfd.lattice import SiteIndex

    assert g(SiteIndex((3,), 0)) == SiteIndex((3,), 1)
    assert g.inverse().component_map == (1, 0)
    ident = SignedSymmetry(np.eye(1, dtype=int), (0,), 1, (0, 1))
    assert ident.component_map is None

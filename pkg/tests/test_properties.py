import itertools
import warnings
from fractions import Fraction

import numpy as np
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st
from oracles import parity

from skewfd.dynamics import skew_form_from_field
from skewfd.lattice import Lattice, SiteIndex
from skewfd.skewtensor import (
    SkewTensor,
    canonical,
    contract,
    contract_partial,
    delta_tensor,
    symmetrize,
)
from skewfd.stencil import build_stencil, to_tensor
from skewfd.symmetry import generate_group, multi_index, point_group
from skewfd.verify import conservation_residual, random_rational

FAST = settings(max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow])

bases_1d = st.lists(st.integers(-3, 3), min_size=1, max_size=3, unique=True).filter(
    lambda xs: 0 not in xs).map(lambda xs: [0] + xs)

bases_2d = st.lists(st.tuples(st.integers(-1, 1), st.integers(-1, 1)), min_size=2, max_size=2,
                    unique=True).filter(lambda xs: (0, 0) not in xs).map(lambda xs: [(0, 0)] + xs)


@FAST
@given(bases_1d, st.integers(0, 1000))
def test_stencil_tensor_symmetrize_agree_1d(base, seed):
    lat = Lattice("line1d", (13,))
    s = build_stencil(base)
    t = to_tensor(s, lat)
    ref = symmetrize(delta_tensor(multi_index(*base), 1, lat), generate_group([], dimension=1), lat)
    assert t == ref
    rng = np.random.default_rng(seed)
    g = [random_rational((13, 1), rng) for _ in range(s.p)]
    assert np.array_equal(s.apply(g, lat), contract(t, g))
    assert conservation_residual(s, g, lat).residual == 0


@FAST
@given(bases_2d, st.sampled_from(["translations", "reflection", "c4", "d4"]),
       st.integers(0, 1000))
def test_symmetrized_2d_stencils_conserve(base, preset, seed):
    signs = {"mirror": -1} if preset == "d4" else None
    group = point_group(preset, "square2d", signs)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        s = build_stencil(base, group, kind="square2d", group_preset=preset)
    lat = Lattice("square2d", (8, 8))
    rng = np.random.default_rng(seed)
    g = [random_rational((8, 8, 1), rng) for _ in range(s.p)]
    assert conservation_residual(s, g, lat).residual == 0
    for r in group:
        assert s.transformed(r).same_arrows(s)


@FAST
@given(st.permutations(range(4)), st.integers(-5, 5).filter(bool))
def test_skew_value_parity(perm, c):
    mi = multi_index(0, 2, 5, 7)
    t = SkewTensor(4, {}, Lattice("line1d", (8,)))
    t.add(mi, Fraction(c))
    permuted = tuple(mi[k] for k in perm)
    assert t.value(permuted) == parity(perm) * c
    assert canonical(permuted)[1] == parity(perm)


@FAST
@given(st.lists(st.integers(-20, 20), min_size=2, max_size=2))
def test_wrap_idempotent(l):
    lat = Lattice("triangular2d", (5, 7))
    w = lat.wrap(l)
    assert lat.wrap(w) == w and lat.contains(w)


@FAST
@given(bases_1d.filter(lambda b: len(b) == 3), st.integers(0, 1000))
def test_partial_contraction_casimir(base, seed):
    lat = Lattice("line1d", (13,))
    t = to_tensor(build_stencil(base), lat)
    rng = np.random.default_rng(seed)
    c = random_rational((13, 1), rng)
    k = contract_partial(t, c)
    v = random_rational((13, 1), rng)
    assert sum((contract(k, [v]) * c).flat) == 0


@FAST
@given(st.lists(st.floats(-3, 3), min_size=3, max_size=3),
       st.lists(st.floats(-3, 3), min_size=3, max_size=3))
def test_skew_form_reproduces_orthogonal_fields(g, a):
    g, a = np.array(g), np.array(a)
    if np.linalg.norm(g) < 0.1:
        return
    f = a - (a @ g) / (g @ g) * g
    sf = skew_form_from_field(f, g)
    assert np.allclose(sf.J, -sf.J.T)
    assert np.allclose(sf.J @ g, f, atol=1e-9)

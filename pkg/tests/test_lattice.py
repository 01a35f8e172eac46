import math

import numpy as np
import pytest

from skewfd.lattice import GridFunction, Lattice, SiteIndex, neighbor_offsets


def test_extent_broadcast_and_sites():
    lat = Lattice("square2d", (4,))
    assert lat.extent == (4, 4)
    assert len(lat.sites()) == 16


def test_wrap_periodic_and_bounded():
    lat = Lattice("line1d", (8,))
    assert lat.wrap((9,)) == (1,)
    assert lat.wrap((-1,)) == (7,)
    closed = Lattice("line1d", (8,), periodic=False)
    with pytest.raises(IndexError):
        closed.wrap((8,))


def test_fcc_sites_have_even_sum():
    lat = Lattice("fcc3d", (4,))
    assert all(sum(s) % 2 == 0 for s in lat.sites())
    assert len(lat.sites()) == 32
    with pytest.raises(IndexError):
        lat.wrap((1, 0, 0))
    with pytest.raises(ValueError):
        Lattice("fcc3d", (5,))


@pytest.mark.parametrize("kind", ["line1d", "square2d", "triangular2d", "cubic3d", "fcc3d"])
def test_neighbours_are_at_graph_distance_one(kind):
    lat = Lattice(kind, (8,))
    origin = (0,) * lat.dimension
    for o in neighbor_offsets(kind):
        assert lat.graph_distance(origin, o) == 1


def test_triangular_neighbours_equidistant():
    lat = Lattice("triangular2d", (8,), h=0.5)
    d = {round(lat.euclidean_distance((0, 0), o), 12) for o in neighbor_offsets("triangular2d")}
    assert d == {0.5}


def test_minimum_image_distance():
    lat = Lattice("square2d", (8,))
    assert lat.graph_distance((0, 0), (7, 7)) == 2
    assert math.isclose(lat.euclidean_distance((0, 0), (7, 1)), math.sqrt(2))


def test_sample_and_gridfunction():
    lat = Lattice("line1d", (5,), h=0.5)
    v = lat.sample(lambda x: x[0])
    g = GridFunction(lat, v)
    assert g[SiteIndex((2,), 0)] == pytest.approx(1.0)
    assert g[SiteIndex((7,), 0)] == pytest.approx(1.0)
    with pytest.raises(ValueError):
        GridFunction(lat, np.zeros(4))


def test_lattice_dict_roundtrip():
    lat = Lattice("triangular2d", (6, 4), periodic=(True, False), h=0.25)
    assert Lattice.from_dict(lat.to_dict()) == lat


def test_invalid_kind():
    with pytest.raises(ValueError):
        Lattice("hex", (4,))

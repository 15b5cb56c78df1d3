import math

import pytest

from netforge.catalog import (catalog, catalog_names, chain, complete_polygon,
                              n_c, n_v, n_y, polygon, polygon_center,
                              regular_polygon, regular_polygon_subdivided,
                              triangle)
from netforge.network import (NetworkError, edge_key, forces, is_balanced,
                              is_embedded, is_unitary, lengths)


def test_chain():
    net = chain(4)
    assert net.n == 4 and net.m == 3
    assert is_unitary(net)
    assert is_embedded(net)
    assert not is_balanced(net)
    with pytest.raises(NetworkError):
        chain(1)
    with pytest.raises(NetworkError):
        chain(3, weights=[1.0])


def test_regular_polygon():
    for n in (3, 5, 8):
        net = regular_polygon(n)
        assert net.n == n and net.m == n
        assert is_unitary(net)
        assert is_embedded(net)
        assert not is_balanced(net)
    with pytest.raises(NetworkError):
        regular_polygon(2)


def test_regular_polygon_subdivided():
    net = regular_polygon_subdivided(5, 3)
    assert net.n == 15 and net.m == 15
    assert is_unitary(net)
    assert is_embedded(net)


def test_triangle():
    net = triangle(0.3, (1.0, -2.0, 0.5))
    assert is_unitary(net)
    assert net.weights[edge_key("z0", "z1")] == 1.0
    assert net.weights[edge_key("z1", "z2")] == -2.0
    assert net.weights[edge_key("z0", "z2")] == 0.5


def test_polygon_rejects_bad_input():
    with pytest.raises(NetworkError):
        polygon([0j, 1 + 0j], [1.0, 1.0])
    with pytest.raises(NetworkError):
        polygon([0j, 1 + 0j, 1j], [1.0, 1.0])


def test_polygon_center_weights_and_balance():
    for k in (3, 5, 7):
        net = polygon_center(k)
        assert net.n == k + 1 and net.m == 2 * k
        assert net.weights[edge_key("v0", "v1")] == 1.0
        assert net.weights[edge_key("c", "v0")] == pytest.approx(
            -2.0 * math.sin(math.pi / k))
        assert is_balanced(net, 1e-12)
        flipped = polygon_center(k, flip_signs=True)
        assert flipped.weights[edge_key("v0", "v1")] == -1.0
        assert is_balanced(flipped, 1e-12)
    with pytest.raises(NetworkError):
        polygon_center(2)


def test_nv_balanced():
    net = n_v(math.pi / 6)
    assert is_balanced(net, 1e-12)
    assert is_embedded(net)
    with pytest.raises(NetworkError):
        n_v(math.pi / 3)


def test_ny_balanced():
    for nu, mu in ((0.3, 0.8), (0.5, 1.2)):
        net = n_y(nu, mu)
        assert max(abs(f) for f in forces(net).values()) < 1e-14
        assert is_embedded(net)
    with pytest.raises(NetworkError):
        n_y(0.8, 0.3)


def test_nc_balanced():
    for a, b in ((0.3, 0.5), (0.1, 0.9), (0.03, 0.06)):
        net = n_c(a, b)
        assert max(abs(f) for f in forces(net).values()) < 1e-14
        assert is_embedded(net)
    with pytest.raises(NetworkError):
        n_c(0.5, 0.3)


def test_complete_polygon_not_embedded():
    net = complete_polygon(5)
    assert net.m == 10
    assert not is_embedded(net)


def test_complete_polygon_ring_unit():
    net = complete_polygon(4)
    L = lengths(net)
    assert L[edge_key("z0", "z1")] == pytest.approx(1.0)


def test_catalog_dispatch():
    assert "N_C" in catalog_names()
    net = catalog("polygon_center", k=6)
    assert net.n == 7
    with pytest.raises(NetworkError):
        catalog("nope")

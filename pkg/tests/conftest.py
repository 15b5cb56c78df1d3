import os

import numpy as np
import pytest

from netforge.interaction import load_or_build

CACHE_DIR = os.environ.get(
    "NETFORGE_CACHE",
    os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))),
                 ".cache"))


@pytest.fixture(scope="session")
def table():
    return load_or_build(directory=CACHE_DIR)


@pytest.fixture(scope="session")
def cache_env():
    env = dict(os.environ)
    env["NETFORGE_CACHE"] = CACHE_DIR
    return env


def random_network(rng, n=None):
    """Connected-ish random embedded network for property tests."""
    from netforge.network import Network, edge_key
    if n is None:
        n = int(rng.integers(3, 13))
    verts = {}
    while len(verts) < n:
        z = complex(*rng.uniform(-5, 5, 2))
        if all(abs(z - w) > 1e-3 for w in verts.values()):
            verts[f"p{len(verts)}"] = z
    ids = sorted(verts)
    weights = {}
    for i in range(1, n):
        j = int(rng.integers(0, i))
        weights[edge_key(ids[i], ids[j])] = float(rng.uniform(0.2, 3.0)
                                                  * rng.choice([-1, 1]))
    extra = int(rng.integers(0, n))
    for _ in range(extra):
        i, j = rng.integers(0, n, 2)
        if i == j:
            continue
        k = edge_key(ids[int(i)], ids[int(j)])
        if k not in weights:
            weights[k] = float(rng.uniform(0.2, 3.0) * rng.choice([-1, 1]))
    return Network(verts, weights)

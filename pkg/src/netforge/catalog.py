"""Constructors for the example networks.

All constructors return `Network` objects with the documented vertex
positions and weights; parameter ranges are enforced strictly.
"""

import cmath
import math

from .network import Network, NetworkError, edge_key


def chain(n, weights=None):
    """N_I: the chain z_j = j, j = 0..n-1, with unit edges.

    `weights` optionally gives the n-1 edge weights (default all 1).
    """
    if n < 2:
        raise NetworkError("chain needs n >= 2")
    if weights is None:
        weights = [1.0] * (n - 1)
    if len(weights) != n - 1:
        raise NetworkError("chain needs n-1 weights")
    verts = {f"z{j}": complex(j, 0) for j in range(n)}
    w = {edge_key(f"z{j}", f"z{j+1}"): weights[j] for j in range(n - 1)}
    return Network(verts, w)


def polygon(positions, weights):
    """N_Pol: a closed polygon through the given positions (cyclic edges)."""
    n = len(positions)
    if n < 3:
        raise NetworkError("polygon needs at least 3 vertices")
    if len(weights) != n:
        raise NetworkError("polygon needs one weight per side")
    verts = {f"z{j}": complex(positions[j]) for j in range(n)}
    w = {}
    for j in range(n):
        w[edge_key(f"z{j}", f"z{(j+1) % n}")] = weights[j]
    return Network(verts, w)


def regular_polygon(n, weights=None):
    """N_RegPol: regular n-gon with side length 1, vertices xi^j/|1-xi|."""
    if n < 3:
        raise NetworkError("regular polygon needs n >= 3")
    xi = cmath.exp(2j * math.pi / n)
    scale = abs(1 - xi)
    pos = [xi ** j / scale for j in range(n)]
    if weights is None:
        weights = [1.0] * n
    return polygon(pos, weights)


def regular_polygon_subdivided(n, k):
    """N_RegPol,k: regular n-gon with side length k, subdivided into unit
    edges (k per side), constant weight 1."""
    if n < 3 or k < 1:
        raise NetworkError("need n >= 3 and k >= 1")
    xi = cmath.exp(2j * math.pi / n)
    scale = abs(1 - xi)
    pos = []
    for j in range(n):
        base = k * xi ** j
        step = xi ** (j + 1) - xi ** j
        for jp in range(k):
            pos.append((base + jp * step) / scale)
    return polygon(pos, [1.0] * (n * k))


def triangle(theta=0.0, weights=(1.0, 1.0, 1.0)):
    """N_Tri rotated by theta: vertices e^{i theta} zeta^j / sqrt(3)."""
    zeta = cmath.exp(2j * math.pi / 3)
    rot = cmath.exp(1j * theta)
    pos = [rot * zeta ** j / math.sqrt(3) for j in range(3)]
    return polygon(pos, list(weights))


def polygon_center(k, flip_signs=False):
    """Regular k-gon (vertices xi^j) plus the origin with spokes.

    Ring weight 1 and spoke weight -2 sin(pi/k); `flip_signs` negates all
    weights (ring -1, spokes +2 sin(pi/k)), which is the variant used by
    the subdivision assemblies. Both are balanced.
    """
    if k < 3:
        raise NetworkError("polygon_center needs k >= 3")
    xi = cmath.exp(2j * math.pi / k)
    sgn = -1.0 if flip_signs else 1.0
    verts = {"c": 0j}
    w = {}
    for j in range(k):
        verts[f"v{j}"] = xi ** j
    for j in range(k):
        w[edge_key(f"v{j}", f"v{(j+1) % k}")] = sgn * 1.0
        w[edge_key("c", f"v{j}")] = sgn * (-2.0 * math.sin(math.pi / k))
    return Network(verts, w)


def n_v(theta):
    """N_V: vertices {0, +-tan(theta), +-i}, 0 < theta < pi/4.

    Spokes a_[0,+-tan] = -2 sin(theta), a_[0,+-i] = -2 cos(theta), ring 1.
    """
    if not 0 < theta < math.pi / 4:
        raise NetworkError("n_v needs 0 < theta < pi/4")
    t = math.tan(theta)
    verts = {"c": 0j, "r": complex(t, 0), "l": complex(-t, 0),
             "t": 1j, "b": -1j}
    w = {}
    for v in ("r", "l"):
        w[edge_key("c", v)] = -2.0 * math.sin(theta)
    for v in ("t", "b"):
        w[edge_key("c", v)] = -2.0 * math.cos(theta)
    for u, v in (("r", "t"), ("t", "l"), ("l", "b"), ("b", "r")):
        w[edge_key(u, v)] = 1.0
    return Network(verts, w)


def n_y(nu, mu):
    """N_Y: vertices {+-mu +- i, +-nu}, 0 < nu < mu.

    With cos(theta) = (mu-nu)/sqrt(1+(mu-nu)^2): center edge 2 cos(theta),
    diagonal spokes 1, short vertical sides -sin(theta), long horizontal
    sides -cos(theta). Balanced by construction.
    """
    if not 0 < nu < mu:
        raise NetworkError("n_y needs 0 < nu < mu")
    d = mu - nu
    h = math.hypot(1.0, d)
    ct, st = d / h, 1.0 / h
    verts = {"pr": complex(nu, 0), "pl": complex(-nu, 0),
             "ne": complex(mu, 1), "se": complex(mu, -1),
             "nw": complex(-mu, 1), "sw": complex(-mu, -1)}
    w = {edge_key("pl", "pr"): 2.0 * ct}
    for u, v in (("pr", "ne"), ("pr", "se"), ("pl", "nw"), ("pl", "sw")):
        w[edge_key(u, v)] = 1.0
    for u, v in (("ne", "se"), ("nw", "sw")):
        w[edge_key(u, v)] = -st
    for u, v in (("nw", "ne"), ("sw", "se")):
        w[edge_key(u, v)] = -ct
    return Network(verts, w)


def n_c(a, b):
    """N_C: center a+ib inside the square {+-1 +- i}, 0 < a < b < 1.

    No symmetry for generic (a, b); balanced for all admissible (a, b).
    """
    if not 0 < a < b < 1:
        raise NetworkError("n_c needs 0 < a < b < 1")
    verts = {"c": complex(a, b), "ne": 1 + 1j, "nw": -1 + 1j,
             "sw": -1 - 1j, "se": 1 - 1j}
    w = {
        edge_key("c", "ne"): -math.hypot(1 / (1 - a), 1 / (1 - b)),
        edge_key("c", "nw"): -math.hypot(1 / (1 + a), 1 / (1 - b)),
        edge_key("c", "sw"): -math.hypot(1 / (1 + a), 1 / (1 + b)),
        edge_key("c", "se"): -math.hypot(1 / (1 - a), 1 / (1 + b)),
        edge_key("nw", "ne"): 1 / (1 - b),
        edge_key("ne", "se"): 1 / (1 - a),
        edge_key("nw", "sw"): 1 / (1 + a),
        edge_key("sw", "se"): 1 / (1 + b),
    }
    return Network(verts, w)


def complete_polygon(k=5):
    """Complete graph on the vertices of a regular k-gon (not embedded for
    k >= 4: diagonals cross)."""
    xi = cmath.exp(2j * math.pi / k)
    scale = abs(1 - xi)
    verts = {f"z{j}": xi ** j / scale for j in range(k)}
    w = {}
    for i in range(k):
        for j in range(i + 1, k):
            w[edge_key(f"z{i}", f"z{j}")] = 1.0
    return Network(verts, w)


_BUILDERS = {
    "N_I": lambda n=4, **kw: chain(int(n), **kw),
    "N_RegPol": lambda n=5, **kw: regular_polygon(int(n), **kw),
    "N_RegPol_k": lambda n=5, k=2: regular_polygon_subdivided(int(n), int(k)),
    "N_Tri": lambda theta=0.0, weights=(1.0, 1.0, 1.0): triangle(theta, weights),
    "polygon_center": lambda k=5, flip_signs=False: polygon_center(int(k), flip_signs),
    "N_V": lambda theta=math.pi / 6: n_v(theta),
    "N_Y": lambda nu=0.3, mu=0.8: n_y(nu, mu),
    "N_C": lambda a=0.3, b=0.5: n_c(a, b),
    "K_poly": lambda k=5: complete_polygon(int(k)),
}


def catalog(name, **params):
    """Look up a catalog network by name with keyword parameters."""
    if name not in _BUILDERS:
        raise NetworkError(f"unknown catalog network {name!r}")
    return _BUILDERS[name](**params)


def catalog_names():
    return sorted(_BUILDERS)

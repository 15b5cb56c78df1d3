"""Sub-network assemblies: verification of the placement conditions
(i)-(vii), edge quantization, the coupled master solve, point-cloud
generation with signs, closest-neighbor bands, and the chain correction
algebra."""

import cmath
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import null_space

from .geometry import Piece, pieces_conflict
from .network import (Network, NetworkError, edge_key, forces,
                      network_from_obj, network_to_obj)
from .solvers import NewtonInfo, SolverError, damped_newton

GEOM_TOL = 1e-9


@dataclass
class SubNetwork:
    net: Network                 # local coordinates, unitary
    anchors: dict                # master neighbor id -> local vertex id

    @property
    def n(self):
        return self.net.n


@dataclass
class Assembly:
    master: Network
    subs: dict                   # master vertex id -> SubNetwork
    signs: dict = field(default_factory=dict)  # p -> {r -> +-1}, optional

    def __post_init__(self):
        for p in self.master.ids:
            if p not in self.subs:
                raise NetworkError(f"missing sub-network at {p!r}")
        for p, sub in self.subs.items():
            if p not in self.master.vertices:
                raise NetworkError(f"sub-network at unknown vertex {p!r}")
            for q, r in sub.anchors.items():
                if edge_key(p, q) not in self.master.weights:
                    raise NetworkError(f"anchor {p!r}->{q!r} without edge")
                if r not in sub.net.vertices:
                    raise NetworkError(f"anchor {p!r}->{q!r} at unknown "
                                       f"vertex {r!r}")
            for q in self.master.neighbors(p):
                if q not in sub.anchors:
                    raise NetworkError(f"edge {p!r}-{q!r} has no anchor "
                                       f"in the sub-network at {p!r}")


def singleton():
    return SubNetwork(Network({"o": 0j}, {}), {})


def singleton_at(master, p):
    sub = singleton()
    sub.anchors = {q: "o" for q in master.neighbors(p)}
    return sub


# --- JSON ---------------------------------------------------------------

def assembly_to_obj(asm):
    subs = {}
    for p, sub in asm.subs.items():
        rec = {"network": network_to_obj(sub.net),
               "anchors": {f"{p}->{q}": r for q, r in sub.anchors.items()}}
        if p in asm.signs:
            rec["signs"] = dict(asm.signs[p])
        subs[p] = rec
    return {"master": network_to_obj(asm.master), "subassembly": subs}


def assembly_from_obj(obj):
    master = network_from_obj(obj["master"])
    subs = {}
    signs = {}
    for p, rec in obj["subassembly"].items():
        anchors = {}
        for key, r in rec["anchors"].items():
            src, _, q = key.partition("->")
            if src != p or not q:
                raise NetworkError(f"bad anchor key {key!r} at {p!r}")
            anchors[q] = r
        subs[p] = SubNetwork(network_from_obj(rec["network"]), anchors)
        if "signs" in rec:
            signs[p] = {r: int(s) for r, s in rec["signs"].items()}
    return Assembly(master, subs, signs)


def save_assembly(asm, path):
    with open(path, "w") as fh:
        json.dump(assembly_to_obj(asm), fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_assembly(path):
    with open(path) as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise NetworkError(f"invalid JSON: {exc}") from exc
    return assembly_from_obj(obj)


# --- conditions (i)-(vii) ------------------------------------------------

@dataclass
class AssemblyReport:
    conditions: dict             # name -> bool
    details: dict                # name -> string
    eta: dict                    # p -> {r -> +-1} (filled when (vii) holds)

    @property
    def ok(self):
        return all(self.conditions.values())

    def failing(self):
        return sorted(k for k, v in self.conditions.items() if not v)


def _rays(asm, p):
    """Anchor rays of the sub at p: (local origin, unit direction, q)."""
    sub = asm.subs[p]
    out = []
    for q, r in sub.anchors.items():
        d = asm.master.vertices[q] - asm.master.vertices[p]
        out.append((sub.net.vertices[r], d / abs(d), q))
    return out


def _check_barycenters(asm):
    worst = 0.0
    for p, sub in asm.subs.items():
        bary = sum(sub.net.vertices.values()) / sub.n
        worst = max(worst, abs(bary))
    return worst <= GEOM_TOL, f"max |barycenter| = {worst:.2e}"


def _check_embedded_with_rays(asm):
    for p, sub in asm.subs.items():
        pieces = []
        for (u, v) in sub.net.edges:
            a, b = sub.net.vertices[u], sub.net.vertices[v]
            d = b - a
            pieces.append(Piece(a, d / abs(d), abs(d)))
        for (o, u, q) in _rays(asm, p):
            pieces.append(Piece(o, u, math.inf))
        for i in range(len(pieces)):
            for j in range(i + 1, len(pieces)):
                if pieces_conflict(pieces[i], pieces[j], GEOM_TOL):
                    return False, f"conflicting pieces in sub at {p!r}"
    return True, ""


def _pull_sum(asm, p, r):
    out = 0j
    for q, rq in asm.subs[p].anchors.items():
        if rq == r:
            d = asm.master.vertices[q] - asm.master.vertices[p]
            out += asm.master.weights[edge_key(p, q)] * d / abs(d)
    return out


def _check_balance(asm, anchored):
    """Force balance at sub vertices; `anchored` selects which half of the
    condition pair is being checked."""
    worst = 0.0
    where = None
    for p, sub in asm.subs.items():
        F = forces(sub.net)
        anchor_set = set(sub.anchors.values())
        for r in sub.net.ids:
            if (r in anchor_set) != anchored:
                continue
            defect = abs(F[r] + (_pull_sum(asm, p, r) if anchored else 0))
            if defect > worst:
                worst, where = defect, (p, r)
    ok = worst <= 1e-9
    return ok, f"max defect {worst:.2e} at {where}" if where else ""


def _check_min_distance(asm):
    """No two sub vertices closer than 1 unless joined by a (unit) edge."""
    for p, sub in asm.subs.items():
        ids = sub.net.ids
        for i in range(len(ids)):
            for j in range(i + 1, len(ids)):
                d = abs(sub.net.vertices[ids[i]] - sub.net.vertices[ids[j]])
                if edge_key(ids[i], ids[j]) in sub.net.weights:
                    if abs(d - 1.0) > 1e-9:
                        return False, f"non-unit edge in sub at {p!r}"
                elif d < 1.0 + GEOM_TOL:
                    return False, (f"vertices {ids[i]!r},{ids[j]!r} of sub "
                                   f"at {p!r} at distance {d:.6f} <= 1")
    return True, ""


def _check_ray_separation(asm):
    """Integer points along anchor rays keep distance > 1 from sub vertices
    and from the integer points of other rays; the search ranges are finite
    because the distance provably exceeds 1 beyond them."""
    for p, sub in asm.subs.items():
        diam = sub.net.diameter()
        rays = _rays(asm, p)
        jmax_v = math.ceil(diam + 2)
        for (o, u, q) in rays:
            for r in sub.net.ids:
                v = sub.net.vertices[r]
                if v == o:
                    continue
                for j in range(1, jmax_v + 1):
                    d = abs(o + j * u - v)
                    if d < 1.0 + GEOM_TOL:
                        return False, (f"sub vertex {r!r} at {p!r} within "
                                       f"{d:.9f} of ray point j={j} "
                                       f"toward {q!r}")
        for i in range(len(rays)):
            for k in range(i + 1, len(rays)):
                o1, u1, q1 = rays[i]
                o2, u2, q2 = rays[k]
                cosg = max(-1.0, min(1.0, (u1 * u2.conjugate()).real))
                half = math.sqrt(max(0.0, (1.0 - cosg) / 2.0))  # sin(g/2)
                if half < 1e-6:
                    # near-parallel rays: min distance over lattice offsets
                    lat = abs((o2 - o1).imag * u1.real
                              - (o2 - o1).real * u1.imag)
                    if lat < 1.0 + GEOM_TOL and abs(o1 - o2) > GEOM_TOL:
                        return False, (f"parallel rays toward {q1!r},{q2!r} "
                                       f"at {p!r} separated by {lat:.6f}")
                    continue
                jmax = math.ceil((diam + 2) / (math.sqrt(2.0) * half)) + 1
                for j in range(1, jmax + 1):
                    for jp in range(1, jmax + 1):
                        d = abs(o1 + j * u1 - o2 - jp * u2)
                        if d < 1.0 + GEOM_TOL:
                            return False, (f"rays toward {q1!r} and {q2!r} "
                                           f"at {p!r}: points j={j}, "
                                           f"j'={jp} at distance {d:.9f}")
    return True, ""


def solve_signs(asm):
    """Sign assignment satisfying the parity constraints, or an odd-cycle
    witness.

    Constraints: eta_r * eta_r' = sign(a) across each sub edge, and the two
    anchors of every master edge carry equal signs. Returns (eta, witness);
    eta is None when inconsistent. Components are normalized so the
    smallest-labelled vertex carries +1; supplied signs are honored when
    consistent."""
    nodes = []
    for p in sorted(asm.subs):
        for r in asm.subs[p].net.ids:
            nodes.append((p, r))
    index = {nd: i for i, nd in enumerate(nodes)}
    parent = list(range(len(nodes)))
    parity = [1] * len(nodes)       # sign relative to parent

    def find(i):
        if parent[i] == i:
            return i, 1
        root, s = find(parent[i])
        parent[i] = root
        parity[i] *= s
        return root, parity[i]

    def union(i, j, s):
        ri, si = find(i)
        rj, sj = find(j)
        if ri == rj:
            return si * sj == s
        parent[rj] = ri
        parity[rj] = si * s * sj
        return True

    for p, sub in asm.subs.items():
        for (u, v) in sub.net.edges:
            s = 1 if sub.net.weights[(u, v)] > 0 else -1
            if not union(index[(p, u)], index[(p, v)], s):
                return None, f"odd cycle through sub edge {u!r}-{v!r} at {p!r}"
    for (p, q) in asm.master.edges:
        i = index[(p, asm.subs[p].anchors[q])]
        j = index[(q, asm.subs[q].anchors[p])]
        if not union(i, j, 1):
            return None, f"odd cycle through master edge {p!r}-{q!r}"
    eta = {}
    pinned = {}
    for p in sorted(asm.signs):
        for r, s in asm.signs[p].items():
            root, rel = find(index[(p, r)])
            if root in pinned and pinned[root] != s * rel:
                return None, f"supplied signs inconsistent at ({p!r},{r!r})"
            pinned[root] = s * rel
    for i, (p, r) in enumerate(nodes):
        root, rel = find(i)
        eta.setdefault(p, {})[r] = pinned.get(root, 1) * rel
    return eta, ""


def verify_assembly(asm):
    conditions = {}
    details = {}
    checks = [
        ("i_barycenter", lambda: _check_barycenters(asm)),
        ("ii_embedded_rays", lambda: _check_embedded_with_rays(asm)),
        ("iii_interior_balance", lambda: _check_balance(asm, False)),
        ("iv_anchor_balance", lambda: _check_balance(asm, True)),
        ("v_min_distance", lambda: _check_min_distance(asm)),
        ("vi_ray_separation", lambda: _check_ray_separation(asm)),
    ]
    for name, fn in checks:
        ok, msg = fn()
        conditions[name] = ok
        details[name] = msg
    eta, witness = solve_signs(asm)
    conditions["vii_sign_compatibility"] = eta is not None
    details["vii_sign_compatibility"] = witness
    return AssemblyReport(conditions, details, eta or {})


# --- quantization ---------------------------------------------------------

def quantize(asm, kappa, ell, table):
    """Per master edge, the integer m with 2m the smallest even integer at
    or above kappa |q-p| / (1 - alpha_ell(a))."""
    out = {}
    for (p, q) in asm.master.edges:
        r = abs(asm.master.vertices[q] - asm.master.vertices[p])
        a = asm.master.weights[(p, q)]
        x = kappa * r / (1.0 - table.alpha_ell(a, ell))
        out[(p, q)] = max(1, math.ceil(x / 2.0))
    return out


def _estimate_weights(asm, f_total):
    """First-order master weights realizing the vertex forces f_total
    (modulo a shift e and rotation rate t) at the unmoved positions.
    Used to quantize against the weights the solve will actually find."""
    from .linearize import build_differentials
    master = asm.master
    sysm = build_differentials(master)
    n, m = master.n, master.m
    M = np.zeros((2 * n, m + 3))
    M[:, :m] = sysm.df_a
    rhs = np.zeros(2 * n)
    for i, v in enumerate(master.ids):
        M[2 * i, m] = 1.0
        M[2 * i + 1, m + 1] = 1.0
        z = master.vertices[v]
        M[2 * i, m + 2] = -z.imag
        M[2 * i + 1, m + 2] = z.real
        g = f_total.get(v, 0j)
        rhs[2 * i] = g.real
        rhs[2 * i + 1] = g.imag
    sol, *_ = np.linalg.lstsq(M, rhs, rcond=None)
    return {e: master.weights[e] + sol[k]
            for k, e in enumerate(master.edges)}


def coordinate_quantization(asm, kappa, ell, table, mu_max=2.5,
                            weights=None):
    """Chain counts chosen jointly with a global dilation factor mu.

    The rounded-up per-edge counts can be geometrically frustrated: the
    anchor gaps must close around master cycles once the sub-network
    anchor offsets are subtracted, and independent rounding can demand
    anchor offsets the sub-networks cannot provide. This picks the
    dilation mu (realized later by the solver's dilation unknown) whose
    nearest-integer counts minimize the worst per-edge defect between the
    quantized target 2m(1-alpha) and the dilated gap kappa*mu*|q-p| plus
    the anchor allowance read off the sub-network geometry. `weights`
    overrides the master weights the length corrections are taken at."""
    master = asm.master
    if weights is None:
        weights = master.weights
    rows = []
    for ek in master.edges:
        p, q = ek
        d = master.vertices[q] - master.vertices[p]
        r = abs(d)
        u = d / r
        rp = asm.subs[p].net.vertices[asm.subs[p].anchors[q]]
        rq = asm.subs[q].net.vertices[asm.subs[q].anchors[p]]
        allowance = ((rq - rp) * u.conjugate()).real
        alpha = table.alpha_ell(weights[ek], ell)
        rows.append((ek, r, allowance, 1.0 - alpha))
    best = None
    for mu in np.linspace(1.0, mu_max, 3001):
        defect = 0.0
        mm = {}
        for ek, r, allowance, one_m_alpha in rows:
            g = mu * kappa * r + allowance
            m = max(1, round(g / (2.0 * one_m_alpha)))
            mm[ek] = m
            defect = max(defect, abs(2 * m * one_m_alpha - g))
        if best is None or defect < best[0] - 1e-12:
            best = (defect, mu, mm)
    return best[2], best[1]


# --- master solve ----------------------------------------------------------

@dataclass
class MasterSolveResult:
    assembly: Assembly
    kappa: float
    ell: float
    m_map: dict
    master_positions: dict
    master_weights: dict
    sub_positions: dict          # p -> {r -> complex}
    sub_weights: dict            # p -> {edge -> float}
    e: complex
    t: float
    residuals: dict              # condition letter -> max residual
    info: NewtonInfo
    f: dict                      # (p, r) -> complex


def _pack_layout(asm):
    """Index layout of the sub-network unknowns (positions then weights,
    per master vertex in canonical order)."""
    layout = []
    off = 0
    for p in asm.master.ids:
        sub = asm.subs[p]
        layout.append((p, off, sub.net.n, sub.net.m))
        off += 2 * sub.net.n + sub.net.m
    return layout, off


def solve_master(asm, kappa, ell, table, f=None, tol=1e-11, skip_verify=False,
                 m_map=None):
    """Positions and weights (master and sub-networks) realizing the
    quantized lengths and the anchored force balance, with the dilation
    directions of the weight and position blocks carried as explicit
    unknowns. Chain counts default to the coordinated quantization, which
    keeps the targets consistent around master cycles at finite kappa."""
    if not skip_verify:
        report = verify_assembly(asm)
        if not report.ok:
            raise SolverError(f"assembly conditions fail: {report.failing()}")
    master = asm.master
    n, m = master.n, master.m
    ids = master.ids
    edges = master.edges
    mu0 = 1.0
    if m_map is None:
        w_est = None
        if f and any(abs(complex(v)) for v in f.values()):
            f_total = {}
            for (p, _r), val in f.items():
                f_total[p] = f_total.get(p, 0j) + complex(val)
            w_est = _estimate_weights(asm, f_total)
        m_map, mu0 = coordinate_quantization(asm, kappa, ell, table,
                                             weights=w_est)
    fv = {}
    for p in ids:
        for r in asm.subs[p].net.ids:
            fv[(p, r)] = complex(f.get((p, r), 0)) if f else 0j

    pvec = np.array([c for v in ids for c in (master.vertices[v].real,
                                              master.vertices[v].imag)])
    avec = np.array([master.weights[e] for e in edges])
    Qp = null_space(pvec[None, :])
    Qa = null_space(avec[None, :])
    layout, sub_len = _pack_layout(asm)
    nm = 2 * n + m               # reparametrized master block size
    N = nm + 3 + sub_len

    sub_ref = []
    for p, off, np_, mp in layout:
        sub = asm.subs[p]
        pos0 = np.array([c for r in sub.net.ids
                         for c in (sub.net.vertices[r].real,
                                   sub.net.vertices[r].imag)])
        w0 = np.array([sub.net.weights[e] for e in sub.net.edges])
        sub_ref.append((pos0, w0))

    def unpack(x):
        phi_perp = x[:2 * n - 1]
        w_perp = x[2 * n - 1:nm - 2]
        cdot, ddot = x[nm - 2], x[nm - 1]
        pv = pvec + Qp @ phi_perp + (ddot - (2 * ell - 1) * cdot / 2) * pvec
        av = avec + Qa @ w_perp - cdot * ell ** 2 * avec
        phi = {v: complex(pv[2 * i], pv[2 * i + 1])
               for i, v in enumerate(ids)}
        aw = {e: av[k] for k, e in enumerate(edges)}
        e_vec = complex(x[nm], x[nm + 1])
        t = x[nm + 2]
        spos = {}
        sw = {}
        for (p, off, np_, mp), (pos0, w0) in zip(layout, sub_ref):
            seg = x[nm + 3 + off:nm + 3 + off + 2 * np_ + mp]
            sub = asm.subs[p]
            spos[p] = {r: complex(seg[2 * i], seg[2 * i + 1])
                       for i, r in enumerate(sub.net.ids)}
            sw[p] = {e: seg[2 * np_ + k]
                     for k, e in enumerate(sub.net.edges)}
        return phi, aw, e_vec, t, spos, sw

    def residual_groups(phi, aw, e_vec, t, spos, sw):
        ra, rb, rcd, re_, rf = [], [], [], [], []
        # (a) sub edge lengths
        for p in ids:
            sub = asm.subs[p]
            for ek in sub.net.edges:
                u, v = ek
                L = abs(spos[p][v] - spos[p][u])
                ra.append(L - (1.0 - table.alpha_ell(sw[p][ek], ell)))
        # anchor points in master-local coordinates
        anchor_pt = {}
        for p in ids:
            for q, r in asm.subs[p].anchors.items():
                anchor_pt[(p, q)] = kappa * phi[p] + spos[p][r]
        # (b) quantized lengths of master edges
        for ek in edges:
            p, q = ek
            gap = anchor_pt[(q, p)] - anchor_pt[(p, q)]
            rb.append(abs(gap) - 2 * m_map[ek]
                      * (1.0 - table.alpha_ell(aw[ek], ell)))
        # (c)/(d) force balance at every sub vertex
        for p in ids:
            sub = asm.subs[p]
            F = {r: 0j for r in sub.net.ids}
            for ek in sub.net.edges:
                u, v = ek
                d = spos[p][v] - spos[p][u]
                F[u] += sw[p][ek] * d / abs(d)
                F[v] -= sw[p][ek] * d / abs(d)
            for q, r in sub.anchors.items():
                gap = anchor_pt[(q, p)] - anchor_pt[(p, q)]
                F[r] += aw[edge_key(p, q)] * gap / abs(gap)
            np_ = sub.net.n
            porig = master.vertices[p]
            for r in sub.net.ids:
                g = F[r] - fv[(p, r)] - (e_vec + 1j * t * porig) / np_
                rcd.extend((g.real, g.imag))
        # (e) sub barycenters
        for p in ids:
            bary = sum(spos[p].values())
            re_.extend((bary.real, bary.imag))
        # (f) master translation and rotation gauges
        tr = sum(phi[v] - master.vertices[v] for v in ids)
        rot = sum((master.vertices[v].conjugate()
                   * (phi[v] - master.vertices[v])).imag for v in ids)
        rf.extend((tr.real, tr.imag, rot))
        return ra, rb, rcd, re_, rf

    def fun(x):
        phi, aw, e_vec, t, spos, sw = unpack(x)
        ra, rb, rcd, re_, rf = residual_groups(phi, aw, e_vec, t, spos, sw)
        rb_scaled = [v / kappa for v in rb]
        return np.array(ra + rb_scaled + rcd + re_ + rf)

    x0 = np.zeros(N)
    x0[nm - 1] = mu0 - 1.0       # seed the dilation at the quantized scale
    for (p, off, np_, mp), (pos0, w0) in zip(layout, sub_ref):
        x0[nm + 3 + off:nm + 3 + off + 2 * np_] = pos0
        x0[nm + 3 + off + 2 * np_:nm + 3 + off + 2 * np_ + mp] = w0
    x, info = damped_newton(fun, x0, tol=tol, scale=1.0, maxiter=200,
                            max_step=0.25)
    if not info.converged:
        raise SolverError(f"master solve stalled: residual "
                          f"{info.residual:.3e} at equation "
                          f"{info.worst_equation}")
    phi, aw, e_vec, t, spos, sw = unpack(x)
    ra, rb, rcd, re_, rf = residual_groups(phi, aw, e_vec, t, spos, sw)
    res = {"a": max(map(abs, ra), default=0.0),
           "b": max(map(abs, rb), default=0.0),
           "cd": max(map(abs, rcd), default=0.0),
           "e": max(map(abs, re_), default=0.0),
           "f": max(map(abs, rf), default=0.0)}
    return MasterSolveResult(asm, kappa, ell, m_map, phi, aw, spos, sw,
                             e_vec, t, res, info, fv)


# --- point cloud -----------------------------------------------------------

@dataclass
class CloudPoint:
    z: complex
    sign: int
    provenance: str


@dataclass
class Configuration:
    points: list
    ell: float
    kappa: float = 0.0
    m_map: dict = field(default_factory=dict)
    lambda_master: dict = field(default_factory=dict)
    lambda_sub: dict = field(default_factory=dict)
    expected_degree: dict = field(default_factory=dict)  # index -> int

    def positions(self):
        return np.array([pt.z for pt in self.points])

    def signs(self):
        return np.array([pt.sign for pt in self.points])


def generate_cloud(result, table, eta=None):
    asm = result.assembly
    ell, kappa = result.ell, result.kappa
    if eta is None:
        eta, witness = solve_signs(asm)
        if eta is None:
            raise SolverError(f"sign conditions unsatisfiable: {witness}")
    points = []
    expected = {}
    for p in asm.master.ids:
        sub = asm.subs[p]
        anchored = {}
        for q, r in sub.anchors.items():
            anchored[r] = anchored.get(r, 0) + 1
        for r in sub.net.ids:
            z = ell * (kappa * result.master_positions[p]
                       + result.sub_positions[p][r])
            kind = "anchor" if r in anchored else "internal"
            expected[len(points)] = (len(sub.net.neighbors(r))
                                     + anchored.get(r, 0))
            points.append(CloudPoint(z, eta[p][r], f"{kind}:{p}:{r}"))
    lam_master = {}
    lam_sub = {}
    for p in asm.master.ids:
        for ek, w in result.sub_weights[p].items():
            lam_sub[(p, ek)] = ell * table.alpha_ell(w, ell)
    for ek in asm.master.edges:
        p, q = ek
        aw = result.master_weights[ek]
        lam = ell * table.alpha_ell(aw, ell)
        lam_master[ek] = lam
        ap = ell * (kappa * result.master_positions[p]
                    + result.sub_positions[p][asm.subs[p].anchors[q]])
        aq = ell * (kappa * result.master_positions[q]
                    + result.sub_positions[q][asm.subs[q].anchors[p]])
        e_pq = (aq - ap) / abs(aq - ap)
        eta0 = eta[p][asm.subs[p].anchors[q]]
        mm = result.m_map[ek]
        for j in range(1, 2 * mm):
            z = ap + j * (ell - lam) * e_pq
            sign = eta0 * ((-1) ** j if aw < 0 else 1)
            expected[len(points)] = 2
            points.append(CloudPoint(z, sign, f"chain:{p}:{q}:{j}"))
    return Configuration(points, ell, kappa, dict(result.m_map),
                         lam_master, lam_sub, expected)


def save_cloud(config, path):
    with open(path, "w") as fh:
        fh.write("x,y,sign,provenance\n")
        for pt in config.points:
            fh.write(f"{pt.z.real:.17g},{pt.z.imag:.17g},"
                     f"{pt.sign:d},{pt.provenance}\n")


def load_cloud(path, ell):
    points = []
    with open(path) as fh:
        header = fh.readline().strip()
        if header != "x,y,sign,provenance":
            raise NetworkError(f"unexpected cloud header {header!r}")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            x, y, s, prov = line.split(",", 3)
            points.append(CloudPoint(complex(float(x), float(y)),
                                     int(s), prov))
    return Configuration(points, ell)


# --- closest neighbors ------------------------------------------------------

@dataclass
class NeighborReport:
    neighbors: list              # index -> sorted list of near indices
    violations: list             # (i, j, distance) outside both bands
    degree_mismatches: list      # (i, expected, got)

    @property
    def ok(self):
        return not self.violations and not self.degree_mismatches


def neighbor_graph(config, C=None, delta=0.05):
    """Classify all pairwise distances into the near band |d - ell| <= C or
    the far band d >= (1+delta) ell; anything in between is a violation.
    Near-neighbor counts are checked against the generation-time expected
    degrees when the configuration carries them.

    The default band width adapts to the configuration: intended neighbor
    distances are ell - lambda_e per edge, so C is the largest recorded
    length correction plus a margin (0.5 when no corrections are known)."""
    if C is None:
        lams = [abs(l) for l in list(config.lambda_master.values())
                + list(config.lambda_sub.values())]
        C = max(lams) + 0.1 if lams else 0.5
    z = config.positions()
    npts = len(z)
    ell = config.ell
    neighbors = [[] for _ in range(npts)]
    violations = []
    for i in range(npts):
        d = np.abs(z[i + 1:] - z[i])
        near = np.abs(d - ell) <= C
        bad = ~near & (d < (1.0 + delta) * ell)
        for k in np.nonzero(near)[0]:
            neighbors[i].append(i + 1 + int(k))
            neighbors[i + 1 + int(k)].append(i)
        for k in np.nonzero(bad)[0]:
            violations.append((i, i + 1 + int(k), float(d[k])))
    mismatches = []
    for i, expect in (config.expected_degree or {}).items():
        got = len(neighbors[i])
        if got != expect:
            mismatches.append((i, expect, got))
    return NeighborReport([sorted(nb) for nb in neighbors],
                          violations, mismatches)


# --- chain correction --------------------------------------------------------

def chain_matrix(m):
    T = np.zeros((m, m))
    for i in range(m):
        T[i, i] = 2.0
        if i:
            T[i, i - 1] = T[i - 1, i] = -1.0
    return T


def chain_matrix_inverse(m):
    """Closed-form inverse of the (2, -1) tridiagonal matrix:
    (T^-1)_ij = min(i, j) - i j/(m+1) with 1-based indices."""
    if m < 1:
        raise ValueError("chain size must be >= 1")
    i = np.arange(1, m + 1)
    return np.minimum.outer(i, i) - np.outer(i, i) / (m + 1)


def chain_correct(residuals, e_pq, spacing, table):
    """First-order chain offsets from interior residual forces.

    The longitudinal response divides by Upsilon'(spacing) and the
    transverse one by Upsilon(spacing)/spacing; boundary offsets are
    implicitly zero."""
    g = np.asarray(residuals, dtype=complex)
    mlen = len(g)
    if mlen == 0:
        return np.zeros(0, dtype=complex)
    Tinv = chain_matrix_inverse(mlen)
    ec = complex(e_pq)
    gl = (g * ec.conjugate()).real
    gt = (g * ec.conjugate()).imag
    up = float(table.upsilon_prime(spacing))
    u = float(table.upsilon(spacing))
    along = Tinv @ (gl / up)
    trans = Tinv @ (gt * spacing / u)
    return along * ec + trans * (1j * ec)


def diagnostic_chain_cloud(table, ell, m, a=1.0, eta0=1):
    """Two anchors plus 2m-1 chain points on the x-axis: the two-vertex
    master diagnostic (bypasses the master solve)."""
    lam = ell * table.alpha_ell(a, ell)
    points = []
    expected = {}
    total = 2 * m
    for j in range(total + 1):
        z = complex(j * (ell - lam), 0.0)
        sign = eta0 * ((-1) ** j if a < 0 else 1)
        if j in (0, total):
            prov = f"anchor:{'p' if j == 0 else 'q'}:o"
            expected[len(points)] = 1
        else:
            prov = f"chain:p:q:{j}"
            expected[len(points)] = 2
        points.append(CloudPoint(z, sign, prov))
    return Configuration(points, ell, 0.0, {("p", "q"): m},
                         {("p", "q"): lam}, {}, expected)

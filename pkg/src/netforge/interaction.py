"""Radial ground state of Delta u - u + f(u) = 0 and the derived
pair-interaction quantities.

The profile is computed by shooting and bisection; beyond r_switch the
stored profile is the matched Bessel tail A*K0(r), which avoids the
exponentially growing contamination of direct integration. All consumers
go through an InteractionTable, which can be cached on disk.
"""

import hashlib
import math
import os
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq
from scipy.special import k0, k1


@dataclass(frozen=True)
class Nonlinearity:
    p: float = 3.0
    c: float = 0.0
    q: float = 5.0

    def f(self, u):
        out = np.abs(u) ** (self.p - 1) * u
        if self.c:
            out = out - self.c * np.abs(u) ** (self.q - 1) * u
        return out

    def fprime(self, u):
        out = self.p * np.abs(u) ** (self.p - 1)
        if self.c:
            out = out - self.c * self.q * np.abs(u) ** (self.q - 1)
        return out

    @property
    def key(self):
        return f"p{self.p:g}_c{self.c:g}_q{self.q:g}"


CUBIC = Nonlinearity()

R_MAX = 50.0
DR = 0.005
R_SWITCH = 12.0
QUAD_EXTENT = 18.0
QUAD_N = 361
S_MIN, S_MAX, S_STEP = 2.0, 110.0, 0.5


def _rhs(nl):
    def rhs(r, y):
        u, v = y
        return (v, -v / r + u - nl.f(u))
    return rhs


def _shoot(nl, beta, r_end, rtol=1e-13, dense=False):
    """Integrate from a series start near r = 0; terminate at the first
    zero crossing of u (downward) or of u' (upward, u still positive)."""
    r0 = 1e-3
    c2 = (beta - nl.f(beta)) / 4.0
    y0 = (beta + c2 * r0 * r0, 2.0 * c2 * r0)

    def hit_zero(r, y):
        return y[0]
    hit_zero.terminal = True
    hit_zero.direction = -1

    def turn_up(r, y):
        return y[1]
    turn_up.terminal = True
    turn_up.direction = 1

    sol = solve_ivp(_rhs(nl), (r0, r_end), y0, method="DOP853",
                    rtol=rtol, atol=1e-16, events=(hit_zero, turn_up),
                    dense_output=dense)
    return sol


def ground_state_beta(nl=CUBIC, bracket=(1.5, 3.0), iters=62):
    """Central value u(0) of the positive radial ground state, by bisection
    on the shooting parameter."""
    lo, hi = bracket

    def classify(beta):
        sol = _shoot(nl, beta, 30.0, rtol=1e-10)
        if sol.t_events[0].size:      # crossed zero: beta too big
            return 1
        if sol.t_events[1].size:      # turned back up: beta too small
            return -1
        return 1 if sol.y[0, -1] < 0 else -1

    if classify(lo) != -1 or classify(hi) != 1:
        raise ValueError("bracket does not straddle the ground state")
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if classify(mid) > 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def _profile_grid(nl, beta):
    """(r, u0, du0, A): grid profile with the K0 tail glued at R_SWITCH."""
    r = np.arange(0.0, R_MAX + DR / 2, DR)
    sol = _shoot(nl, beta, R_SWITCH + 0.5, rtol=1e-13, dense=True)
    if sol.t[-1] < R_SWITCH:
        raise RuntimeError("profile terminated before the matching radius")
    u = np.empty_like(r)
    du = np.empty_like(r)
    inner = (r > 1e-3) & (r <= R_SWITCH)
    vals = sol.sol(r[inner])
    u[inner] = vals[0]
    du[inner] = vals[1]
    c2 = (beta - nl.f(beta)) / 4.0
    small = r <= 1e-3
    u[small] = beta + c2 * r[small] ** 2
    du[small] = 2.0 * c2 * r[small]
    # tail amplitude by averaging u/K0 over the last unit before the switch
    fit = (r >= R_SWITCH - 2.0) & (r <= R_SWITCH)
    A = float(np.mean(u[fit] / k0(r[fit])))
    outer = r > R_SWITCH
    u[outer] = A * k0(r[outer])
    du[outer] = -A * k1(r[outer])
    return r, u, du, A


def _simpson_weights(n, h):
    if n % 2 == 0:
        raise ValueError("simpson needs an odd point count")
    w = np.ones(n)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * (h / 3.0)


class InteractionTable:
    """Ground-state profile plus the pair interaction Upsilon on a log
    spline, with the alpha_ell inverse and the normalization constant."""

    def __init__(self, nl, beta, r, u0, du0, A, s, ln_ups):
        self.nl = nl
        self.beta = float(beta)
        self.r = np.asarray(r, dtype=float)
        self.u0 = np.asarray(u0, dtype=float)
        self.du0 = np.asarray(du0, dtype=float)
        self.A = float(A)
        self.s = np.asarray(s, dtype=float)
        self.ln_ups = np.asarray(ln_ups, dtype=float)
        self._u_spline = CubicSpline(self.r, self.u0)
        self._du_spline = CubicSpline(self.r, self.du0)
        self._ls = CubicSpline(self.s, self.ln_ups)
        self._lsd = self._ls.derivative()
        if np.any(np.diff(self.ln_ups) >= 0):
            raise RuntimeError("interaction strength is not decreasing")

    # --- profile -------------------------------------------------------

    def u0_at(self, r):
        r = np.asarray(r, dtype=float)
        out = np.where(r <= self.r[-1],
                       self._u_spline(np.minimum(r, self.r[-1])),
                       self.A * k0(np.maximum(r, 1.0)))
        return out if out.ndim else float(out)

    def du0_at(self, r):
        r = np.asarray(r, dtype=float)
        out = np.where(r <= self.r[-1],
                       self._du_spline(np.minimum(r, self.r[-1])),
                       -self.A * k1(np.maximum(r, 1.0)))
        return out if out.ndim else float(out)

    def tail_constant(self):
        """ln u0 + r + (1/2) ln r averaged over r in [20, 25]."""
        sel = (self.r >= 20.0) & (self.r <= 25.0)
        rr = self.r[sel]
        return float(np.mean(np.log(self.u0[sel]) + rr + 0.5 * np.log(rr)))

    def c_star(self):
        """1 / (pi * integral of u0'^2 r dr)."""
        from scipy.integrate import simpson
        val = simpson(self.du0 ** 2 * self.r, x=self.r)
        return 1.0 / (math.pi * val)

    # --- interaction ---------------------------------------------------

    def upsilon(self, s):
        return np.exp(self._ls(s))

    def upsilon_prime(self, s):
        return np.exp(self._ls(s)) * self._lsd(s)

    def alpha_ell(self, a, ell):
        """alpha with |a| * Upsilon(ell) = Upsilon(ell (1 - alpha))."""
        target = math.log(abs(a)) + float(self._ls(ell))
        lo, hi = self.s[0], self.s[-1]
        if not self.ln_ups[-1] <= target <= self.ln_ups[0]:
            raise ValueError(f"alpha_ell target out of tabulated range "
                             f"(a={a}, ell={ell})")
        t = brentq(lambda x: float(self._ls(x)) - target, lo, hi,
                   xtol=1e-13, rtol=8.9e-16)
        return 1.0 - t / ell

    def dalpha_da(self, a, ell):
        t = ell * (1.0 - self.alpha_ell(a, ell))
        return -math.copysign(1.0, a) * float(self.upsilon(ell)) / (
            ell * float(self.upsilon_prime(t)))

    # --- persistence ----------------------------------------------------

    def save(self, path):
        np.savez(path, p=self.nl.p, c=self.nl.c, q=self.nl.q,
                 beta=self.beta, r=self.r, u0=self.u0, du0=self.du0,
                 A=self.A, s=self.s, ln_ups=self.ln_ups)

    @classmethod
    def load(cls, path):
        with np.load(path) as d:
            nl = Nonlinearity(float(d["p"]), float(d["c"]), float(d["q"]))
            return cls(nl, float(d["beta"]), d["r"], d["u0"], d["du0"],
                       float(d["A"]), d["s"], d["ln_ups"])


def _interaction_kernel(table, e, n, extent):
    """Grid X, Y and the premultiplied source kernel G * weights, where
    G = f'(u0) u0' <e, z>/|z|."""
    ax = np.linspace(-extent, extent, n)
    h = ax[1] - ax[0]
    X, Y = np.meshgrid(ax, ax, indexing="ij")
    R = np.hypot(X, Y)
    proj = np.zeros_like(R)
    nz = R > 0
    proj[nz] = (e[0] * X[nz] + e[1] * Y[nz]) / R[nz]
    G = table.nl.fprime(table.u0_at(R)) * table.du0_at(R) * proj
    w = _simpson_weights(n, h)
    return X, Y, G * np.outer(w, w)


def upsilon_direct(table, s, e=(1.0, 0.0), n=QUAD_N, extent=QUAD_EXTENT):
    """Direct quadrature of -integral u0(|z - s e|) G(z) dz, for isotropy
    and grid-refinement checks."""
    X, Y, GW = _interaction_kernel(table, e, n, extent)
    shifted = table.u0_at(np.hypot(X - s * e[0], Y - s * e[1]))
    return -float(np.sum(shifted * GW))


def build_table(nl=CUBIC, bracket=(1.5, 3.0)):
    beta = ground_state_beta(nl, bracket)
    r, u0, du0, A = _profile_grid(nl, beta)
    partial = InteractionTable.__new__(InteractionTable)
    partial.nl = nl
    partial.A = A
    partial.r = r
    partial._u_spline = CubicSpline(r, u0)
    partial._du_spline = CubicSpline(r, du0)
    partial.u0_at = InteractionTable.u0_at.__get__(partial)
    partial.du0_at = InteractionTable.du0_at.__get__(partial)
    X, Y, GW = _interaction_kernel(partial, (1.0, 0.0), QUAD_N, QUAD_EXTENT)
    s = np.arange(S_MIN, S_MAX + S_STEP / 2, S_STEP)
    vals = np.empty(len(s))
    for i, si in enumerate(s):
        vals[i] = -np.sum(partial.u0_at(np.hypot(X - si, Y)) * GW)
    if np.any(vals <= 0):
        raise RuntimeError("nonpositive interaction values")
    return InteractionTable(nl, beta, r, u0, du0, A, s, np.log(vals))


def cache_dir():
    return os.environ.get("NETFORGE_CACHE", os.path.join(
        os.path.expanduser("~"), ".cache", "netforge"))


def table_cache_path(nl=CUBIC, directory=None):
    tag = f"{nl.key}_rmax{R_MAX:g}_dr{DR:g}_rs{R_SWITCH:g}" \
          f"_q{QUAD_N}x{QUAD_EXTENT:g}_s{S_MIN:g}-{S_MAX:g}-{S_STEP:g}"
    digest = hashlib.sha256(tag.encode()).hexdigest()[:12]
    d = directory or cache_dir()
    return os.path.join(d, f"interaction_{nl.key}_{digest}.npz")


def load_or_build(nl=CUBIC, directory=None):
    path = table_cache_path(nl, directory)
    if os.path.exists(path):
        return InteractionTable.load(path)
    table = build_table(nl)
    os.makedirs(os.path.dirname(path), exist_ok=True)
    table.save(path)
    return table


# module-level conveniences used by the perturbation solvers

def alpha_ell(table, a, ell):
    return table.alpha_ell(a, ell)


def dalpha_da(table, a, ell):
    return table.dalpha_da(a, ell)

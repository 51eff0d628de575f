"""Scalar solution profiles phi(t) for the five cone families.

Each family's profile is built from its parametric curve:

* orthant: phi(t) = -log t on (0, inf);
* two-sided power cone with alpha = 1 (c = 0): the symmetric closed-form
  curve in the parameter zeta, t in (-1, 1);
* two-sided power cone with alpha < 1 (-2n < c < 0): the elliptic-integral
  branch; log t is the integral of G over the curve parameter zeta, with the
  simple pole of G at zeta = -sqrt(1 - xi1) absorbed by the substitution
  u = -s +- e^w, under which the integrand becomes rho = (u+s) G(u) -> 1;
* one-sided power cone (c = -2n, beta = 1): closed-form curve in xi > 0;
* half-space-bounded family (c = -2n, beta = inf): closed-form curve on
  (-1, inf), composed with t -> -t to land on the chart domain (-inf, 1);
* exponential cone: delegates to :mod:`affinespheres.expcone`.

All profiles expose value/derivative/second derivative at any interior t;
inversion t -> parameter uses cached monotone tables plus local polishing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from . import expcone, kernels
from .cones import ConeSpec, PowerParams
from .errors import ConvergenceError, DomainError, QuadratureFailure
from .potentials import PhiJet, PotentialJet, phi_ddot_from_ode, potential_jet

__all__ = [
    "BranchData",
    "cubic_roots",
    "c0_curve",
    "alpha_of_c",
    "c_of_alpha",
    "elliptic_curve",
    "extreme_curve_beta1",
    "extreme_curve_betainf",
    "phi_solution",
    "PhiSolution",
    "CanonicalPotential",
]

_WMIN = -45.0
_ZFAR = 1e8


# ---------------------------------------------------------------------------
# cubic root structure
# ---------------------------------------------------------------------------


def cubic_roots(params: PowerParams, c: float) -> tuple[float, float, float]:
    """Ordered real roots (xi1 >= xi2 >= xi3) of c^2 + 4n P(xi).

    The monic form is xi^3 + (n-1) xi^2 + (c^2/(4n) - n).  The smallest root
    is polished by Newton and the other two come from the deflated quadratic,
    which stays well conditioned near the double root at c = -2n.
    """
    n = params.n
    if abs(c) > 2.0 * n:
        raise DomainError(f"|c| = {abs(c)} exceeds 2(p+q) = {2 * n}")
    if c == 0.0:
        return 1.0, -params.q, -params.p
    m = n - 1.0
    d0 = c * c / (4.0 * n) - n

    def cubic(x):
        return (x * x + m * x) * x + d0

    def dcubic(x):
        return 3.0 * x * x + 2.0 * m * x

    _, r0, r1, r2, _, _ = kernels.cubic_roots_monic(m, 0.0, d0)
    xi3 = r2
    for _ in range(3):
        d = dcubic(xi3)
        if d == 0.0:
            break
        xi3 -= cubic(xi3) / d
    b2 = m + xi3
    c2 = -d0 / xi3
    disc = b2 * b2 - 4.0 * c2
    if disc < 0.0:
        disc = 0.0
    root = math.sqrt(disc)
    if b2 >= 0.0:
        lo = (-b2 - root) / 2.0
        hi = c2 / lo if lo != 0.0 else 0.0
    else:
        hi = (-b2 + root) / 2.0
        lo = c2 / hi if hi != 0.0 else 0.0
    xi1, xi2 = max(hi, lo), min(hi, lo)
    return float(xi1), float(xi2), float(xi3)


@dataclass(frozen=True)
class BranchData:
    """Constants of one solution branch (power families)."""

    params: PowerParams
    c: float
    xi1: float
    xi2: float
    xi3: float
    alpha: float
    beta: float
    t_star: float
    sigma_schedule: tuple[int, ...]
    reflected: bool = False

    @property
    def effective_c(self) -> float:
        """First-integral constant of the profile as evaluated (t -> -t flips c)."""
        return -self.c if self.reflected else self.c


# ---------------------------------------------------------------------------
# closed-form curves
# ---------------------------------------------------------------------------


def c0_curve(params: PowerParams, zeta: float) -> tuple[float, float]:
    """Symmetric solution curve (c = 0): zeta in R, t in (-1, 1)."""
    p, q = params.p, params.q
    z2 = zeta * zeta
    t = zeta * (z2 + p + 1.0) ** (-0.5 / p) * (z2 + q + 1.0) ** (-0.5 / q)
    phi = (
        -0.5 * math.log(params.n)
        + (p + 1.0) / (2.0 * p) * math.log(z2 + p + 1.0)
        + (q + 1.0) / (2.0 * q) * math.log(z2 + q + 1.0)
    )
    return float(t), float(phi)


def extreme_curve_beta1(params: PowerParams, xi: float) -> tuple[float, float]:
    """Closed-form curve for c = -2n on the bounded domain, xi > 0 -> t in (0,1)."""
    if not xi > 0.0:
        raise DomainError(f"xi must be positive, got {xi}")
    logt = kernels.beta1_logt_of_xi(params.p, params.q, xi)
    phi = kernels.beta1_phi_of_xi(params.p, params.q, xi)
    return math.exp(logt), phi


def extreme_curve_betainf(params: PowerParams, xi: float) -> tuple[float, float]:
    """Closed-form curve for c = -2n on (-1, inf); xi = 1 is the point t = 0."""
    if not xi > 0.0:
        raise DomainError(f"xi must be positive, got {xi}")
    g = math.exp(kernels.binf_logg_of_xi(params.p, params.q, xi))
    phi = kernels.binf_phi_of_xi(params.p, params.q, xi)
    return (1.0 - xi) * g, phi


# ---------------------------------------------------------------------------
# elliptic branch: offset constant and cached time-map tables
# ---------------------------------------------------------------------------


def _ell_pars(params: PowerParams, c: float) -> np.ndarray:
    xi1, xi2, xi3 = cubic_roots(params, c)
    s = math.sqrt(max(1.0 - xi1, 0.0))
    return np.array([params.p, params.q, c, xi1, xi2, xi3, s])


def alpha_of_c(
    params: PowerParams, c: float, rtol: float = 1e-12
) -> tuple[float, float]:
    """Domain offset alpha in (0, 1) for -2n < c < 0, with an error estimate.

    log alpha is minus the integral over (0, inf) of the pole-cancelled pair
    G(z - s) + G(-z - s); the far tail is folded in by z -> 1/z.
    """
    n = params.n
    if not (-2.0 * n < c < 0.0):
        raise DomainError(f"c must lie in (-{2 * n}, 0), got {c}")
    pars = _ell_pars(params, c)
    z_split = 10.0 * max(1.0, math.sqrt(pars[3] - pars[5]))
    v1, e1, st1 = kernels.gk_adaptive(6, pars, 0.0, z_split, rtol, 1e-300, 400)
    v2, e2, st2 = kernels.gk_adaptive(7, pars, 0.0, 1.0 / z_split, rtol, 1e-300, 400)
    if st1 != 0 or st2 != 0:
        raise QuadratureFailure(
            f"offset-constant quadrature stalled (status {st1},{st2}) at c={c}: "
            f"value={-(v1 + v2)}, error={e1 + e2}",
            value=-(v1 + v2),
            error_estimate=e1 + e2,
        )
    log_alpha = -(v1 + v2)
    alpha = math.exp(log_alpha)
    return alpha, alpha * (e1 + e2)


def c_of_alpha(params: PowerParams, alpha: float, tol: float = 1e-9) -> float:
    """Inverse of alpha_of_c; alpha = 1 and alpha = 0 map to the endpoints."""
    n = params.n
    if alpha == 1.0:
        return 0.0
    if alpha == 0.0:
        return -2.0 * n
    if not (0.0 < alpha < 1.0):
        raise DomainError(f"alpha must lie in [0, 1], got {alpha}")
    eps = 2.0 * n * 1e-8

    def f(c):
        return alpha_of_c(params, c)[0] - alpha

    # coarse scan guards against multiple crossings (monotonicity of alpha(c)
    # is observed empirically, not assumed)
    grid = np.linspace(-2.0 * n + eps, -eps, 33)
    vals = np.array([f(c) for c in grid])
    signs = np.sign(vals)
    crossings = np.nonzero(np.diff(signs) != 0)[0]
    if len(crossings) == 0:
        raise ConvergenceError(
            f"no sign change for alpha={alpha} on the scan grid; "
            f"endpoint values {vals[0]:.3e}, {vals[-1]:.3e}"
        )
    if len(crossings) > 1:
        raise ConvergenceError(
            f"multiple crossings for alpha={alpha} at scan cells {crossings}; "
            "alpha(c) is not monotone on this grid"
        )
    i = int(crossings[0])
    c = float(brentq(f, grid[i], grid[i + 1], xtol=1e-13, rtol=8.9e-16))
    if abs(alpha_of_c(params, c)[0] - alpha) > max(tol, 1e-8):
        raise ConvergenceError(f"target alpha={alpha} not matched at c={c}")
    return c


class _EllipticTables:
    """Cumulative log|t| tables for one elliptic branch.

    Right of the pole (t > 0): w = log(zeta + s), node values are log t.
    Left of the pole (t < 0): w = log(-zeta - s), node values are log(-t),
    anchored at -alpha through the offset constant.
    """

    def __init__(self, params: PowerParams, c: float, n_nodes: int, rtol: float):
        self.params = params
        self.c = c
        self.pars = _ell_pars(params, c)
        self.s = float(self.pars[6])
        self.xi1 = float(self.pars[3])
        self.n_nodes = n_nodes
        self.wmax = math.log(_ZFAR + self.s)
        self.dw = (self.wmax - _WMIN) / (n_nodes - 1)

        pars = self.pars
        tail_r, er, str_ = kernels.gk_adaptive(4, pars, 0.0, 1.0 / _ZFAR, rtol, 1e-300, 200)
        tail_l, el, stl = kernels.gk_adaptive(5, pars, 0.0, 1.0 / (_ZFAR + 2 * self.s), rtol, 1e-300, 200)
        if str_ != 0 or stl != 0:
            raise QuadratureFailure(
                "tail quadrature stalled building the branch tables",
                value=tail_r,
                error_estimate=er + el,
            )
        panels_r, err_r = kernels.cum_panels(2, pars, _WMIN, self.dw, n_nodes)
        panels_l, err_l = kernels.cum_panels(3, pars, _WMIN, self.dw, n_nodes)
        self.alpha, self.alpha_err = alpha_of_c(params, c, rtol)

        # node value = anchor at the far end minus the panel sums back down
        prefix_r = np.empty(n_nodes)
        prefix_r[-1] = -tail_r
        prefix_r[:-1] = prefix_r[-1] - np.cumsum(panels_r[::-1])[::-1]
        prefix_l = np.empty(n_nodes)
        prefix_l[-1] = math.log(self.alpha) + tail_l
        prefix_l[:-1] = prefix_l[-1] - np.cumsum(panels_l[::-1])[::-1]
        self.prefix_r = prefix_r
        self.prefix_l = prefix_l
        self.table_err = err_r + err_l

        # slope constants of t(zeta) at the pole; their mismatch measures the
        # quality of the offset constant (phi_dot must match at t = 0)
        self.log_c_right = prefix_r[0] - _WMIN
        self.log_c_left = prefix_l[0] - _WMIN
        self.match_defect = abs(self.log_c_left - self.log_c_right)

        cslope = math.exp(self.log_c_right)
        self.phi_dot0 = -2.0 * self.s / cslope
        # first integral at t = 0: e^{-phi} phi_dot (p+1)(q+1) = c
        self.phi0 = math.log(
            self.phi_dot0 * (params.p + 1.0) * (params.q + 1.0) / c
        )
        self.phi_ddot0 = phi_ddot_from_ode(params, 0.0, self.phi0, self.phi_dot0)

    # -- forward maps ------------------------------------------------------
    def logt_signed(self, zeta: float) -> tuple[float, float]:
        """(sign of t, log|t|) at curve parameter zeta."""
        s = self.s
        if zeta > -s:
            w = math.log(zeta + s)
            if zeta <= _ZFAR:
                return 1.0, float(
                    kernels.table_value(2, self.pars, _WMIN, self.dw, self.prefix_r, w)
                )
            val, _, _ = kernels.gk_adaptive(4, self.pars, 0.0, 1.0 / zeta, 1e-13, 1e-300, 200)
            return 1.0, -val
        if zeta < -s:
            w = math.log(-zeta - s)
            if -zeta <= _ZFAR:
                return -1.0, float(
                    kernels.table_value(3, self.pars, _WMIN, self.dw, self.prefix_l, w)
                )
            val, _, _ = kernels.gk_adaptive(5, self.pars, 0.0, -1.0 / zeta, 1e-13, 1e-300, 200)
            return -1.0, math.log(self.alpha) + val
        return 0.0, -math.inf

    def t_phi(self, zeta: float) -> tuple[float, float]:
        sign, logabs = self.logt_signed(zeta)
        if sign == 0.0:
            return 0.0, self.phi0
        t = sign * math.exp(logabs)
        return t, self._phi_from(zeta, sign, logabs)

    def _phi_from(self, zeta: float, sign: float, logabs: float) -> float:
        pars = self.pars
        s = self.s
        xi = zeta * zeta + self.xi1
        r_val = 2.0 * zeta * kernels._ell_w_of(pars, zeta)
        if abs(zeta + s) >= 0.5 * s:
            # e^phi = (R - c)/(2 n t); R - c and t share their sign
            num = (r_val - self.c) if sign > 0.0 else (self.c - r_val)
            return math.log(num / (2.0 * self.params.n)) - logabs
        # pole-stable form: e^phi = 2 P(xi) / (t (R + c)) with
        # P = (zeta-s)(zeta+s)(xi+p)(xi+q) and |zeta+s|/|t| taken in logs
        w = math.log(abs(zeta + s))
        num = 2.0 * (s - zeta) * (xi + self.params.p) * (xi + self.params.q)
        return math.log(num / (-(r_val + self.c))) + (w - logabs)

    # -- inversion ---------------------------------------------------------
    def zeta_of_t(self, t: float) -> float:
        if t == 0.0:
            return -self.s
        if t > 0.0:
            target = math.log(t)
            if target >= self.prefix_r[-1]:
                return self._invert_beyond(target, right=True)
            w = kernels.table_invert(2, self.pars, _WMIN, self.dw, self.prefix_r, target)
            return -self.s + math.exp(w)
        target = math.log(-t)
        if target >= self.prefix_l[-1]:
            return self._invert_beyond(target, right=False)
        w = kernels.table_invert(3, self.pars, _WMIN, self.dw, self.prefix_l, target)
        return -self.s - math.exp(w)

    def zeta_of_t_many(self, ts: np.ndarray) -> np.ndarray:
        out = np.empty_like(ts)
        pos = ts > 0.0
        neg = ts < 0.0
        if pos.any():
            targets = np.log(ts[pos])
            easy = targets < self.prefix_r[-1]
            res = np.empty_like(targets)
            res[easy] = -self.s + np.exp(
                kernels.table_invert_many(
                    2, self.pars, _WMIN, self.dw, self.prefix_r, targets[easy]
                )
            )
            for i in np.nonzero(~easy)[0]:
                res[i] = self._invert_beyond(float(targets[i]), right=True)
            out[pos] = res
        if neg.any():
            targets = np.log(-ts[neg])
            easy = targets < self.prefix_l[-1]
            res = np.empty_like(targets)
            res[easy] = -self.s - np.exp(
                kernels.table_invert_many(
                    3, self.pars, _WMIN, self.dw, self.prefix_l, targets[easy]
                )
            )
            for i in np.nonzero(~easy)[0]:
                res[i] = self._invert_beyond(float(targets[i]), right=False)
            out[neg] = res
        out[~(pos | neg)] = -self.s
        return out

    def _invert_beyond(self, target: float, right: bool) -> float:
        # far tails: log t ~ -3/(2 zeta^2) on the right,
        # log(-t) ~ log(alpha) - 3/(2 zeta^2) on the left
        if right:
            gap = max(-target, 1e-300)
            zeta = math.sqrt(1.5 / gap)
            for _ in range(6):
                val, _, _ = kernels.gk_adaptive(4, self.pars, 0.0, 1.0 / zeta, 1e-13, 1e-300, 200)
                step = (-val - target) / kernels._ell_g(self.pars, zeta)
                zeta -= step
                if abs(step) <= 1e-12 * zeta:
                    break
            return zeta
        gap = max(math.log(self.alpha) - target, 1e-300)
        zeta = -math.sqrt(1.5 / gap)
        for _ in range(6):
            val, _, _ = kernels.gk_adaptive(5, self.pars, 0.0, -1.0 / zeta, 1e-13, 1e-300, 200)
            f = math.log(self.alpha) + val - target
            zeta -= f / kernels._ell_g(self.pars, zeta)
            if abs(f) <= 1e-13:
                break
        return zeta


@lru_cache(maxsize=64)
def _tables_for(params: PowerParams, c: float, n_nodes: int, rtol: float) -> _EllipticTables:
    return _EllipticTables(params, c, n_nodes, rtol)


def elliptic_curve(branch: BranchData, zeta: float) -> tuple[float, float]:
    """(t, phi) on the elliptic branch at curve parameter zeta in R."""
    n = branch.params.n
    if not (-2.0 * n < branch.c < 0.0):
        raise DomainError(f"elliptic branch requires c in (-{2 * n}, 0), got {branch.c}")
    tables = _tables_for(branch.params, branch.c, 2048, 1e-12)
    return tables.t_phi(zeta)


# ---------------------------------------------------------------------------
# profiles
# ---------------------------------------------------------------------------


class _OrthantProfile:
    t_domain = (0.0, math.inf)

    def __init__(self, params: PowerParams):
        self.params = params

    def param_of_t(self, t):
        return t

    def param_of_t_many(self, ts):
        return np.asarray(ts, dtype=float)

    def eval_param(self, t):
        return float(t), -math.log(t), -1.0 / t

    def eval_param_many(self, ts):
        ts = np.asarray(ts, dtype=float)
        return ts, -np.log(ts), -1.0 / ts

    def xi_of_param(self, t):
        return 0.0


class _ExpProfile:
    t_domain = (0.0, math.inf)
    params = None

    def param_of_t(self, t):
        phi, pd, _ = expcone.exp_phi_at(t)
        return -1.0 / pd  # kappa

    def param_of_t_many(self, ts):
        ts = np.asarray(ts, dtype=float)
        xs, _ = kernels.invert_monotone_many(
            11, np.empty(0), ts, np.log(np.maximum(ts, 1e-300)), 1.0, True
        )
        return np.exp(xs)

    def eval_param(self, kappa):
        pt = expcone.exp_curve(kappa)
        return pt.t, pt.phi, pt.phi_dot

    def eval_param_many(self, ks):
        ks = np.asarray(ks, dtype=float)
        ts = ks + 0.5 * np.log1p(ks)
        phis = 0.5 * (np.log1p(ks) - 3.0 * np.log(ks))
        return ts, phis, -1.0 / ks

    def xi_of_param(self, kappa):
        return math.nan


class _C0Profile:
    t_domain = (-1.0, 1.0)

    def __init__(self, params: PowerParams):
        self.params = params
        self.pars = np.array([params.p, params.q])

    def param_of_t(self, t):
        if t == 0.0:
            return 0.0
        x, status = kernels.invert_monotone(
            12, self.pars, math.log(abs(t)), 1.0, 1.0, True
        )
        if status != 0:
            raise ConvergenceError(f"inversion failed for t={t}")
        return math.copysign(math.sinh(x), t)

    def param_of_t_many(self, ts):
        ts = np.asarray(ts, dtype=float)
        out = np.zeros_like(ts)
        nz = ts != 0.0
        targets = np.log(np.abs(ts[nz]))
        xs, _ = kernels.invert_monotone_many(
            12, self.pars, targets, np.ones_like(targets), 1.0, True
        )
        out[nz] = np.sign(ts[nz]) * np.sinh(xs)
        return out

    def eval_param(self, zeta):
        t, phi = c0_curve(self.params, zeta)
        pd = 0.0 if zeta == 0.0 else zeta * zeta / t
        return t, phi, pd

    def eval_param_many(self, zs):
        p, q = self.params.p, self.params.q
        zs = np.asarray(zs, dtype=float)
        z2 = zs * zs
        ts = zs * (z2 + p + 1.0) ** (-0.5 / p) * (z2 + q + 1.0) ** (-0.5 / q)
        phis = (
            -0.5 * math.log(self.params.n)
            + (p + 1.0) / (2.0 * p) * np.log(z2 + p + 1.0)
            + (q + 1.0) / (2.0 * q) * np.log(z2 + q + 1.0)
        )
        pds = np.divide(z2, ts, out=np.zeros_like(ts), where=ts != 0.0)
        return ts, phis, pds

    def xi_of_param(self, zeta):
        return 1.0 + zeta * zeta


class _EllipticProfile:
    def __init__(self, params: PowerParams, c: float, n_nodes: int, rtol: float):
        self.params = params
        self.c = c
        self.tables = _tables_for(params, c, n_nodes, rtol)
        self.t_domain = (-self.tables.alpha, 1.0)

    def param_of_t(self, t):
        return self.tables.zeta_of_t(t)

    def param_of_t_many(self, ts):
        return self.tables.zeta_of_t_many(np.asarray(ts, dtype=float))

    def eval_param(self, zeta):
        t, phi = self.tables.t_phi(zeta)
        if t == 0.0:
            return t, phi, self.tables.phi_dot0
        xi = zeta * zeta + self.tables.xi1
        return t, phi, (xi - 1.0) / t

    def eval_param_many(self, zs):
        zs = np.asarray(zs, dtype=float)
        ts = np.empty_like(zs)
        phis = np.empty_like(zs)
        pds = np.empty_like(zs)
        for i, z in enumerate(zs):
            ts[i], phis[i], pds[i] = self.eval_param(float(z))
        return ts, phis, pds

    def xi_of_param(self, zeta):
        return zeta * zeta + self.tables.xi1


class _Beta1Profile:
    t_domain = (0.0, 1.0)

    def __init__(self, params: PowerParams):
        self.params = params
        self.pars = np.array([params.p, params.q])

    def param_of_t(self, t):
        x, status = kernels.invert_monotone(13, self.pars, math.log(t), 0.0, 1.0, True)
        if status != 0:
            raise ConvergenceError(f"inversion failed for t={t}")
        return math.exp(x)

    def param_of_t_many(self, ts):
        targets = np.log(np.asarray(ts, dtype=float))
        xs, _ = kernels.invert_monotone_many(
            13, self.pars, targets, np.zeros_like(targets), 1.0, True
        )
        return np.exp(xs)

    def eval_param(self, xi):
        t, phi = extreme_curve_beta1(self.params, xi)
        return t, phi, (xi - 1.0) / t

    def eval_param_many(self, xis):
        xis = np.asarray(xis, dtype=float)
        ts = np.empty_like(xis)
        phis = np.empty_like(xis)
        for i, xi in enumerate(xis):
            ts[i], phis[i] = extreme_curve_beta1(self.params, float(xi))
        return ts, phis, (xis - 1.0) / ts

    def xi_of_param(self, xi):
        return xi


class _BetaInfProfile:
    """Raw curve on (-1, inf); family3 composes it with the reflection."""

    def __init__(self, params: PowerParams):
        self.params = params
        self.pars = np.array([params.p, params.q])
        self.t_domain = (-1.0, math.inf)
        self._pd0 = -math.exp(-kernels.binf_logg_of_xi(params.p, params.q, 1.0))

    def param_of_t(self, t):
        if t == 0.0:
            return 1.0
        if t > 0.0:
            x, status = kernels.invert_monotone(
                14, self.pars, math.log(t), -1.0, 1.0, False
            )
        else:
            x, status = kernels.invert_monotone(
                15, self.pars, math.log(-t), 1.0, 1.0, True
            )
        if status != 0:
            raise ConvergenceError(f"inversion failed for t={t}")
        return math.exp(x)

    def param_of_t_many(self, ts):
        ts = np.asarray(ts, dtype=float)
        out = np.ones_like(ts)
        pos = ts > 0.0
        neg = ts < 0.0
        if pos.any():
            targets = np.log(ts[pos])
            xs, _ = kernels.invert_monotone_many(
                14, self.pars, targets, -np.ones_like(targets), 1.0, False
            )
            out[pos] = np.exp(xs)
        if neg.any():
            targets = np.log(-ts[neg])
            xs, _ = kernels.invert_monotone_many(
                15, self.pars, targets, np.ones_like(targets), 1.0, True
            )
            out[neg] = np.exp(xs)
        return out

    def eval_param(self, xi):
        t, phi = extreme_curve_betainf(self.params, xi)
        if t == 0.0:
            return t, phi, self._pd0
        return t, phi, (xi - 1.0) / t

    def eval_param_many(self, xis):
        xis = np.asarray(xis, dtype=float)
        ts = np.empty_like(xis)
        phis = np.empty_like(xis)
        pds = np.empty_like(xis)
        for i, xi in enumerate(xis):
            ts[i], phis[i], pds[i] = self.eval_param(float(xi))
        return ts, phis, pds

    def xi_of_param(self, xi):
        return xi


class _ReflectedProfile:
    """phi(t) = inner phi(-t); used for the family-3 chart domain (-inf, 1)."""

    def __init__(self, inner):
        self.inner = inner
        self.params = inner.params
        lo, hi = inner.t_domain
        self.t_domain = (-hi, -lo)

    def param_of_t(self, t):
        return self.inner.param_of_t(-t)

    def param_of_t_many(self, ts):
        return self.inner.param_of_t_many(-np.asarray(ts, dtype=float))

    def eval_param(self, param):
        t, phi, pd = self.inner.eval_param(param)
        return -t, phi, -pd

    def eval_param_many(self, params_arr):
        ts, phis, pds = self.inner.eval_param_many(params_arr)
        return -ts, phis, -pds

    def xi_of_param(self, param):
        return self.inner.xi_of_param(param)


class PhiSolution:
    """Uniform evaluator for the scalar profile phi on (-alpha, beta)."""

    def __init__(self, spec: ConeSpec, profile, branch: BranchData | None):
        self.spec = spec
        self.branch = branch
        self._profile = profile
        self.t_domain = profile.t_domain

    def _check_domain(self, t: float):
        lo, hi = self.t_domain
        if not (lo < t < hi):
            raise DomainError(f"t={t} outside the profile domain ({lo}, {hi})")

    def param_of_t(self, t: float) -> float:
        self._check_domain(float(t))
        return self._profile.param_of_t(float(t))

    def t_of_param(self, param: float) -> float:
        return self._profile.eval_param(float(param))[0]

    def phi_of_param(self, param: float) -> float:
        return self._profile.eval_param(float(param))[1]

    def xi_of_param(self, param: float) -> float:
        return self._profile.xi_of_param(float(param))

    def _ddot(self, t, phi, pd):
        if self.spec.kind == "exp":
            return (math.exp(2.0 * phi) + pd * pd - pd**3) / (2.0 - 3.0 * pd)
        return phi_ddot_from_ode(self._profile.params, t, phi, pd)

    def jet(self, t: float) -> PhiJet:
        self._check_domain(float(t))
        param = self._profile.param_of_t(float(t))
        t_val, phi, pd = self._profile.eval_param(param)
        return PhiJet(t=float(t), phi=phi, phi_dot=pd, phi_ddot=self._ddot(t, phi, pd))

    def value(self, t: float) -> float:
        return self.jet(t).phi

    def derivative(self, t: float) -> float:
        return self.jet(t).phi_dot

    def second_derivative(self, t: float) -> float:
        return self.jet(t).phi_ddot

    def jet_arrays(self, ts) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(phi, phi_dot, phi_ddot) arrays; inversion is batched."""
        ts = np.asarray(ts, dtype=float)
        lo, hi = self.t_domain
        if np.any(ts <= lo) or np.any(ts >= hi):
            raise DomainError("some t values fall outside the profile domain")
        params_arr = self._profile.param_of_t_many(ts)
        t_vals, phis, pds = self._profile.eval_param_many(params_arr)
        if self.spec.kind == "exp":
            pdds = (np.exp(2.0 * phis) + pds**2 - pds**3) / (2.0 - 3.0 * pds)
        else:
            pp = self._profile.params
            n = pp.n
            num = n * np.exp(2.0 * phis) + pds**2 * (n - 1.0 + t_vals * pds)
            pdds = num / (2.0 * n + 1.0 + 3.0 * t_vals * pds)
        return phis, pds, pdds


def _branch_for(spec: ConeSpec, table_nodes: int, quad_rtol: float) -> BranchData | None:
    params = spec.params
    if spec.kind == "orthant":
        c = -2.0 * params.n
        return BranchData(params, c, 0.0, 0.0, -(params.n - 1.0), 0.0, math.inf, math.inf, ())
    if spec.kind == "family5":
        c = -2.0 * params.n
        return BranchData(params, c, 0.0, 0.0, -(params.n - 1.0), 0.0, 1.0, 1.0, (1,))
    if spec.kind == "family3":
        c = -2.0 * params.n
        return BranchData(
            params, c, 0.0, 0.0, -(params.n - 1.0), math.inf, 1.0, 1.0, (-1,), reflected=True
        )
    if spec.kind == "family4":
        if spec.alpha == 1.0:
            return BranchData(params, 0.0, 1.0, -params.q, -params.p, 1.0, 1.0, 1.0, (1,))
        c = c_of_alpha(params, spec.alpha)
        xi1, xi2, xi3 = cubic_roots(params, c)
        tables = _tables_for(params, c, table_nodes, quad_rtol)
        return BranchData(params, c, xi1, xi2, xi3, tables.alpha, 1.0, 1.0, (-1, 1))
    return None


def phi_solution(
    spec: ConeSpec, table_nodes: int = 2048, quad_rtol: float = 1e-12
) -> PhiSolution:
    """Build the scalar profile evaluator for a cone family."""
    branch = _branch_for(spec, table_nodes, quad_rtol)
    if spec.kind == "exp":
        profile = _ExpProfile()
    elif spec.kind == "orthant":
        profile = _OrthantProfile(spec.params)
    elif spec.kind == "family5":
        profile = _Beta1Profile(spec.params)
    elif spec.kind == "family3":
        profile = _ReflectedProfile(_BetaInfProfile(spec.params))
    elif spec.alpha == 1.0:
        profile = _C0Profile(spec.params)
    else:
        profile = _EllipticProfile(spec.params, branch.c, table_nodes, quad_rtol)
    return PhiSolution(spec, profile, branch)


# ---------------------------------------------------------------------------
# full potential evaluator
# ---------------------------------------------------------------------------


class CanonicalPotential:
    """Value/gradient/Hessian of the canonical potential of a cone."""

    def __init__(self, spec: ConeSpec, solution: PhiSolution | None = None):
        self.spec = spec
        self.solution = solution if solution is not None else phi_solution(spec)

    def _t_of_point(self, x, y, z):
        if self.spec.kind == "exp":
            return math.log(y / z) - x / z
        p, q = self.spec.params.p, self.spec.params.q
        return x ** (-1.0 / p) * y ** (-1.0 / q) * z

    def value(self, point) -> float:
        x, y, z = (float(v) for v in point)
        if self.spec.kind == "exp":
            if not (y > 0.0 and z > 0.0):
                raise DomainError(f"point {point} outside the exponential cone chart")
            t = math.log(y / z) - x / z
            phi, _, _ = expcone.exp_phi_at(t)
            return -math.log(y) - 2.0 * math.log(z) + phi
        if not (x > 0.0 and y > 0.0):
            raise DomainError(f"point {point} outside the power chart")
        jet = self.solution.jet(self._t_of_point(x, y, z))
        p, q = self.spec.params.p, self.spec.params.q
        return (
            -(p + 1.0) / p * math.log(x) - (q + 1.0) / q * math.log(y) + jet.phi
        )

    def jet(self, point) -> PotentialJet:
        if self.spec.kind == "exp":
            return expcone.exp_potential(point)
        x, y, z = (float(v) for v in point)
        t = self._t_of_point(x, y, z)
        return potential_jet(self.spec.params, self.solution.jet(t), point)

    def value_many(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        x, y, z = pts[:, 0], pts[:, 1], pts[:, 2]
        if self.spec.kind == "exp":
            if np.any(y <= 0.0) or np.any(z <= 0.0):
                raise DomainError("points outside the exponential cone chart")
            ts = np.log(y / z) - x / z
            phis, _, _ = self.solution.jet_arrays(ts)
            return -np.log(y) - 2.0 * np.log(z) + phis
        if np.any(x <= 0.0) or np.any(y <= 0.0):
            raise DomainError("points outside the power chart")
        p, q = self.spec.params.p, self.spec.params.q
        ts = x ** (-1.0 / p) * y ** (-1.0 / q) * z
        phis, _, _ = self.solution.jet_arrays(ts)
        return -(p + 1.0) / p * np.log(x) - (q + 1.0) / q * np.log(y) + phis

    def jet_arrays(self, points: np.ndarray):
        """(F, grad, hess) stacked over N points for the power families."""
        pts = np.asarray(points, dtype=float)
        x, y, z = pts[:, 0], pts[:, 1], pts[:, 2]
        if self.spec.kind == "exp":
            return self._exp_jet_arrays(x, y, z)
        p, q = self.spec.params.p, self.spec.params.q
        r = x ** (-1.0 / p) * y ** (-1.0 / q)
        ts = r * z
        phis, pds, pdds = self.solution.jet_arrays(ts)
        f = -(p + 1.0) / p * np.log(x) - (q + 1.0) / q * np.log(y) + phis
        grad = np.stack(
            [
                -(p + 1.0 + ts * pds) / (p * x),
                -(q + 1.0 + ts * pds) / (q * y),
                pds * r,
            ],
            axis=1,
        )
        cross = pds + ts * pdds
        n_pts = len(x)
        hess = np.empty((n_pts, 3, 3))
        hess[:, 0, 0] = ((p + 1.0) * (p + ts * pds) + ts * ts * pdds) / (p * p * x * x)
        hess[:, 0, 1] = hess[:, 1, 0] = ts * cross / (p * q * x * y)
        hess[:, 0, 2] = hess[:, 2, 0] = -r * cross / (p * x)
        hess[:, 1, 1] = ((q + 1.0) * (q + ts * pds) + ts * ts * pdds) / (q * q * y * y)
        hess[:, 1, 2] = hess[:, 2, 1] = -r * cross / (q * y)
        hess[:, 2, 2] = pdds * r * r
        return f, grad, hess

    def _exp_jet_arrays(self, x, y, z):
        ts = np.log(y / z) - x / z
        phis, pds, pdds = self.solution.jet_arrays(ts)
        f = -np.log(y) - 2.0 * np.log(z) + phis
        tz = -1.0 / z + x / z**2
        grad = np.stack([-pds / z, (-1.0 + pds) / y, -2.0 / z + pds * tz], axis=1)
        n_pts = len(x)
        hess = np.empty((n_pts, 3, 3))
        hess[:, 0, 0] = pdds / z**2
        hess[:, 0, 1] = hess[:, 1, 0] = -pdds / (y * z)
        hess[:, 0, 2] = hess[:, 2, 0] = pds / z**2 - pdds * tz / z
        hess[:, 1, 1] = (1.0 - pds + pdds) / y**2
        hess[:, 1, 2] = hess[:, 2, 1] = pdds * tz / y
        hess[:, 2, 2] = 2.0 / z**2 + pds * (1.0 / z**2 - 2.0 * x / z**3) + pdds * tz**2
        return f, grad, hess

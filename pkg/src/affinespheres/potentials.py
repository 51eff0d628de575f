"""Shared machinery for the power-family potentials.

The ansatz is F(x, y, z) = -((p+1)/p) log x - ((q+1)/q) log y + phi(t) with
t = x^{-1/p} y^{-1/q} z, and a scalar profile phi on (-alpha, beta).  This
module provides the closed-form gradient/Hessian assembly, the Monge-Ampere
residual, the convexity condition, the first integral (with constant c), and
the autonomous xi-ODE

    d xi / d tau = (-c s W + c^2 + 4 n P) / (2 n (3 xi + 2(n-1))),

where n = p+q, P(xi) = (xi-1)(xi+p)(xi+q), W = sqrt(c^2 + 4 n P) and
s = +-1, which serves as the independent numerical oracle for the
quadrature-built solution branches.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .cones import PowerParams
from .errors import (
    BlowUp,
    DomainError,
    InconsistentJet,
    LeftAdmissibleRegion,
    OutsideCone,
)

__all__ = [
    "PhiJet",
    "PotentialJet",
    "potential_jet",
    "ma_residual",
    "convexity_check",
    "first_integral_residual",
    "phi_ddot_from_ode",
    "cubic_p",
    "xi_rhs",
    "integrate_xi",
    "XiState",
    "XiTrajectory",
    "diag_unimodular_flow",
]


@dataclass(frozen=True)
class PhiJet:
    t: float
    phi: float
    phi_dot: float
    phi_ddot: float


@dataclass(frozen=True)
class PotentialJet:
    F: float
    grad: np.ndarray
    hess: np.ndarray


def cubic_p(params: PowerParams, xi: float) -> float:
    """P(xi) = (xi - 1)(xi + p)(xi + q)."""
    return (xi - 1.0) * (xi + params.p) * (xi + params.q)


def phi_ddot_from_ode(params: PowerParams, t: float, phi: float, phi_dot: float) -> float:
    """Second derivative from the scalar ODE, exact given (t, phi, phi_dot)."""
    n = params.n
    num = n * math.exp(2.0 * phi) + phi_dot**2 * (n - 1.0 + t * phi_dot)
    return num / (2.0 * n + 1.0 + 3.0 * t * phi_dot)


def potential_jet(params: PowerParams, jet: PhiJet, point) -> PotentialJet:
    """Assemble F, gradient and Hessian at an interior point from a phi-jet.

    The Hessian is written in terms of r = t/z = x^{-1/p} y^{-1/q} so that
    points with z = 0 (interior for the two-sided families) are handled.
    """
    x, y, z = (float(v) for v in point)
    if not (x > 0.0 and y > 0.0):
        raise OutsideCone(f"point {point} has nonpositive x or y")
    p, q = params.p, params.q
    r = x ** (-1.0 / p) * y ** (-1.0 / q)
    t = r * z
    if abs(t - jet.t) > 1e-12 * max(1.0, abs(t), abs(jet.t)):
        raise InconsistentJet(f"jet.t={jet.t} but point gives t={t}")
    t = jet.t
    pd, pdd = jet.phi_dot, jet.phi_ddot

    f = -(p + 1.0) / p * math.log(x) - (q + 1.0) / q * math.log(y) + jet.phi
    grad = np.array(
        [
            -(p + 1.0 + t * pd) / (p * x),
            -(q + 1.0 + t * pd) / (q * y),
            pd * r,
        ]
    )
    cross = pd + t * pdd
    hess = np.array(
        [
            [
                ((p + 1.0) * (p + t * pd) + t * t * pdd) / (p * p * x * x),
                t * cross / (p * q * x * y),
                -r * cross / (p * x),
            ],
            [
                t * cross / (p * q * x * y),
                ((q + 1.0) * (q + t * pd) + t * t * pdd) / (q * q * y * y),
                -r * cross / (q * y),
            ],
            [
                -r * cross / (p * x),
                -r * cross / (q * y),
                pdd * r * r,
            ],
        ]
    )
    return PotentialJet(F=f, grad=grad, hess=hess)


def ma_residual(jet: PotentialJet) -> float:
    """(det F'' - e^{2F}) / e^{2F}."""
    target = math.exp(2.0 * jet.F)
    return (float(np.linalg.det(jet.hess)) - target) / target


def convexity_check(params: PowerParams, t: float, phi_dot: float, phi_ddot: float) -> bool:
    """Positive-definiteness of the assembled Hessian in terms of the jet."""
    n = params.n
    tp = t * phi_dot
    if not tp > -(2.0 * n + 1.0) / 3.0:
        return False
    return phi_ddot > phi_dot**2 * (n - 1.0 + tp) / (2.0 * n + 1.0 + 3.0 * tp)


def first_integral_residual(
    params: PowerParams, c: float, t: float, phi: float, phi_dot: float
) -> float:
    """Defect of the first integral with constant c."""
    p, q = params.p, params.q
    tp = t * phi_dot
    lhs = math.exp(-phi) * phi_dot * (tp + p + 1.0) * (tp + q + 1.0)
    return lhs - params.n * t * math.exp(phi) - c


# ---------------------------------------------------------------------------
# the autonomous xi-ODE and its integration oracle
# ---------------------------------------------------------------------------


def _xi_rhs_stable(n: float, m: float, c: float, sigma: int, rad: float, p_val: float, xi: float) -> float:
    w = math.sqrt(rad)
    cs = c * sigma
    if cs > 0.0:
        # W - cs cancels near the roots; deflate through W^2 - c^2 = 4 n P
        num = w * 4.0 * n * p_val / (w + cs)
    else:
        num = w * (w - cs)
    return num / (2.0 * n * (3.0 * xi + 2.0 * m))


def xi_rhs(params: PowerParams, c: float, sigma: int, xi: float) -> float:
    """Right-hand side of the autonomous ODE for xi(tau)."""
    if sigma not in (-1, 1):
        raise DomainError(f"sigma must be +-1, got {sigma}")
    n, m = params.n, params.n - 1.0
    p_val = cubic_p(params, xi)
    rad = c * c + 4.0 * n * p_val
    if rad < 0.0:
        raise DomainError(f"negative radicand c^2 + 4(p+q)P = {rad} at xi={xi}")
    den = 3.0 * xi + 2.0 * m
    if den == 0.0:
        raise DomainError(f"denominator vanishes at xi={xi}")
    return _xi_rhs_stable(n, m, c, sigma, rad, p_val, xi)


@dataclass(frozen=True)
class XiState:
    tau: float
    xi: float
    sigma: int
    c: float


class XiTrajectory:
    """Piecewise trajectory of the xi-ODE with sign switches.

    Segments are (tau_start, tau_end, sigma, dense_solution); tau values are
    increasing.  phi is reconstructed from e^{phi + tau} =
    (-c + sigma*sqrt(c^2 + 4nP))/(2n).
    """

    def __init__(self, params: PowerParams, c: float, segments, events):
        self.params = params
        self.c = c
        self.segments = segments
        self.events = events

    @property
    def tau_span(self) -> tuple[float, float]:
        return self.segments[0][0], self.segments[-1][1]

    def sigma_at(self, tau: float) -> int:
        for ta, tb, sigma, _ in self.segments:
            if tau <= tb:
                return sigma
        return self.segments[-1][2]

    def xi_at(self, tau):
        taus = np.atleast_1d(np.asarray(tau, dtype=float))
        out = np.empty_like(taus)
        for i, tv in enumerate(taus):
            seg = None
            for ta, tb, _, sol in self.segments:
                if ta - 1e-12 <= tv <= tb + 1e-12:
                    seg = sol
                    break
            if seg is None:
                raise DomainError(f"tau={tv} outside trajectory span {self.tau_span}")
            out[i] = seg(np.clip(tv, ta, tb))[0]
        return out if np.ndim(tau) else float(out[0])

    def phi_at(self, tau):
        taus = np.atleast_1d(np.asarray(tau, dtype=float))
        out = np.empty_like(taus)
        n = self.params.n
        for i, tv in enumerate(taus):
            xi = self.xi_at(float(tv))
            sigma = self.sigma_at(float(tv))
            rad = self.c**2 + 4.0 * n * cubic_p(self.params, xi)
            rad = max(rad, 0.0)
            val = (-self.c + sigma * math.sqrt(rad)) / (2.0 * n)
            out[i] = math.log(val) - tv
        return out if np.ndim(tau) else float(out[0])

    def states(self, taus) -> list[XiState]:
        return [
            XiState(float(tv), float(self.xi_at(float(tv))), self.sigma_at(float(tv)), self.c)
            for tv in np.atleast_1d(taus)
        ]


_XI_BIG = 1e9


def integrate_xi(
    params: PowerParams,
    c: float,
    sigma_schedule,
    xi0: float,
    tau0: float,
    tau_end: float,
    rtol: float = 1e-10,
    atol: float = 1e-12,
) -> XiTrajectory:
    """Integrate the xi-ODE from (tau0, xi0) to tau_end with sign switches.

    ``sigma_schedule`` is the initial sign, or a sequence of signs consumed
    at successive switches.  Switch events fire when the trajectory reaches a
    simple root of c^2 + 4nP; the square-root contact is hopped over by the
    local expansion delta ~ (A/2)^2 (tau - tau1)^2.  Raises BlowUp when xi
    escapes before tau_end and LeftAdmissibleRegion when the trajectory
    reaches xi = -(2/3)(p+q-1).
    """
    if tau_end <= tau0:
        raise DomainError("tau_end must exceed tau0")
    sigmas = list(sigma_schedule) if np.iterable(sigma_schedule) else [int(sigma_schedule)]
    sigma = sigmas.pop(0)
    if sigma not in (-1, 1):
        raise DomainError(f"sigma must be +-1, got {sigma}")

    n, m = params.n, params.n - 1.0
    rad0 = c * c + 4.0 * n * cubic_p(params, xi0)
    if rad0 < -1e-12 * max(1.0, c * c):
        raise DomainError(f"xi0={xi0} has negative radicand {rad0}")
    if sigma * math.sqrt(max(rad0, 0.0)) < c - 1e-12 * max(1.0, abs(c)):
        raise LeftAdmissibleRegion(f"sigma*sqrt(rad) > c fails at xi0={xi0}")
    floor = -2.0 * m / 3.0
    if xi0 <= floor:
        raise LeftAdmissibleRegion(f"xi0={xi0} is not above the floor {floor}")

    have_roots = abs(c) < 2.0 * n and c < 0.0
    xi1 = xi2 = None
    if have_roots:
        from .profiles import cubic_roots  # deferred: profiles imports this module

        xi1, xi2, _ = cubic_roots(params, c)
        # stop this far from the root and hop across it analytically; the
        # sqrt contact itself is not integrable to tolerance
        delta_switch = 1e-6 * max(1.0, abs(xi1), abs(xi2))

    segments = []
    events_log = []
    tau, xi = float(tau0), float(xi0)

    def rhs(_tau, y, sgn):
        p_val = cubic_p(params, y[0])
        rad = max(c * c + 4.0 * n * p_val, 0.0)
        return [_xi_rhs_stable(n, m, c, sgn, rad, p_val, y[0])]

    while True:
        evs = []

        def ev_floor(_t, y, *_args):
            return y[0] - floor

        ev_floor.terminal = True
        ev_floor.direction = -1
        evs.append(("floor", ev_floor))

        def ev_blow(_t, y, *_args):
            return y[0] - _XI_BIG

        ev_blow.terminal = True
        ev_blow.direction = 1
        evs.append(("blowup", ev_blow))

        if have_roots and sigma == -1 and xi > xi1:

            def ev_root1(_t, y, *_args):
                return y[0] - (xi1 + delta_switch)

            ev_root1.terminal = True
            ev_root1.direction = -1
            evs.append(("switch_xi1", ev_root1))
        if have_roots and sigma == 1 and xi < xi2:

            def ev_root2(_t, y, *_args):
                return y[0] - (xi2 - delta_switch)

            ev_root2.terminal = True
            ev_root2.direction = 1
            evs.append(("switch_xi2", ev_root2))

        sol = solve_ivp(
            rhs,
            (tau, tau_end),
            [xi],
            args=(sigma,),
            method="DOP853",
            dense_output=True,
            rtol=rtol,
            atol=atol,
            events=[f for _, f in evs],
        )
        if not sol.success:
            raise LeftAdmissibleRegion(f"integrator failed: {sol.message}")
        seg_end = float(sol.t[-1])
        segments.append((tau, seg_end, sigma, sol.sol))

        if sol.status != 1:  # reached tau_end
            return XiTrajectory(params, c, segments, events_log)

        kind = None
        tau_ev = None
        for (name, _), t_ev in zip(evs, sol.t_events):
            if len(t_ev):
                kind = name
                tau_ev = float(t_ev[0])
                break
        traj = XiTrajectory(params, c, segments, events_log)
        if kind == "floor":
            raise LeftAdmissibleRegion(
                f"trajectory reached the convexity floor xi={floor} at tau={tau_ev}",
                trajectory=traj,
            )
        if kind == "blowup":
            xi_end = float(sol.y_events[1][0][0]) if len(sol.y_events[1]) else _XI_BIG
            tau_star = tau_ev + 1.5 / xi_end - m / (4.0 * xi_end**2)
            raise BlowUp(
                f"xi escapes to +inf at tau* ~= {tau_star}", tau_star, trajectory=traj
            )

        # sign switch: hop across the root with the local expansion
        # d Delta/d tau = -+ A sqrt(Delta) (1 + sigma sqrt(kappa Delta)/|c|),
        # giving the time to contact (2 sqrt(D) - sigma sqrt(kappa) D/|c|)/A
        root = xi1 if kind == "switch_xi1" else xi2
        kappa = abs(4.0 * n * _dp_dxi(params, root))
        a_coef = abs(c) * math.sqrt(kappa) / (2.0 * n * (3.0 * root + 2.0 * m))
        new_sigma = sigmas.pop(0) if sigmas else -sigma

        def _hop(sgn):
            return (
                2.0 * math.sqrt(delta_switch)
                - sgn * math.sqrt(kappa) * delta_switch / abs(c)
            ) / a_coef

        hop_in = _hop(sigma)
        hop_out = _hop(new_sigma)
        events_log.append((tau_ev + hop_in, kind))
        tau = tau_ev + hop_in + hop_out
        xi = root + delta_switch if kind == "switch_xi1" else root - delta_switch
        sigma = new_sigma
        if tau >= tau_end:
            return XiTrajectory(params, c, segments, events_log)


def _dp_dxi(params: PowerParams, xi: float) -> float:
    return 3.0 * xi * xi + 2.0 * (params.n - 1.0) * xi


def diag_unimodular_flow(params: PowerParams, point, s: float) -> np.ndarray:
    """Unimodular diagonal automorphism flow in chart coordinates.

    g_s = diag(e^s, e^{(mu-1)s}, e^{-mu s}) with mu = (p-2)/(2p-1); the trace
    of the generator is zero, and the ansatz is invariant along the flow.
    """
    mu = params.mu
    x, y, z = (float(v) for v in point)
    return np.array(
        [math.exp(s) * x, math.exp((mu - 1.0) * s) * y, math.exp(-mu * s) * z]
    )

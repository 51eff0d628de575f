"""Exponential cone: scalar solution curve, potential jet, and immersion.

The canonical potential has the form F(x, y, z) = -log y - 2 log z + phi(t)
with t = log(y/z) - x/z > 0.  The scalar profile phi is given parametrically
by

    t = (log(1+k) + 2k)/2,     phi = (log(1+k) - 3 log k)/2,     k > 0,

with phi_dot = -1/k, and phi_ddot recovered from the scalar ODE
2 phi_ddot - phi_dot^2 - 3 phi_dot phi_ddot + phi_dot^3 = e^{2 phi}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .cones import ConeSpec, Region, membership
from .errors import ConvergenceError, DomainError, OutsideCone

__all__ = [
    "ExpCurvePoint",
    "exp_curve",
    "exp_phi_at",
    "exp_potential",
    "exp_immersion",
    "exp_ode_residual",
    "exp_convexity_ok",
    "exp_unimodular_flow",
]

_NOPARS = np.empty(0)


@dataclass(frozen=True)
class ExpCurvePoint:
    kappa: float
    t: float
    phi: float
    phi_dot: float
    phi_ddot: float


def _phi_ddot_from_ode(phi: float, phi_dot: float) -> float:
    return (math.exp(2.0 * phi) + phi_dot**2 - phi_dot**3) / (2.0 - 3.0 * phi_dot)


def exp_curve(kappa: float) -> ExpCurvePoint:
    """Evaluate the parametric solution curve at parameter kappa > 0."""
    if not (kappa > 0.0) or not math.isfinite(kappa):
        raise DomainError(f"kappa must be positive, got {kappa}")
    t = kernels.exp_t_of_kappa(kappa)
    phi = kernels.exp_phi_of_kappa(kappa)
    phi_dot = -1.0 / kappa
    return ExpCurvePoint(kappa, t, phi, phi_dot, _phi_ddot_from_ode(phi, phi_dot))


def exp_phi_at(t: float) -> tuple[float, float, float]:
    """(phi, phi_dot, phi_ddot) at t > 0 by inverting the strictly
    increasing map kappa -> t."""
    if not (t > 0.0) or not math.isfinite(t):
        raise DomainError(f"t must be positive, got {t}")
    # t(k) ~ (3/2) k for small k and ~ k for large k: log t is a good start
    x0 = math.log(t if t < 1.0 else max(t - 0.5 * math.log1p(t), 0.5 * t))
    x, status = kernels.invert_monotone(11, _NOPARS, t, x0, 1.0, True)
    if status != 0:
        raise ConvergenceError(f"bracketing failed inverting t(kappa) at t={t}")
    pt = exp_curve(math.exp(x))
    return pt.phi, pt.phi_dot, pt.phi_ddot


def exp_ode_residual(phi: float, phi_dot: float, phi_ddot: float) -> float:
    """Relative residual of the scalar ODE at a jet."""
    rhs = math.exp(2.0 * phi)
    lhs = 2.0 * phi_ddot - phi_dot**2 - 3.0 * phi_dot * phi_ddot + phi_dot**3
    return (lhs - rhs) / rhs


def exp_convexity_ok(phi_dot: float, phi_ddot: float) -> bool:
    """Positive-definiteness condition for the assembled Hessian."""
    if not phi_dot < 2.0 / 3.0:
        return False
    return phi_ddot > phi_dot**2 * (1.0 - phi_dot) / (2.0 - 3.0 * phi_dot)


def exp_potential(point) -> "PotentialJet":
    """Full jet (value, gradient, Hessian) of the canonical potential."""
    from .potentials import PotentialJet  # local import to avoid a cycle

    spec = ConeSpec.exponential()
    if membership(spec, point) is not Region.INTERIOR:
        raise OutsideCone(f"point {point} is not interior to the exponential cone")
    x, y, z = (float(v) for v in point)
    t = math.log(y / z) - x / z
    phi, pd, pdd = exp_phi_at(t)

    f = -math.log(y) - 2.0 * math.log(z) + phi
    tz = -1.0 / z + x / z**2  # d t / d z
    grad = np.array([-pd / z, (-1.0 + pd) / y, -2.0 / z + pd * tz])
    hess = np.array(
        [
            [pdd / z**2, -pdd / (y * z), pd / z**2 - pdd * tz / z],
            [-pdd / (y * z), (1.0 - pd + pdd) / y**2, pdd * tz / y],
            [
                pd / z**2 - pdd * tz / z,
                pdd * tz / y,
                2.0 / z**2 + pd * (1.0 / z**2 - 2.0 * x / z**3) + pdd * tz**2,
            ],
        ]
    )
    return PotentialJet(F=f, grad=grad, hess=hess)


def exp_immersion(kappa: float, z: float) -> np.ndarray:
    """Point of the affine sphere (the F = 0 level set) at (kappa, z)."""
    if not (kappa > 0.0 and z > 0.0):
        raise DomainError("kappa and z must be positive")
    x = -z * (3.0 * math.log(z) + 1.5 * math.log(kappa) + kappa)
    y = z**-2 * kappa**-1.5 * math.sqrt(1.0 + kappa)
    return np.array([x, y, z])


def exp_unimodular_flow(point, s: float) -> np.ndarray:
    """One-parameter unimodular automorphism flow of the exponential cone.

    (x, y, z) -> e^{-s/3} (x + s z, e^s y, z); the e^{-s/3} factor makes the
    determinant one, and F is invariant along the flow.
    """
    x, y, z = (float(v) for v in point)
    lam = math.exp(-s / 3.0)
    return lam * np.array([x + s * z, math.exp(s) * y, z])

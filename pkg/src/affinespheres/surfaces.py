"""Affine-sphere immersions, verification sweeps, and mesh export.

The immersion of the zero level set for the power families is

    (param, mu) -> e^{phi/3} ( e^{((q+1)/(3q)) mu},
                               e^{-((p+1)/(3p)) mu},
                               e^{-mu (p-q)/(3(p+q))} t(param) ),

and for the exponential cone (kappa, z) -> (-z (3 log z + 1.5 log kappa +
kappa), z^-2 kappa^-1.5 sqrt(1+kappa), z).  Verification pushes a
deterministic low-discrepancy grid through the immersion, scales off the
level set, and reports all invariant defects.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import expcone
from .cones import ConeSpec, Region, membership
from .errors import BlowUp, DomainError, EmptyMesh, LeftAdmissibleRegion
from .potentials import (
    convexity_check,
    diag_unimodular_flow,
    first_integral_residual,
    integrate_xi,
)
from .profiles import CanonicalPotential, PhiSolution, phi_solution

__all__ = [
    "SurfaceMesh",
    "VerifyReport",
    "immerse",
    "verify",
    "export_mesh",
    "fd_hessian_scalar",
    "fd_hessian_from_gradient",
    "boundary_angle",
    "default_param_window",
    "DEFAULT_TOLERANCES",
]

_EPS = np.finfo(float).eps


# ---------------------------------------------------------------------------
# immersion
# ---------------------------------------------------------------------------


def default_param_window(spec: ConeSpec) -> tuple[float, float]:
    """Curve-parameter window giving a well-conditioned interior patch."""
    if spec.kind == "exp":
        return 0.05, 20.0  # kappa, log-spaced
    if spec.kind == "orthant":
        return -2.0, 2.0  # tau = log t
    if spec.kind in ("family5", "family3"):
        return 0.05, 20.0  # xi, log-spaced
    return -4.0, 4.0  # zeta


def _param_grid(spec: ConeSpec, param_range, n: int) -> np.ndarray:
    lo, hi = param_range
    if spec.kind in ("exp", "family5", "family3"):
        if not (0.0 < lo < hi):
            raise DomainError(f"parameter range {param_range} outside (0, inf)")
        return np.geomspace(lo, hi, n)
    if not lo < hi:
        raise DomainError(f"empty parameter range {param_range}")
    return np.linspace(lo, hi, n)


def _mu_grid(spec: ConeSpec, mu_range, n: int) -> np.ndarray:
    lo, hi = mu_range
    if spec.kind == "exp":
        if not (0.0 < lo < hi):
            raise DomainError(f"z range {mu_range} outside (0, inf)")
        return np.geomspace(lo, hi, n)
    if not lo < hi:
        raise DomainError(f"empty mu range {mu_range}")
    return np.linspace(lo, hi, n)


def _immersion_points(
    spec: ConeSpec, sol: PhiSolution, params: np.ndarray, mus: np.ndarray
) -> np.ndarray:
    """Vertices (len(params)*len(mus), 3), param-major order."""
    if spec.kind == "exp":
        kk = np.repeat(params, len(mus))
        zz = np.tile(mus, len(params))
        x = -zz * (3.0 * np.log(zz) + 1.5 * np.log(kk) + kk)
        y = zz**-2.0 * kk**-1.5 * np.sqrt(1.0 + kk)
        return np.stack([x, y, zz], axis=1)

    p, q = spec.params.p, spec.params.q
    n = spec.params.n
    if spec.kind == "orthant":
        ts = np.exp(params)
        phis = -params
    else:
        ts, phis, _ = sol._profile.eval_param_many(params)
    radial = np.exp(phis / 3.0)
    tt = np.repeat(ts, len(mus))
    rr = np.repeat(radial, len(mus))
    mm = np.tile(mus, len(params))
    x = rr * np.exp((q + 1.0) / (3.0 * q) * mm)
    y = rr * np.exp(-(p + 1.0) / (3.0 * p) * mm)
    z = rr * np.exp(-mm * (p - q) / (3.0 * n)) * tt
    return np.stack([x, y, z], axis=1)


def _c0_explicit_points(spec: ConeSpec, params: np.ndarray, mus: np.ndarray) -> np.ndarray:
    """Explicit closed-form immersion for the two-sided cone with alpha = 1."""
    p, q = spec.params.p, spec.params.q
    n = spec.params.n
    zz = np.repeat(params, len(mus))
    mm = np.tile(mus, len(params))
    a = zz * zz + p + 1.0
    b = zz * zz + q + 1.0
    pref = n ** (-1.0 / 6.0)
    x = pref * a ** ((p + 1.0) / (6.0 * p)) * b ** ((q + 1.0) / (6.0 * q)) * np.exp(
        (q + 1.0) / (3.0 * q) * mm
    )
    y = pref * a ** ((p + 1.0) / (6.0 * p)) * b ** ((q + 1.0) / (6.0 * q)) * np.exp(
        -(p + 1.0) / (3.0 * p) * mm
    )
    z = pref * a ** ((p - 2.0) / (6.0 * p)) * b ** ((q - 2.0) / (6.0 * q)) * zz * np.exp(
        -mm * (p - q) / (3.0 * n)
    )
    return np.stack([x, y, z], axis=1)


@dataclass
class SurfaceMesh:
    spec: ConeSpec
    vertices: np.ndarray  # (n_param*n_mu, 3), param-major
    faces: np.ndarray  # (n_faces, 3) int, 0-based
    n_param: int
    n_mu: int
    params: np.ndarray
    mus: np.ndarray
    level_set_defect: float = field(default=math.nan)


def immerse(
    spec: ConeSpec,
    param_range=None,
    mu_range=None,
    n_param: int = 64,
    n_mu: int = 64,
    solution: PhiSolution | None = None,
) -> SurfaceMesh:
    """Grid-sampled immersion of the F = 0 level set."""
    if n_param < 2 or n_mu < 2:
        raise DomainError("n_param and n_mu must be at least 2")
    if param_range is None:
        param_range = default_param_window(spec)
    if mu_range is None:
        mu_range = (0.5, 2.0) if spec.kind == "exp" else (-2.0, 2.0)
    sol = solution if solution is not None else phi_solution(spec)
    params = _param_grid(spec, param_range, n_param)
    mus = _mu_grid(spec, mu_range, n_mu)
    if spec.kind == "family4" and spec.alpha == 1.0:
        verts = _c0_explicit_points(spec, params, mus)
    else:
        verts = _immersion_points(spec, sol, params, mus)

    faces = []
    for i in range(n_param - 1):
        for j in range(n_mu - 1):
            v00 = i * n_mu + j
            v01 = v00 + 1
            v10 = v00 + n_mu
            v11 = v10 + 1
            faces.append((v00, v10, v11))
            faces.append((v00, v11, v01))
    pot = CanonicalPotential(spec, sol)
    defect = float(np.max(np.abs(pot.value_many(verts))))
    return SurfaceMesh(
        spec=spec,
        vertices=verts,
        faces=np.array(faces, dtype=np.int64),
        n_param=n_param,
        n_mu=n_mu,
        params=params,
        mus=mus,
        level_set_defect=defect,
    )


def export_mesh(mesh: SurfaceMesh, format: str = "obj") -> bytes:
    """Serialize a mesh; OBJ (v/f lines) or CSV (param,mu,x,y,z)."""
    if mesh.vertices.size == 0:
        raise EmptyMesh("mesh has no vertices")
    if format == "obj":
        lines = [
            f"v {v[0]:.17g} {v[1]:.17g} {v[2]:.17g}" for v in mesh.vertices
        ]
        lines += [f"f {f[0] + 1} {f[1] + 1} {f[2] + 1}" for f in mesh.faces]
        return ("\n".join(lines) + "\n").encode()
    if format == "csv":
        lines = ["param,mu,x,y,z"]
        k = 0
        for pv in mesh.params:
            for mv in mesh.mus:
                x, y, z = mesh.vertices[k]
                lines.append(f"{pv:.17g},{mv:.17g},{x:.17g},{y:.17g},{z:.17g}")
                k += 1
        return ("\n".join(lines) + "\n").encode()
    raise DomainError(f"unknown mesh format {format!r}")


# ---------------------------------------------------------------------------
# finite-difference Hessians
# ---------------------------------------------------------------------------


def _fd_steps(point: np.ndarray, rel_step: float) -> np.ndarray:
    scale = float(np.max(np.abs(point)))
    return rel_step * np.maximum(np.abs(point), 0.1 * scale)


def fd_hessian_scalar(value_many, point, rel_step: float = _EPS**0.25) -> np.ndarray:
    """Central second differences of a scalar field (one batched call).

    rel_step defaults to eps^(1/4), the optimum for second differences of a
    function evaluated to machine accuracy.
    """
    point = np.asarray(point, dtype=float)
    h = _fd_steps(point, rel_step)
    stencil = [point]
    for i in range(3):
        e = np.zeros(3)
        e[i] = h[i]
        stencil += [point + 2 * e, point - 2 * e]
    pairs = [(0, 1), (0, 2), (1, 2)]
    for i, j in pairs:
        ei = np.zeros(3)
        ei[i] = h[i]
        ej = np.zeros(3)
        ej[j] = h[j]
        stencil += [point + ei + ej, point + ei - ej, point - ei + ej, point - ei - ej]
    vals = value_many(np.array(stencil))
    f0 = vals[0]
    hess = np.empty((3, 3))
    for i in range(3):
        hess[i, i] = (vals[1 + 2 * i] - 2.0 * f0 + vals[2 + 2 * i]) / (4.0 * h[i] ** 2)
    for k, (i, j) in enumerate(pairs):
        base = 7 + 4 * k
        hess[i, j] = hess[j, i] = (
            vals[base] - vals[base + 1] - vals[base + 2] + vals[base + 3]
        ) / (4.0 * h[i] * h[j])
    return hess


def fd_hessian_from_gradient(jet_arrays, point, rel_step: float = _EPS ** (1.0 / 3.0)) -> np.ndarray:
    """Central first differences of the closed-form gradient (symmetrized)."""
    point = np.asarray(point, dtype=float)
    h = _fd_steps(point, rel_step)
    stencil = []
    for i in range(3):
        e = np.zeros(3)
        e[i] = h[i]
        stencil += [point + e, point - e]
    _, grads, _ = jet_arrays(np.array(stencil))
    hess = np.empty((3, 3))
    for i in range(3):
        hess[i, :] = (grads[2 * i] - grads[2 * i + 1]) / (2.0 * h[i])
    return 0.5 * (hess + hess.T)


# ---------------------------------------------------------------------------
# boundary geometry
# ---------------------------------------------------------------------------


def boundary_angle(spec: ConeSpec, point) -> float:
    """Approximate angle (radians) between a ray and the nearest boundary piece."""
    v = np.asarray(point, dtype=float)
    v = v / np.linalg.norm(v)
    x, y, z = v
    if spec.kind == "exp":
        angles = [abs(z)]
        if y > 0.0 and z > 0.0:
            g = z * (math.log(y) - math.log(z)) - x
            dg = np.array([-1.0, z / y, math.log(y / z) - 1.0])
            angles.append(abs(g) / np.linalg.norm(dg))
        return float(min(angles))
    p, q = spec.params.p, spec.params.q
    angles = [abs(x), abs(y)]
    if x > 0.0 and y > 0.0:
        bound = x ** (1.0 / p) * y ** (1.0 / q)
        grad_bound = np.array([bound / (p * x), bound / (q * y), 0.0])
        if spec.chart_beta == 1.0:
            g = z - bound
            dg = np.array([-grad_bound[0], -grad_bound[1], 1.0])
            angles.append(abs(g) / np.linalg.norm(dg))
        a = spec.chart_alpha
        if a == 0.0:
            angles.append(abs(z))
        elif math.isfinite(a):
            g = z + a * bound
            dg = np.array([a * grad_bound[0], a * grad_bound[1], 1.0])
            angles.append(abs(g) / np.linalg.norm(dg))
    return float(min(angles))


# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------

DEFAULT_TOLERANCES = {
    "ma_closed": 1e-8,
    "ma_fd": 1e-6,
    "log_homogeneity": 1e-9,
    "automorphism": 1e-9,
    "level_set": 1e-8,
    "oracle": 1e-6,
    "first_integral": 1e-9,
}


@dataclass
class VerifyReport:
    spec: ConeSpec
    samples: int
    seed: int
    ma_max: float
    ma_mean: float
    ma_fd_max: float
    log_homogeneity: float
    automorphism: float
    level_set: float
    oracle: float
    first_integral: float
    convexity_violations: int
    tolerances: dict
    passed: bool

    def to_json(self) -> dict:
        return {
            "spec": self.spec.to_json(),
            "samples": self.samples,
            "seed": self.seed,
            "ma_residual": {
                "max": self.ma_max,
                "mean": self.ma_mean,
                "fd_max": self.ma_fd_max,
            },
            "log_homogeneity": self.log_homogeneity,
            "automorphism": self.automorphism,
            "level_set": self.level_set,
            "oracle": self.oracle,
            "first_integral": self.first_integral,
            "convexity_violations": self.convexity_violations,
            "tolerances": self.tolerances,
            "pass": self.passed,
        }

    def to_json_str(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def _weyl_sequence(n: int, seed: int) -> np.ndarray:
    """Deterministic 3D low-discrepancy points in [0,1)^3 (R3 sequence)."""
    # plastic-constant generalization of the golden ratio
    g = 1.2207440846057595  # x^4 = x + 1
    alphas = np.array([1.0 / g, 1.0 / g**2, 1.0 / g**3])
    k = np.arange(1, n + 1, dtype=float)
    offset = 0.5 + 0.61803398874989485 * seed
    return np.mod(offset + np.outer(k, alphas), 1.0)


def _sample_points(spec: ConeSpec, sol: PhiSolution, n: int, seed: int):
    """Interior samples: low-discrepancy (param, mu, scale) pushed through
    the immersion and scaled off the level set.  Returns (points, lambdas)."""
    u = _weyl_sequence(n, seed)
    lam = 2.0 ** (u[:, 2] - 0.5)
    if spec.kind == "exp":
        kk = 0.05 * (20.0 / 0.05) ** u[:, 0]
        zz = 0.5 * (2.0 / 0.5) ** u[:, 1]
        x = -zz * (3.0 * np.log(zz) + 1.5 * np.log(kk) + kk)
        y = zz**-2.0 * kk**-1.5 * np.sqrt(1.0 + kk)
        pts = np.stack([x, y, zz], axis=1)
        return lam[:, None] * pts, lam
    p, q = spec.params.p, spec.params.q
    nconst = spec.params.n
    mus = -1.5 + 3.0 * u[:, 1]
    if spec.kind == "orthant":
        ts = np.exp(-2.0 + 4.0 * u[:, 0])
        phis = -np.log(ts)
    elif spec.kind in ("family5", "family3"):
        xis = 0.05 * (20.0 / 0.05) ** u[:, 0]
        ts, phis, _ = sol._profile.eval_param_many(xis)
    else:
        zs = -3.0 + 6.0 * u[:, 0]
        ts, phis, _ = sol._profile.eval_param_many(zs)
    radial = np.exp(phis / 3.0)
    x = radial * np.exp((q + 1.0) / (3.0 * q) * mus)
    y = radial * np.exp(-(p + 1.0) / (3.0 * p) * mus)
    z = radial * np.exp(-mus * (p - q) / (3.0 * nconst)) * ts
    pts = np.stack([x, y, z], axis=1)
    return lam[:, None] * pts, lam


def _oracle_defect(spec: ConeSpec, sol: PhiSolution, rtol: float = 1e-10) -> float:
    """Max |xi| mismatch between the built curve and the RK integration."""
    if spec.kind == "exp":
        # no xi-reduction for this chart; report the scalar ODE residual
        kappas = np.geomspace(0.05, 20.0, 200)
        ts, phis, pds = sol._profile.eval_param_many(kappas)
        pdds = (np.exp(2.0 * phis) + pds**2 - pds**3) / (2.0 - 3.0 * pds)
        res = (2.0 * pdds - pds**2 - 3.0 * pds * pdds + pds**3) - np.exp(2.0 * phis)
        return float(np.max(np.abs(res / np.exp(2.0 * phis))))
    params = spec.params
    branch = sol.branch
    if spec.kind == "orthant":
        traj = integrate_xi(params, branch.c, -1, 0.0, 0.0, 3.0)
        return float(np.max(np.abs(traj.xi_at(np.linspace(0.0, 3.0, 7)))))
    if spec.kind == "family5":
        grid = np.geomspace(0.2, 20.0, 33)
        sigma = 1
    elif spec.kind == "family3":
        grid = np.linspace(0.9, 0.1, 33)  # inner curve, t > 0 piece
        sigma = -1
    elif spec.alpha == 1.0:
        grid = 1.0 + np.linspace(0.5, 3.0, 33) ** 2
        sigma = 1
    else:
        s = math.sqrt(1.0 - branch.xi1)
        zg = np.concatenate([np.linspace(-0.9 * s, -0.05 * s, 12), np.linspace(0.05, 2.5, 21)])
        return _oracle_defect_elliptic(spec, sol, zg, rtol)

    inner = sol._profile.inner if spec.kind == "family3" else sol._profile
    taus = []
    xis = []
    for g in grid:
        t, _, _ = inner.eval_param(float(g))
        taus.append(math.log(t))
        xis.append(inner.xi_of_param(float(g)))
    taus = np.array(taus)
    xis = np.array(xis)
    order = np.argsort(taus)
    taus, xis = taus[order], xis[order]
    try:
        traj = integrate_xi(params, branch.c, sigma, float(xis[0]), float(taus[0]), float(taus[-1]))
    except (BlowUp, LeftAdmissibleRegion) as exc:
        traj = exc.trajectory
        if traj is None:
            raise
    lo, hi = traj.tau_span
    mask = (taus >= lo) & (taus <= hi)
    return float(np.max(np.abs(traj.xi_at(taus[mask]) - xis[mask])))


def _oracle_defect_elliptic(spec, sol, zgrid, rtol) -> float:
    params = spec.params
    branch = sol.branch
    tables = sol._profile.tables
    taus = []
    xis = []
    for z in zgrid:
        t, _ = tables.t_phi(float(z))
        taus.append(math.log(t))
        xis.append(z * z + branch.xi1)
    taus = np.array(taus)
    xis = np.array(xis)
    # start on the sigma = -1 piece, integrate through the switch
    traj = integrate_xi(
        params, branch.c, -1, float(xis[0]), float(taus[0]), float(taus[-1]), rtol=rtol
    )
    lo, hi = traj.tau_span
    mask = (taus >= lo) & (taus <= hi)
    return float(np.max(np.abs(traj.xi_at(taus[mask]) - xis[mask])))


def _first_integral_defect(spec: ConeSpec, sol: PhiSolution) -> float:
    if spec.kind == "exp":
        kappas = np.geomspace(0.05, 20.0, 200)
        _, phis, pds = sol._profile.eval_param_many(kappas)
        res = np.exp(-phis) * pds * pds * (pds - 1.0) + np.exp(phis)
        return float(np.max(np.abs(res)))
    params = spec.params
    c_eff = sol.branch.effective_c
    if spec.kind == "orthant":
        pgrid = np.exp(np.linspace(-2.0, 2.0, 50))
    elif spec.kind in ("family5", "family3"):
        pgrid = np.geomspace(0.05, 20.0, 50)
    else:
        pgrid = np.linspace(-3.0, 3.0, 50)
    ts, phis, pds = sol._profile.eval_param_many(pgrid)
    out = 0.0
    for t, phi, pd in zip(ts, phis, pds):
        out = max(out, abs(first_integral_residual(params, c_eff, t, phi, pd)))
    return out


def verify(
    spec: ConeSpec,
    n_samples: int = 1000,
    seed: int = 0,
    tolerances: dict | None = None,
    solution: PhiSolution | None = None,
) -> VerifyReport:
    """Run the full invariant suite for one cone family."""
    if n_samples < 1:
        raise DomainError("n_samples must be at least 1")
    tol = dict(DEFAULT_TOLERANCES)
    if tolerances:
        tol.update(tolerances)
    sol = solution if solution is not None else phi_solution(spec)
    pot = CanonicalPotential(spec, sol)

    pts, _ = _sample_points(spec, sol, n_samples, seed)

    # closed-form Monge-Ampere residuals + convexity at every sampled jet
    f_vals, _, hessians = pot.jet_arrays(pts)
    dets = np.linalg.det(hessians)
    targets = np.exp(2.0 * f_vals)
    residuals = (dets - targets) / targets
    ma_max = float(np.max(np.abs(residuals)))
    ma_mean = float(np.mean(np.abs(residuals)))

    convexity_violations = 0
    if spec.kind == "exp":
        ts = np.log(pts[:, 1] / pts[:, 2]) - pts[:, 0] / pts[:, 2]
        _, pds, pdds = sol.jet_arrays(ts)
        for pd, pdd in zip(pds, pdds):
            if not expcone.exp_convexity_ok(pd, pdd):
                convexity_violations += 1
    else:
        p, q = spec.params.p, spec.params.q
        ts = pts[:, 0] ** (-1.0 / p) * pts[:, 1] ** (-1.0 / q) * pts[:, 2]
        _, pds, pdds = sol.jet_arrays(ts)
        for t, pd, pdd in zip(ts, pds, pdds):
            if not convexity_check(spec.params, t, pd, pdd):
                convexity_violations += 1

    # finite-difference Monge-Ampere route on a subsample
    n_fd = min(n_samples, 200)
    ma_fd_max = 0.0
    for k in range(n_fd):
        idx = k * n_samples // n_fd
        h_fd = fd_hessian_scalar(pot.value_many, pts[idx])
        res = (np.linalg.det(h_fd) - targets[idx]) / targets[idx]
        ma_fd_max = max(ma_fd_max, abs(res))

    # logarithmic homogeneity, F(a x) = -3 log a + F(x)
    log_hom = 0.0
    for a in (2.0, 0.5, 3.0):
        vals = pot.value_many(a * pts)
        log_hom = max(log_hom, float(np.max(np.abs(vals - f_vals + 3.0 * math.log(a)))))

    # unimodular automorphism invariance
    auto = 0.0
    for s_flow in (-1.0, -0.5, 0.5, 1.0):
        if spec.kind == "exp":
            moved = np.stack(
                [expcone.exp_unimodular_flow(ptv, s_flow) for ptv in pts], axis=0
            )
        else:
            moved = np.stack(
                [diag_unimodular_flow(spec.params, ptv, s_flow) for ptv in pts], axis=0
            )
        vals = pot.value_many(moved)
        auto = max(auto, float(np.max(np.abs(vals - f_vals))))

    mesh = immerse(spec, n_param=64, n_mu=64, solution=sol)
    level_set = mesh.level_set_defect

    oracle = _oracle_defect(spec, sol)
    first_int = _first_integral_defect(spec, sol)

    passed = (
        ma_max <= tol["ma_closed"]
        and ma_fd_max <= tol["ma_fd"]
        and log_hom <= tol["log_homogeneity"]
        and auto <= tol["automorphism"]
        and level_set <= tol["level_set"]
        and oracle <= tol["oracle"]
        and first_int <= tol["first_integral"]
        and convexity_violations == 0
    )
    return VerifyReport(
        spec=spec,
        samples=n_samples,
        seed=seed,
        ma_max=ma_max,
        ma_mean=ma_mean,
        ma_fd_max=ma_fd_max,
        log_homogeneity=log_hom,
        automorphism=auto,
        level_set=level_set,
        oracle=oracle,
        first_integral=first_int,
        convexity_violations=convexity_violations,
        tolerances=tol,
        passed=passed,
    )

"""Canonical potentials and complete hyperbolic affine spheres for the
three-dimensional cones with at least two-dimensional automorphism group."""

from .cones import (
    CanonicalForm,
    ConeSpec,
    PowerParams,
    Region,
    canonicalize_generator,
    membership,
)
from .expcone import (
    ExpCurvePoint,
    exp_curve,
    exp_immersion,
    exp_phi_at,
    exp_potential,
)
from .potentials import (
    PhiJet,
    PotentialJet,
    XiState,
    XiTrajectory,
    convexity_check,
    first_integral_residual,
    integrate_xi,
    ma_residual,
    potential_jet,
    xi_rhs,
)
from .profiles import (
    BranchData,
    CanonicalPotential,
    PhiSolution,
    alpha_of_c,
    c0_curve,
    c_of_alpha,
    cubic_roots,
    elliptic_curve,
    extreme_curve_beta1,
    extreme_curve_betainf,
    phi_solution,
)
from .surfaces import (
    SurfaceMesh,
    VerifyReport,
    export_mesh,
    immerse,
    verify,
)

__version__ = "0.1.0"

__all__ = [
    "CanonicalForm",
    "ConeSpec",
    "PowerParams",
    "Region",
    "canonicalize_generator",
    "membership",
    "ExpCurvePoint",
    "exp_curve",
    "exp_immersion",
    "exp_phi_at",
    "exp_potential",
    "PhiJet",
    "PotentialJet",
    "XiState",
    "XiTrajectory",
    "convexity_check",
    "first_integral_residual",
    "integrate_xi",
    "ma_residual",
    "potential_jet",
    "xi_rhs",
    "BranchData",
    "CanonicalPotential",
    "PhiSolution",
    "alpha_of_c",
    "c0_curve",
    "c_of_alpha",
    "cubic_roots",
    "elliptic_curve",
    "extreme_curve_beta1",
    "extreme_curve_betainf",
    "phi_solution",
    "SurfaceMesh",
    "VerifyReport",
    "export_mesh",
    "immerse",
    "verify",
    "__version__",
]

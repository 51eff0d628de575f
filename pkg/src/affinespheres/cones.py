"""Cone families, generator canonicalization, and membership tests.

The five semi-homogeneous cone families are represented in the chart
coordinates (x, y, z) in which the interior is

    { -alpha * x^(1/p) y^(1/q) < z < beta * x^(1/p) y^(1/q),  x > 0, y > 0 }

with (alpha, beta) = (0, inf) for the orthant, (inf, 1), (alpha, 1) and
(0, 1) for the three power families.  The exponential cone lives in its own
chart.  The permutation relating the chart to the classification coordinates
(x1, x2, x3) is (x, y, z) = (x1, x3, x2); it is exposed as
``CHART_TO_CLASS`` so callers can print either convention.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import DegenerateSpectrum, DomainError, ScalarMatrix

__all__ = [
    "PowerParams",
    "ConeSpec",
    "CanonicalForm",
    "Region",
    "CHART_TO_CLASS",
    "canonicalize_generator",
    "membership",
]

# chart (x, y, z) = (x1, x3, x2); the permutation is its own inverse
CHART_TO_CLASS = np.array([0, 2, 1])


class Region(enum.Enum):
    INTERIOR = "interior"
    BOUNDARY = "boundary"
    OUTSIDE = "outside"


@dataclass(frozen=True)
class PowerParams:
    """Exponent pair (p, q) with 1/p + 1/q = 1; q is always derived from p."""

    p: float

    def __post_init__(self):
        if not (2.0 <= self.p < math.inf):
            raise DomainError(f"exponent p must lie in [2, inf), got {self.p}")

    @property
    def q(self) -> float:
        return self.p / (self.p - 1.0)

    @property
    def n(self) -> float:
        """p + q, which equals p*q."""
        return self.p + self.q

    @property
    def mu(self) -> float:
        """Diagonal-generator parameter, p = (2 - mu)/(1 - 2 mu)."""
        return (self.p - 2.0) / (2.0 * self.p - 1.0)


@dataclass(frozen=True)
class ConeSpec:
    """One of the five cone families, normalized to chart parameters."""

    kind: str  # "exp" | "orthant" | "family3" | "family4" | "family5"
    params: PowerParams | None = None
    alpha: float = 0.0

    def __post_init__(self):
        if self.kind not in {"exp", "orthant", "family3", "family4", "family5"}:
            raise DomainError(f"unknown cone kind {self.kind!r}")
        if self.kind == "exp":
            if self.params is not None:
                raise DomainError("exponential cone takes no exponent")
        elif self.params is None:
            raise DomainError(f"{self.kind} requires PowerParams")
        if self.kind == "family4" and not (0.0 < self.alpha <= 1.0):
            raise DomainError(f"family4 requires alpha in (0, 1], got {self.alpha}")

    # -- constructors ------------------------------------------------------
    @staticmethod
    def exponential() -> "ConeSpec":
        return ConeSpec("exp")

    @staticmethod
    def orthant(p: float = 2.0) -> "ConeSpec":
        return ConeSpec("orthant", PowerParams(p), alpha=0.0)

    @staticmethod
    def family3(p: float) -> "ConeSpec":
        return ConeSpec("family3", PowerParams(p), alpha=math.inf)

    @staticmethod
    def family4(p: float, alpha: float) -> "ConeSpec":
        return ConeSpec("family4", PowerParams(p), alpha=float(alpha))

    @staticmethod
    def family5(p: float) -> "ConeSpec":
        return ConeSpec("family5", PowerParams(p), alpha=0.0)

    @staticmethod
    def power(p: float, alpha: float) -> "ConeSpec":
        """Dispatch on the chart parameter: alpha=0 -> family5, inf -> family3."""
        if alpha == 0.0:
            return ConeSpec.family5(p)
        if math.isinf(alpha):
            return ConeSpec.family3(p)
        return ConeSpec.family4(p, alpha)

    # -- chart parameters --------------------------------------------------
    @property
    def chart_alpha(self) -> float:
        if self.kind == "family4":
            return self.alpha
        if self.kind == "family3":
            return math.inf
        return 0.0

    @property
    def chart_beta(self) -> float:
        return math.inf if self.kind in ("orthant", "exp") else 1.0

    @property
    def label(self) -> str:
        if self.kind == "exp":
            return "exp"
        if self.kind == "orthant":
            return "orthant"
        return f"{self.kind}(p={self.params.p:g}, alpha={self.chart_alpha:g})"

    def to_json(self) -> dict:
        d: dict = {"family": self.kind}
        if self.params is not None:
            d["p"] = self.params.p
        if self.kind in ("family3", "family4", "family5", "orthant"):
            d["alpha"] = self.chart_alpha
            d["beta"] = self.chart_beta
        return d


_CASE_NAMES = {
    1: "nilpotent3",
    2: "nilpotent2",
    3: "mixed_jordan",
    4: "diagonal",
    5: "rotational",
}


@dataclass(frozen=True)
class CanonicalForm:
    """Result of generator canonicalization.

    ``basis^-1 (scale*A + shift*I) basis`` reproduces ``canonical_matrix``.
    """

    case_index: int
    mu: float | None
    scale: float
    shift: float
    basis: np.ndarray
    residual: float = field(default=0.0)

    @property
    def case(self) -> str:
        return _CASE_NAMES[self.case_index]

    def canonical_matrix(self) -> np.ndarray:
        i = self.case_index
        if i == 1:
            return np.array([[0.0, 1, 0], [0, 0, 1], [0, 0, 0]])
        if i == 2:
            return np.array([[0.0, 1, 0], [0, 0, 0], [0, 0, 0]])
        if i == 3:
            return np.array([[1.0, 1, 0], [0, 1, 0], [0, 0, 0]])
        if i == 4:
            return np.diag([1.0, -self.mu, self.mu - 1.0])
        return np.array([[self.mu, 1.0, 0], [-1.0, self.mu, 0], [0, 0, 0.0]])

    def reconstruct(self, a: np.ndarray) -> np.ndarray:
        b = self.scale * np.asarray(a, dtype=float) + self.shift * np.eye(3)
        return np.linalg.solve(self.basis, b @ self.basis)


def _null_vectors(mat: np.ndarray, k: int) -> np.ndarray:
    """k right-singular vectors with smallest singular values (columns)."""
    _, _, vt = np.linalg.svd(mat)
    return vt[3 - k :].T


def _best_seed_vector(mat: np.ndarray) -> np.ndarray:
    """Basis vector maximizing |mat @ v| among e1, e2, e3."""
    norms = np.linalg.norm(mat, axis=0)
    return np.eye(3)[:, int(np.argmax(norms))]


def canonicalize_generator(a, rtol: float = 1e-8) -> CanonicalForm:
    """Reduce a 3x3 generator to its canonical form.

    Follows the normalization procedure: shift by a multiple of the identity,
    rescale, and conjugate to real Jordan form.  Raises ScalarMatrix when the
    input is a multiple of the identity and DegenerateSpectrum when the
    eigenvalue clustering flips between tolerance rtol and 10*rtol.
    """
    a = np.asarray(a, dtype=float)
    if a.shape != (3, 3) or not np.all(np.isfinite(a)):
        raise DomainError("generator must be a finite 3x3 matrix")
    anorm = max(1.0, float(np.max(np.abs(a))))
    tr = float(np.trace(a))
    if float(np.max(np.abs(a - (tr / 3.0) * np.eye(3)))) <= 1e-10 * anorm:
        raise ScalarMatrix("generator is numerically a multiple of the identity")

    m2 = (
        a[0, 0] * a[1, 1]
        - a[0, 1] * a[1, 0]
        + a[0, 0] * a[2, 2]
        - a[0, 2] * a[2, 0]
        + a[1, 1] * a[2, 2]
        - a[1, 2] * a[2, 1]
    )
    det = float(np.linalg.det(a))
    nreal, r0, r1, r2, cre, cim = kernels.cubic_roots_monic(-tr, float(m2), -det)

    eig_scale = max(abs(r0), abs(cre) + abs(cim), 1e-30)
    if nreal == 3:
        eig_scale = max(abs(r0), abs(r1), abs(r2), 1e-30)
    tol = rtol * eig_scale

    if nreal == 1:
        if cim <= tol:
            # fold the nearly-real pair back into the real case
            nreal, r0, r1, r2 = 3, r0, cre, cre
        elif cim <= 10.0 * tol:
            raise DegenerateSpectrum(
                f"complex pair with marginal imaginary part {cim:.3e}", gap=float(cim)
            )

    if nreal == 1:
        return _canonical_rotational(a, r0, cre, cim)

    roots = np.sort(np.array([r0, r1, r2]))[::-1]
    gaps = np.array([roots[0] - roots[1], roots[1] - roots[2]])
    close = gaps <= tol
    ambiguous = (gaps > tol) & (gaps <= 10.0 * tol)
    if np.any(ambiguous):
        raise DegenerateSpectrum(
            f"eigenvalue gap {float(gaps[ambiguous][0]):.3e} is ambiguous at "
            f"tolerance {tol:.3e}",
            gap=float(gaps[ambiguous][0]),
        )

    if close.all():
        return _canonical_nilpotent(a, tr / 3.0, rtol)
    if close.any():
        if close[0]:
            lam_d, lam_s = 0.5 * (roots[0] + roots[1]), roots[2]
        else:
            lam_d, lam_s = 0.5 * (roots[1] + roots[2]), roots[0]
        b = a - lam_d * np.eye(3)
        sv = np.linalg.svd(b, compute_uv=False)
        if sv[1] <= rtol * max(sv[0], eig_scale):
            return _canonical_diagonal(a, tr / 3.0, np.array([lam_d, lam_d, lam_s]))
        return _canonical_mixed(a, lam_d, lam_s)
    return _canonical_diagonal(a, tr / 3.0, roots)


def _with_residual(case_index, mu, scale, shift, basis, a) -> CanonicalForm:
    form = CanonicalForm(case_index, mu, scale, shift, basis)
    res = float(np.max(np.abs(form.reconstruct(a) - form.canonical_matrix())))
    return CanonicalForm(case_index, mu, scale, shift, basis, residual=res)


def _canonical_nilpotent(a, lam, rtol) -> CanonicalForm:
    n = a - lam * np.eye(3)
    scale = 1.0 / float(np.max(np.abs(n)))
    n1 = scale * n
    n2 = n1 @ n1
    if float(np.max(np.abs(n2))) > rtol:
        v = _best_seed_vector(n2)
        basis = np.column_stack([n2 @ v, n1 @ v, v])
        return _with_residual(1, None, scale, -lam * scale, basis, a)
    v = _best_seed_vector(n1)
    b1 = n1 @ v
    nullvecs = _null_vectors(n1, 2)
    # pick the kernel vector least aligned with b1
    b1u = b1 / np.linalg.norm(b1)
    resid = nullvecs - np.outer(b1u, b1u @ nullvecs)
    b3 = nullvecs[:, int(np.argmax(np.linalg.norm(resid, axis=0)))]
    b3 = b3 - (b1u @ b3) * b1u
    basis = np.column_stack([b1, v, b3])
    return _with_residual(2, None, scale, -lam * scale, basis, a)


def _canonical_mixed(a, lam_d, lam_s) -> CanonicalForm:
    scale = 1.0 / (lam_d - lam_s)
    c = scale * (a - lam_s * np.eye(3))
    d = c - np.eye(3)
    d2 = d @ d
    gen = _null_vectors(d2, 2)
    v = gen[:, int(np.argmax(np.linalg.norm(d @ gen, axis=0)))]
    b1 = d @ v
    b3 = _null_vectors(c, 1)[:, 0]
    basis = np.column_stack([b1, v, b3])
    return _with_residual(3, None, scale, -lam_s * scale, basis, a)


def _canonical_diagonal(a, t0, roots) -> CanonicalForm:
    nu = np.sort(np.asarray(roots) - t0)[::-1]
    idx = int(np.argmax(np.abs(nu)))
    scale = 1.0 / nu[idx]
    scaled = np.sort(scale * nu)[::-1]
    mu = min(max(-scaled[1], 0.0), 0.5)
    # eigenvectors ordered by descending scaled eigenvalue
    lams = scaled / scale + t0
    cols = []
    if abs(lams[1] - lams[2]) <= 1e-12 * max(1.0, abs(lams[1])):
        pair = _null_vectors(a - lams[1] * np.eye(3), 2)
        cols = [_null_vectors(a - lams[0] * np.eye(3), 1)[:, 0], pair[:, 0], pair[:, 1]]
    elif abs(lams[0] - lams[1]) <= 1e-12 * max(1.0, abs(lams[0])):
        pair = _null_vectors(a - lams[0] * np.eye(3), 2)
        cols = [pair[:, 0], pair[:, 1], _null_vectors(a - lams[2] * np.eye(3), 1)[:, 0]]
    else:
        cols = [_null_vectors(a - lam * np.eye(3), 1)[:, 0] for lam in lams]
    basis = np.column_stack(cols)
    return _with_residual(4, mu, scale, -t0 * scale, basis, a)


def _canonical_rotational(a, lam_r, cre, cim) -> CanonicalForm:
    ar = cre - lam_r
    scale = 1.0 / cim if ar >= 0.0 else -1.0 / cim
    mu = abs(ar) / cim
    c = scale * (a - lam_r * np.eye(3))
    vals, vecs = np.linalg.eig(c)
    k = int(np.argmin(np.abs(vals - (mu + 1j))))
    w = vecs[:, k]
    b3 = _null_vectors(c, 1)[:, 0]
    basis = np.column_stack([w.real, w.imag, b3])
    return _with_residual(5, mu, scale, -lam_r * scale, basis, a)


# ---------------------------------------------------------------------------
# membership
# ---------------------------------------------------------------------------


def membership(spec: ConeSpec, point, rtol: float = 1e-12) -> Region:
    """Classify a point against the open cone, its boundary, and exterior.

    The tolerance is absolute on the degree-1 defining inequalities, scaled
    by max(|x|, |y|, |z|), so the classification is positively homogeneous.
    """
    pt = np.asarray(point, dtype=float)
    if pt.shape != (3,) or not np.all(np.isfinite(pt)):
        raise DomainError("point must be a finite 3-vector")
    x, y, z = float(pt[0]), float(pt[1]), float(pt[2])
    scale = max(abs(x), abs(y), abs(z))
    if scale == 0.0:
        return Region.BOUNDARY  # the vertex
    tol = rtol * scale

    if spec.kind == "exp":
        return _membership_exp(x, y, z, tol)

    p = spec.params.p
    q = spec.params.q
    if x < -tol or y < -tol:
        return Region.OUTSIDE
    on_face = x <= tol or y <= tol
    if on_face:
        # closure meets {x = 0} or {y = 0} only where the z-constraints allow
        if spec.kind == "orthant":
            return Region.BOUNDARY if z >= -tol else Region.OUTSIDE
        if spec.kind == "family3":
            return Region.BOUNDARY if z <= tol else Region.OUTSIDE
        if spec.kind == "family5":
            return Region.BOUNDARY if abs(z) <= tol else Region.OUTSIDE
        return Region.BOUNDARY if abs(z) <= tol else Region.OUTSIDE  # family4
    bound = x ** (1.0 / p) * y ** (1.0 / q)
    upper = bound - z if spec.kind != "orthant" else math.inf  # beta = 1 or inf
    if spec.kind == "orthant":
        lower = z
    elif spec.kind == "family3":
        lower = math.inf
    elif spec.kind == "family5":
        lower = z
    else:  # family4
        lower = z + spec.alpha * bound
    if upper > tol and lower > tol:
        return Region.INTERIOR
    if upper >= -tol and lower >= -tol:
        return Region.BOUNDARY
    return Region.OUTSIDE


def _membership_exp(x, y, z, tol) -> Region:
    if z < -tol:
        return Region.OUTSIDE
    if abs(z) <= tol:
        # degenerate face {x <= 0, y >= 0, z = 0}
        if x <= tol and y >= -tol:
            return Region.BOUNDARY
        return Region.OUTSIDE
    if y <= tol:
        return Region.OUTSIDE
    g = z * (math.log(y) - math.log(z)) - x
    if g > tol:
        return Region.INTERIOR
    if g >= -tol:
        return Region.BOUNDARY
    return Region.OUTSIDE

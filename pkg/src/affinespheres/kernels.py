"""Numba-accelerated scalar kernels (quadrature, root finding, curve formulas).

Every function here is ``@njit``-compiled when numba is available and runs as
plain Python otherwise (see :mod:`affinespheres._jit`).  Kernels avoid Python
objects: dispatch between integrands/curves goes through integer function ids
plus a flat float64 parameter vector.

Integrand ids (adaptive quadrature):
    1  G(u)                      direct integrand of the branch time map
    2  rho(-s + e^w)             pole-regularised form, right of the pole
    3  rho(-s - e^w)             pole-regularised form, left of the pole
    4  G(1/v)/v^2                right tail substitution
    5  G(-1/v)/v^2               left tail substitution
    6  (rho(z-s) - rho(-z-s))/z  paired integrand for the branch-offset constant
    7  paired integrand tail     substitution z -> 1/v

Curve ids (monotone inversion), all monotone in x:
    11 exponential-cone time map t(e^x)
    12 log t(sinh x) of the symmetric (c = 0) curve, x > 0
    13 log t(e^x) of the extreme curve with bounded domain
    14 log t(e^x) of the extreme curve with unbounded domain, e^x in (0,1)
    15 log(-t(e^x)) of the same curve, e^x in (1,oo)

Parameter vector for ids 1-7: [p, q, c, xi1, xi2, xi3, s];
for ids 11-15: [p, q] (unused for 11).
"""

from __future__ import annotations

import math

import numpy as np

from ._jit import njit

# 21-point Kronrod nodes (nonnegative half), embedded 10-point Gauss weights.
# Values as used by QUADPACK's dqk21.
_XGK = np.array(
    [
        0.995657163025808080735527280689003,
        0.973906528517171720077964012084452,
        0.930157491355708226001207180059508,
        0.865063366688984510732096688423493,
        0.780817726586416897063717578345042,
        0.679409568299024406234327365114874,
        0.562757134668604683339000099272694,
        0.433395394129247190799265943165784,
        0.294392862701460198131126603103866,
        0.148874338981631210884826001129720,
        0.0,
    ]
)
_WGK = np.array(
    [
        0.011694638867371874278064396062192,
        0.032558162307964727478818972459390,
        0.054755896574351996031381300244580,
        0.075039674810919952767043140916190,
        0.093125454583697605535065465083366,
        0.109387158802297641899210590325805,
        0.123491976262065851077958109831074,
        0.134709217311473325928054001771707,
        0.142775938577060080797094273138717,
        0.147739104901338491374841515972068,
        0.149445554002916905664936468389821,
    ]
)
_WG = np.array(
    [
        0.066671344308688137593568809893332,
        0.149451349150580593145776339657697,
        0.219086362515982043995534934228163,
        0.269266719309996355091226921569469,
        0.295524224714752870173892994651338,
    ]
)

_EPS = 2.220446049250313e-16


# ---------------------------------------------------------------------------
# cubic solver (trigonometric form)
# ---------------------------------------------------------------------------


@njit
def _cbrt(x):
    if x >= 0.0:
        return x ** (1.0 / 3.0)
    return -((-x) ** (1.0 / 3.0))


@njit
def cubic_roots_monic(b, c, d):
    """Real roots of x^3 + b x^2 + c x + d.

    Returns (n_real, r0, r1, r2, cre, cim).  With n_real == 3 the roots are
    sorted descending in r0, r1, r2.  With n_real == 1 the real root is r0
    and the complex pair is cre +- i*cim (cim > 0); r1, r2 are NaN.
    """
    p = c - b * b / 3.0
    q = d - b * c / 3.0 + 2.0 * b * b * b / 27.0
    shift = -b / 3.0

    scale = abs(b) + abs(c) ** 0.5 + abs(d) ** (1.0 / 3.0)
    if abs(p) <= 1e-14 * scale * scale and abs(q) <= 1e-14 * scale * scale * scale:
        r = shift - _cbrt(q)
        return 3, r, r, r, 0.0, 0.0

    disc = (p / 3.0) ** 3 + (q / 2.0) ** 2
    if disc > 0.0:
        sq = math.sqrt(disc)
        y = _cbrt(-q / 2.0 + sq) + _cbrt(-q / 2.0 - sq)
        r = y + shift
        # deflate: x^2 + beta x + gamma
        beta = b + r
        gamma = c + r * beta
        disc2 = beta * beta - 4.0 * gamma
        if disc2 < 0.0:
            return 1, r, np.nan, np.nan, -beta / 2.0, math.sqrt(-disc2) / 2.0
        sq2 = math.sqrt(disc2)
        ra = (-beta + sq2) / 2.0
        rb = (-beta - sq2) / 2.0
        hi = r
        mid = ra
        lo = rb
        # sort three values descending
        if mid > hi:
            hi, mid = mid, hi
        if lo > mid:
            mid, lo = lo, mid
        if mid > hi:
            hi, mid = mid, hi
        return 3, hi, mid, lo, 0.0, 0.0

    # three real roots, trigonometric form (p < 0 here)
    mcoef = 2.0 * math.sqrt(-p / 3.0)
    arg = 3.0 * q / (p * mcoef)
    if arg > 1.0:
        arg = 1.0
    elif arg < -1.0:
        arg = -1.0
    theta = math.acos(arg) / 3.0
    two_pi_3 = 2.0 * math.pi / 3.0
    r0 = mcoef * math.cos(theta) + shift
    r1 = mcoef * math.cos(theta - two_pi_3) + shift
    r2 = mcoef * math.cos(theta - 2.0 * two_pi_3) + shift
    hi, mid, lo = r0, r1, r2
    if mid > hi:
        hi, mid = mid, hi
    if lo > mid:
        mid, lo = lo, mid
    if mid > hi:
        hi, mid = mid, hi
    return 3, hi, mid, lo, 0.0, 0.0


# ---------------------------------------------------------------------------
# elliptic-branch building blocks
# ---------------------------------------------------------------------------


@njit
def _ell_w_of(pars, u):
    # W(u) = sqrt((p+q) (u^2 + xi1 - xi2) (u^2 + xi1 - xi3)) > 0
    n = pars[0] + pars[1]
    a = pars[3] - pars[4]
    bb = pars[3] - pars[5]
    u2 = u * u
    return math.sqrt(n * (u2 + a) * (u2 + bb))


@njit
def _ell_g(pars, u):
    # G(u) = 2 n (3(u^2+xi1) + 2(n-1)) / (W (2 u W - c)); pole at u = -s only
    n = pars[0] + pars[1]
    c = pars[2]
    xi1 = pars[3]
    w = _ell_w_of(pars, u)
    nl = 3.0 * (u * u + xi1) + 2.0 * (n - 1.0)
    return 2.0 * n * nl / (w * (2.0 * u * w - c))


@njit
def _ell_rho(pars, u):
    # rho(u) = (u + s) G(u), analytic on the whole line, rho(-s) = 1.
    # Direct product is used away from the pole; a cancellation-free form
    # based on the factored difference E(u) - E(-s) is used for u <= -s/2.
    n = pars[0] + pars[1]
    c = pars[2]
    xi1 = pars[3]
    s = pars[6]
    a = pars[3] - pars[4]
    bb = pars[3] - pars[5]
    w = _ell_w_of(pars, u)
    nl = 3.0 * (u * u + xi1) + 2.0 * (n - 1.0)
    if u > -0.5 * s:
        return (u + s) * 2.0 * n * nl / (w * (2.0 * u * w - c))
    # E(u) = u W(u); (E(u) - E(-s))/(u+s) = (u-s) T(u^2) / (E(u) - s Ws)
    ws = -c / (2.0 * s)
    v = u * u
    v0 = s * s
    t_poly = n * (v * v + v * v0 + v0 * v0 + (a + bb) * (v + v0) + a * bb)
    e_u = u * w
    denom_r = e_u - s * ws
    dr = 2.0 * (u - s) * t_poly / denom_r
    return 2.0 * n * nl / (w * dr)


# ---------------------------------------------------------------------------
# closed-form curves
# ---------------------------------------------------------------------------


@njit
def exp_t_of_kappa(k):
    # t = (log(1+k) + 2k)/2
    return k + 0.5 * math.log1p(k)


@njit
def exp_phi_of_kappa(k):
    # phi = (log(1+k) - 3 log k)/2
    return 0.5 * (math.log1p(k) - 3.0 * math.log(k))


@njit
def c0_logt_of_z(p, q, z):
    # log t for the symmetric curve, z > 0; exact cancellation of log z terms
    z2 = z * z
    if z2 == 0.0:
        return -math.inf
    return -0.5 / p * math.log1p((p + 1.0) / z2) - 0.5 / q * math.log1p((q + 1.0) / z2)


@njit
def c0_phi_of_z(p, q, z):
    z2 = z * z
    return (
        -0.5 * math.log(p + q)
        + (p + 1.0) / (2.0 * p) * math.log(z2 + p + 1.0)
        + (q + 1.0) / (2.0 * q) * math.log(z2 + q + 1.0)
    )


@njit
def beta1_logt_of_xi(p, q, xi):
    n = p + q
    m = n - 1.0
    r = math.sqrt(xi + m)
    sm = math.sqrt(m)
    return (
        math.log(r + math.sqrt(n))
        + sm / math.sqrt(n) * (math.log(xi) - 2.0 * math.log(r + sm))
        + (math.log(r + math.sqrt(q - 1.0)) - math.log(xi + p)) / p
        + (math.log(r + math.sqrt(p - 1.0)) - math.log(xi + q)) / q
    )


@njit
def beta1_phi_of_xi(p, q, xi):
    n = p + q
    r = math.sqrt(xi + n - 1.0)
    return math.log1p(xi * r / math.sqrt(n)) - beta1_logt_of_xi(p, q, xi)


@njit
def binf_logg_of_xi(p, q, xi):
    # t = (1 - xi) g(xi); g > 0 and analytic on (0, oo).
    # log(r - sqrt(m)) is evaluated as log(xi) - log(r + sqrt(m)).
    n = p + q
    m = n - 1.0
    r = math.sqrt(xi + m)
    sm = math.sqrt(m)
    return (
        -math.log(r + math.sqrt(n))
        + sm / math.sqrt(n) * (2.0 * math.log(r + sm) - math.log(xi))
        - math.log(r + math.sqrt(q - 1.0)) / p
        - math.log(r + math.sqrt(p - 1.0)) / q
    )


@njit
def binf_phi_of_xi(p, q, xi):
    # pole-free form: phi = log((1 + xi + xi^2/n)/(1 + xi r / sqrt(n))) - log g
    n = p + q
    r = math.sqrt(xi + n - 1.0)
    num = 1.0 + xi + xi * xi / n
    den = 1.0 + xi * r / math.sqrt(n)
    return math.log(num / den) - binf_logg_of_xi(p, q, xi)


# ---------------------------------------------------------------------------
# integrand / curve dispatch
# ---------------------------------------------------------------------------


@njit
def _feval(fid, pars, x):
    if fid == 1:
        return _ell_g(pars, x)
    elif fid == 2:
        return _ell_rho(pars, -pars[6] + math.exp(x))
    elif fid == 3:
        return _ell_rho(pars, -pars[6] - math.exp(x))
    elif fid == 4:
        inv = 1.0 / x
        return _ell_g(pars, inv) * inv * inv
    elif fid == 5:
        inv = 1.0 / x
        return _ell_g(pars, -inv) * inv * inv
    elif fid == 6:
        s = pars[6]
        return (_ell_rho(pars, x - s) - _ell_rho(pars, -x - s)) / x
    elif fid == 7:
        s = pars[6]
        inv = 1.0 / x
        return (_ell_g(pars, inv - s) + _ell_g(pars, -inv - s)) * inv * inv
    return np.nan


@njit
def curve_eval(fid, pars, x):
    if fid == 11:
        return exp_t_of_kappa(math.exp(x))
    elif fid == 12:
        return c0_logt_of_z(pars[0], pars[1], math.sinh(x))
    elif fid == 13:
        return beta1_logt_of_xi(pars[0], pars[1], math.exp(x))
    elif fid == 14:
        xi = math.exp(x)
        return math.log1p(-xi) + binf_logg_of_xi(pars[0], pars[1], xi)
    elif fid == 15:
        xi = math.exp(x)
        return math.log(xi - 1.0) + binf_logg_of_xi(pars[0], pars[1], xi)
    return np.nan


# ---------------------------------------------------------------------------
# adaptive Gauss-Kronrod quadrature
# ---------------------------------------------------------------------------


@njit
def gk21_panel(fid, pars, a, b):
    """Single 21-point Kronrod panel on [a, b]: (value, error estimate)."""
    center = 0.5 * (a + b)
    hlgth = 0.5 * (b - a)
    fc = _feval(fid, pars, center)
    resg = 0.0
    resk = _WGK[10] * fc
    resabs = abs(resk)
    for j in range(5):
        jtw = 2 * j + 1
        absc = hlgth * _XGK[jtw]
        f1 = _feval(fid, pars, center - absc)
        f2 = _feval(fid, pars, center + absc)
        fsum = f1 + f2
        resg += _WG[j] * fsum
        resk += _WGK[jtw] * fsum
        resabs += _WGK[jtw] * (abs(f1) + abs(f2))
    for j in range(5):
        jtwm1 = 2 * j
        absc = hlgth * _XGK[jtwm1]
        f1 = _feval(fid, pars, center - absc)
        f2 = _feval(fid, pars, center + absc)
        fsum = f1 + f2
        resk += _WGK[jtwm1] * fsum
        resabs += _WGK[jtwm1] * (abs(f1) + abs(f2))
    reskh = resk * 0.5
    resasc = _WGK[10] * abs(fc - reskh)
    for j in range(10):
        absc = hlgth * _XGK[j]
        f1 = _feval(fid, pars, center - absc)
        f2 = _feval(fid, pars, center + absc)
        resasc += _WGK[j] * (abs(f1 - reskh) + abs(f2 - reskh))
    result = resk * hlgth
    resabs *= abs(hlgth)
    resasc *= abs(hlgth)
    abserr = abs((resk - resg) * hlgth)
    if resasc != 0.0 and abserr != 0.0:
        scaled = (200.0 * abserr / resasc) ** 1.5
        if scaled < 1.0:
            abserr = resasc * scaled
    floor = 50.0 * _EPS * resabs
    if abserr < floor:
        abserr = floor
    return result, abserr


@njit
def gk_adaptive(fid, pars, a, b, rtol, atol, max_panels):
    """Globally adaptive bisection on top of gk21_panel.

    Returns (value, error_estimate, status); status 0 means the tolerance
    was met, 1 means the panel budget was exhausted.
    """
    lo = np.empty(max_panels)
    hi = np.empty(max_panels)
    val = np.empty(max_panels)
    err = np.empty(max_panels)
    splittable = np.empty(max_panels, dtype=np.uint8)

    v, e = gk21_panel(fid, pars, a, b)
    lo[0] = a
    hi[0] = b
    val[0] = v
    err[0] = e
    splittable[0] = 1
    n = 1

    while True:
        total = 0.0
        errsum = 0.0
        worst = -1
        worst_err = -1.0
        for i in range(n):
            total += val[i]
            errsum += err[i]
            if splittable[i] == 1 and err[i] > worst_err:
                worst_err = err[i]
                worst = i
        if errsum <= max(atol, rtol * abs(total)):
            return total, errsum, 0
        if worst < 0 or n >= max_panels:
            return total, errsum, 1
        a_i = lo[worst]
        b_i = hi[worst]
        mid = 0.5 * (a_i + b_i)
        if mid - a_i <= 4.0 * _EPS * max(abs(a_i), abs(b_i)):
            splittable[worst] = 0
            continue
        v1, e1 = gk21_panel(fid, pars, a_i, mid)
        v2, e2 = gk21_panel(fid, pars, mid, b_i)
        hi[worst] = mid
        val[worst] = v1
        err[worst] = e1
        lo[n] = mid
        hi[n] = b_i
        val[n] = v2
        err[n] = e2
        splittable[n] = 1
        n += 1


# ---------------------------------------------------------------------------
# monotone inversion (bracketed secant/bisection hybrid)
# ---------------------------------------------------------------------------


@njit
def _bracketed_root(fid, pars, target, sgn, xa, xb, fa, fb, max_iter):
    # fa, fb are sgn*(curve - target) with fa <= 0 <= fb assumed
    x0, x1 = xa, xb
    f0, f1 = fa, fb
    best = x0 if abs(f0) < abs(f1) else x1
    for _ in range(max_iter):
        if f0 == 0.0:
            return x0
        if f1 == 0.0:
            return x1
        # secant step, safeguarded by bisection
        denom = f1 - f0
        if denom != 0.0:
            xs = x1 - f1 * (x1 - x0) / denom
        else:
            xs = 0.5 * (x0 + x1)
        xm = 0.5 * (x0 + x1)
        if xs <= min(x0, x1) or xs >= max(x0, x1) or not math.isfinite(xs):
            xs = xm
        width = abs(x1 - x0)
        if width <= 4.0 * _EPS * (1.0 + abs(xm)):
            return xm
        fs = sgn * (curve_eval(fid, pars, xs) - target)
        if abs(fs) < 1e300:
            best = xs
        if fs < 0.0:
            x0, f0 = xs, fs
        elif fs > 0.0:
            x1, f1 = xs, fs
        else:
            return xs
        # force occasional bisection to guarantee progress
        if abs(x1 - x0) > 0.5 * width:
            xm = 0.5 * (x0 + x1)
            fm = sgn * (curve_eval(fid, pars, xm) - target)
            if fm < 0.0:
                x0, f0 = xm, fm
            else:
                x1, f1 = xm, fm
    return best


@njit
def invert_monotone(fid, pars, target, x_guess, half_width, increasing):
    """Solve curve_eval(fid, pars, x) = target for x.

    Expands a bracket around x_guess geometrically, then runs a safeguarded
    secant iteration.  Returns (x, status); status 0 ok, 1 bracket failure.
    """
    sgn = 1.0 if increasing else -1.0
    h = half_width if half_width > 0.0 else 0.5
    xa = x_guess - h
    xb = x_guess + h
    fa = sgn * (curve_eval(fid, pars, xa) - target)
    fb = sgn * (curve_eval(fid, pars, xb) - target)
    grow = 0
    while fa > 0.0 and grow < 300:
        xb = xa
        fb = fa
        h *= 2.0
        xa -= h
        if xa < -745.0:
            xa = -745.0
        fa = sgn * (curve_eval(fid, pars, xa) - target)
        if xa == -745.0 and fa > 0.0:
            return xa, 1
        grow += 1
    while fb < 0.0 and grow < 300:
        xa = xb
        fa = fb
        h *= 2.0
        xb += h
        if xb > 700.0:
            xb = 700.0
        fb = sgn * (curve_eval(fid, pars, xb) - target)
        if xb == 700.0 and fb < 0.0:
            return xb, 1
        grow += 1
    if fa > 0.0 or fb < 0.0:
        return 0.5 * (xa + xb), 1
    return _bracketed_root(fid, pars, target, sgn, xa, xb, fa, fb, 160), 0


@njit
def invert_monotone_many(fid, pars, targets, guesses, half_width, increasing):
    out = np.empty(targets.shape[0])
    status = 0
    for i in range(targets.shape[0]):
        x, st = invert_monotone(fid, pars, targets[i], guesses[i], half_width, increasing)
        out[i] = x
        if st != 0:
            status = st
    return out, status


# ---------------------------------------------------------------------------
# cumulative tables on a uniform grid (elliptic branch time map)
# ---------------------------------------------------------------------------


@njit
def cum_panels(fid, pars, wlo, dw, n_nodes):
    """Per-interval GK21 integrals between consecutive uniform nodes.

    Returns (panels, errsum) with panels[i] = integral over [w_i, w_{i+1}].
    """
    panels = np.empty(n_nodes - 1)
    errsum = 0.0
    for i in range(n_nodes - 1):
        a = wlo + dw * i
        b = a + dw
        v, e = gk21_panel(fid, pars, a, b)
        panels[i] = v
        errsum += e
    return panels, errsum


@njit
def table_value(fid, pars, wlo, dw, prefix, w):
    """log|t| at coordinate w given node values prefix[j] = log|t|(w_j).

    Below the table the integrand is 1 to machine precision, so the value
    extends linearly; above the table the last node is returned.
    """
    n = prefix.shape[0]
    if w <= wlo:
        return prefix[0] + (w - wlo)
    j = int((w - wlo) / dw)
    if j >= n - 1:
        j = n - 1
        wj = wlo + dw * j
        v, _ = gk21_panel(fid, pars, wj, w)
        return prefix[j] + v
    wj = wlo + dw * j
    v, _ = gk21_panel(fid, pars, wj, w)
    return prefix[j] + v


@njit
def table_invert(fid, pars, wlo, dw, prefix, target):
    """Solve table_value(w) = target for w (prefix strictly increasing)."""
    n = prefix.shape[0]
    if target <= prefix[0]:
        return wlo + (target - prefix[0])
    if target >= prefix[n - 1]:
        return wlo + dw * (n - 1)
    # binary search for the bracketing cell
    lo = 0
    hi = n - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if prefix[mid] <= target:
            lo = mid
        else:
            hi = mid
    wa = wlo + dw * lo
    wb = wa + dw
    w = wa + dw * (target - prefix[lo]) / (prefix[hi] - prefix[lo])
    for _ in range(60):
        f = table_value(fid, pars, wlo, dw, prefix, w) - target
        if f > 0.0:
            wb = w
        elif f < 0.0:
            wa = w
        else:
            return w
        deriv = _feval(fid, pars, w)
        step_ok = False
        if deriv > 0.0:
            wn = w - f / deriv
            if wa < wn < wb:
                step_ok = True
                w_new = wn
        if not step_ok:
            w_new = 0.5 * (wa + wb)
        if abs(w_new - w) <= 2.0 * _EPS * (1.0 + abs(w)):
            return w_new
        w = w_new
    return w


@njit
def table_invert_many(fid, pars, wlo, dw, prefix, targets):
    out = np.empty(targets.shape[0])
    for i in range(targets.shape[0]):
        out[i] = table_invert(fid, pars, wlo, dw, prefix, targets[i])
    return out

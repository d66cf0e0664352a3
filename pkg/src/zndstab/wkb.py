"""WKB exponents, the leading approximate solution, beta integrals and the
reflection coefficient alpha."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import roots_jacobi

from .contour import Contour, flow_on_nodes, loop_contour, real_segment
from .frame import (
    FrameError,
    TurningPoint,
    continue_sqrt,
    e11,
    e22,
    eigenvalues,
    find_turning_points,
    s_principal,
    t_matrix,
)
from .profile import Profile


class UnsupportedFrequencyError(ValueError):
    """zeta in the exceptional set or outside the supported regimes."""


@dataclass(frozen=True)
class BetaTriple:
    beta1: float
    beta2: float
    beta3: float
    x_star_used: float


def alpha_turning_point(zeta_i: float, profile: Profile) -> TurningPoint:
    """Turning point encircled by the reflection contour.

    Cases I and M with an increasing turning point: the unique (or the left,
    x_2*) turning point, which must have d > 0.
    """
    tps = find_turning_points(zeta_i, profile)
    if not tps:
        raise UnsupportedFrequencyError(f"zeta_i={zeta_i} has no turning point")
    _check_not_exceptional(zeta_i, profile)
    tp = tps[-1]
    if tp.d <= 0:
        raise UnsupportedFrequencyError("leftmost turning point is decreasing: no reflection")
    return tp


def _check_not_exceptional(zeta_i, profile, rtol=1e-9):
    from .frame import exceptional_values

    for ze in exceptional_values(profile):
        if abs(zeta_i - ze) <= rtol * max(1.0, ze):
            raise UnsupportedFrequencyError(f"zeta_i={zeta_i} is exceptional")


def _beta_integrands(x, zeta_i, profile):
    fp = profile.flow(x)
    ms = np.sqrt(np.maximum(zeta_i**2 - fp.c0sq_eta, 0.0))
    eta, kap, u, v = fp.eta, fp.kappa, fp.u, fp.v
    sr = fp.sigma * fp.r
    bracket = (fp.deta / (1.0 - eta) - v * fp.p_S * sr / (fp.T * u)
               + 2.0 * u * sr / ((1.0 - eta) * (u**2 + zeta_i**2))
               - v * fp.sigma * fp.r_v / u)
    # returned as (|s| f1, f2 / (1/|s|), f3 / (1/|s|)) pieces
    return ms, 2 * kap / (eta * u), zeta_i * kap / eta * bracket, zeta_i * 2 * kap / (eta * u)


def beta_bracket(x, zeta_i, profile):
    """Four-term bracket shared by beta_2 and the case-M K criterion."""
    fp = profile.flow(np.asarray(x, dtype=float))
    eta, u, v = fp.eta, fp.u, fp.v
    sr = fp.sigma * fp.r
    return (fp.deta / (1.0 - eta) - v * fp.p_S * sr / (fp.T * u)
            + 2.0 * u * sr / ((1.0 - eta) * (u**2 + zeta_i**2))
            - v * fp.sigma * fp.r_v / u)


def beta_integrals(zeta_i: float, nu=0.0, profile: Profile | None = None,
                   x_star: float | None = None, n_panels: int = 24, order: int = 24) -> BetaTriple:
    """beta_1..3 by the substitution x = x* - t^2 and Gauss-Legendre panels in t.

    After the substitution the integrands are smooth on [0, sqrt(x*)]; the
    1/|s| factor turns into 2t/|s|, which tends to 2/sqrt(d) at t = 0.
    """
    if profile is None:
        raise TypeError("profile is required")
    xs = alpha_turning_point(zeta_i, profile).x_star if x_star is None else x_star
    tmax = np.sqrt(xs)
    xg, wg = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(0.0, tmax, n_panels + 1)
    half = 0.5 * np.diff(edges)
    t = (half[:, None] * xg + 0.5 * (edges[1:] + edges[:-1])[:, None]).ravel()
    w = (half[:, None] * wg).ravel()
    x = xs - t * t
    ms, a1, a2, a3 = _beta_integrands(x, zeta_i, profile)
    jac = 2.0 * t
    b1 = np.sum(w * ms * a1 * jac)
    ratio = jac / ms
    b2 = np.sum(w * a2 * ratio)
    b3 = np.sum(w * a3 * ratio)
    return BetaTriple(float(b1), float(b2), float(b3), float(xs))


def beta1_gauss_jacobi(zeta_i: float, profile: Profile, n: int = 80,
                       x_star: float | None = None) -> float:
    """beta_1 with weight (x* - x)^{1/2} absorbed into Gauss-Jacobi nodes."""
    xs = alpha_turning_point(zeta_i, profile).x_star if x_star is None else x_star
    xi, w = roots_jacobi(n, 0.5, 0.0)
    x = 0.5 * xs * (1.0 + xi)
    ms, a1, _, _ = _beta_integrands(x, zeta_i, profile)
    g = ms * a1 / np.sqrt(1.0 - xi)
    return float(0.5 * xs * np.sum(w * g))


def beta_exponent(eps, zeta_i, nu, bt: BetaTriple):
    return 0.5j * np.pi - 1j * eps * bt.beta1 + bt.beta2 - nu * bt.beta3


def alpha_reflection(eps, zeta_i, nu, profile: Profile, bt: BetaTriple | None = None):
    bt = bt or beta_integrals(zeta_i, nu, profile)
    return np.exp(beta_exponent(eps, zeta_i, nu, bt))


# --------------------------------------------------------------------------
# contours and exponents


def default_delta(profile: Profile, x_star: float | None = None) -> float:
    """Excision scale delta: 0.02 X_max, capped so that 3 delta stays inside (0, x*)."""
    d = 0.02 * profile.X_max
    if x_star is not None:
        d = min(d, x_star / 6.0)
    return float(d)


def _turning_points_between(zeta, profile: Profile, a: float, b: float):
    zeta = complex(zeta)
    if zeta.real != 0.0 or zeta.imag <= 0.0:
        return []
    return [tp for tp in find_turning_points(zeta.imag, profile) if a < tp.x_star < b]


def default_contour(x_end: float, zeta, profile: Profile, radius: float | None = None) -> Contour:
    """Real axis from 0 to x_end with semicircular excursions around turning
    points: upper half plane where d > 0, lower where d < 0."""
    from .contour import Arc, Line

    tps = sorted(_turning_points_between(zeta, profile, 0.0, x_end), key=lambda t: t.x_star)
    if not tps:
        return real_segment(0.0, x_end)
    pieces, x0 = [], 0.0
    for k, tp in enumerate(tps):
        r = radius if radius is not None else default_delta(profile, tps[0].x_star)
        gap_r = (tps[k + 1].x_star if k + 1 < len(tps) else x_end) - tp.x_star
        gap_l = tp.x_star - x0
        if r >= min(gap_l, gap_r):
            raise FrameError("detour radius collides with a neighbouring point")
        lo, hi = tp.x_star - r, tp.x_star + r
        th0 = np.pi if tp.d > 0 else -np.pi
        pieces += [Line(complex(x0), complex(lo)), Arc(complex(tp.x_star), r, th0, 0.0)]
        x0 = hi
    pieces.append(Line(complex(x0), complex(x_end)))
    return Contour(tuple(p for p in pieces if p.length > 0))


@dataclass(frozen=True)
class WkbExponent:
    h: complex
    k: complex | None
    contour_used: Contour
    s_end: complex | None = None


def _contour_data(contour: Contour, zeta, profile: Profile, order=16, panel_len=0.05):
    nodes = contour.nodes(order=order, panel_len=panel_len)
    fp, _, _ = flow_on_nodes(profile, contour, nodes)
    rad = complex(zeta) ** 2 + fp.c0sq_eta
    z0 = contour.start
    f0 = profile.flow(np.float64(z0.real))
    s0 = complex(s_principal(zeta, f0.c0sq_eta))
    # continue from the start point through the ordered nodes
    vals, _ = continue_sqrt(np.concatenate([[s0 * s0], rad]), s0)
    return nodes, fp, vals[1:]


def wkb_exponent(i: int, x: float, zeta, nu, profile: Profile,
                 contour: Contour | None = None) -> WkbExponent:
    """h_i = int_0^x mu_i and k_i = int_{0,C} E_ii along a contour."""
    zeta = complex(zeta)
    if i not in (1, 2, 3, 4, 5):
        raise ValueError("mode index must be 1..5")
    contour = contour if contour is not None else default_contour(float(x), zeta, profile)
    if contour.length == 0:
        return WkbExponent(0j, 0j if i in (1, 2) else None, contour, None)
    nodes, fp, s = _contour_data(contour, zeta, profile)
    mu1, mu2, mu3 = eigenvalues(fp, zeta, s)
    mu = {1: mu1, 2: mu2}.get(i, mu3)
    h = complex(np.sum(mu * nodes.w))
    k = None
    if i in (1, 2):
        E = e11(fp, zeta, nu, s) if i == 1 else e22(fp, zeta, nu, s)
        k = complex(np.sum(E * nodes.w))
    return WkbExponent(h, k, contour, complex(s[-1]))


def theta1_approx(x: float, zeta, nu, eps: float, profile: Profile,
                  contour: Contour | None = None, log_form: bool = False):
    """Leading-order WKB solution exp(eps h1 + k1) T(x, zeta) e1."""
    zeta = complex(zeta)
    w = wkb_exponent(1, x, zeta, nu, profile, contour)
    xe = w.contour_used.end if w.contour_used.length > 0 else complex(x)
    if xe.imag != 0.0:
        raise FrameError("theta1_approx is evaluated at real x")
    fp = profile.flow(np.float64(xe.real))
    s = w.s_end if w.s_end is not None else complex(s_principal(zeta, fp.c0sq_eta))
    a1 = t_matrix(fp, zeta, s)[:, 0]
    expo = eps * w.h + w.k
    if log_form:
        return expo, a1
    return np.exp(expo) * a1


# --------------------------------------------------------------------------
# comparison factor H_eps


def _mu1_sharp(fp, zeta, nu, eps, s_nu):
    """Eigenvalue of Phi0 + Phi1/eps nearest mu1(zeta + nu/eps)."""
    from .frame import system_pieces

    sp = system_pieces(fp)
    h = 1.0 / eps
    A = h * sp.matrix(zeta * eps + nu, eps)  # Phi0(zeta) + h Phi1(nu)
    ev = np.linalg.eigvals(A)
    target = eigenvalues(fp, zeta + h * nu, s_nu)[0]
    idx = np.argmin(np.abs(ev - np.asarray(target)[..., None]), axis=-1)
    return np.take_along_axis(ev, idx[..., None], axis=-1)[..., 0]


def growth_tag(profile: Profile, nu) -> str:
    nu = complex(nu)
    if profile.ptype == "D":
        if nu.real > 0 and nu.imag > 0:
            return "decay"
        if nu.real > 0 and nu.imag < 0:
            return "growth"
        return "neutral"
    if profile.ptype == "I":
        return "decay" if abs(nu.imag) < nu.real else "growth_or_neutral"
    return "undetermined"


def H_factor(x, zeta, nu, eps: float, profile: Profile, contour: Contour | None = None):
    """H_eps(x) = eps int_0^x (mu1# - mu1) - int_{0,C} E11.

    ``x`` may be an increasing array of real points; the first point is
    reached along ``contour`` (default detours) and the rest along the axis.
    Returns (H values, growth tag).
    """
    zeta, nu = complex(zeta), complex(nu)
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(np.diff(xs) <= 0):
        raise ValueError("x must be strictly increasing")

    def integrand(fp, s, s_nu):
        mu1 = eigenvalues(fp, zeta, s)[0]
        ms = _mu1_sharp(fp, zeta, nu, eps, s_nu)
        return eps * (ms - mu1) - e11(fp, zeta, nu, s)

    c = contour if contour is not None else default_contour(float(xs[0]), zeta, profile)
    out = np.empty(xs.size, dtype=complex)
    if c.length == 0:
        acc, s_last, snu_last = 0j, None, None
    else:
        nodes, fp, s = _contour_data(c, zeta, profile)
        _, _, s_nu = _contour_data(c, zeta + nu / eps, profile)
        acc = complex(np.sum(integrand(fp, s, s_nu) * nodes.w))
        s_last, snu_last = s[-1], s_nu[-1]
    out[0] = acc
    xg, wg = np.polynomial.legendre.leggauss(16)
    for j in range(1, xs.size):
        a, b = xs[j - 1], xs[j]
        npan = max(1, int(np.ceil((b - a) / 0.05)))
        edges = np.linspace(a, b, npan + 1)
        pts = (0.5 * (edges[1:] - edges[:-1])[:, None] * xg + 0.5 * (edges[1:] + edges[:-1])[:, None]).ravel()
        wts = (0.5 * (edges[1:] - edges[:-1])[:, None] * wg).ravel()
        fp = profile.flow(pts)
        s, _ = continue_sqrt(np.concatenate([[s_last**2 if s_last is not None else zeta**2 + fp.c0sq_eta[0]],
                                             zeta**2 + fp.c0sq_eta]),
                             s_last if s_last is not None else s_principal(zeta, fp.c0sq_eta[0]))
        zn = zeta + nu / eps
        s_nu, _ = continue_sqrt(np.concatenate([[snu_last**2 if snu_last is not None else zn**2 + fp.c0sq_eta[0]],
                                                zn**2 + fp.c0sq_eta]),
                                snu_last if snu_last is not None else s_principal(zn, fp.c0sq_eta[0]))
        s, s_nu = s[1:], s_nu[1:]
        acc += complex(np.sum(integrand(fp, s, s_nu) * wts))
        s_last, snu_last = s[-1], s_nu[-1]
        out[j] = acc
    return (out if np.ndim(x) else out[0]), growth_tag(profile, nu)


# --------------------------------------------------------------------------
# reflection coefficient by direct contour integration


def alpha_by_contour(eps: float, zeta_i: float, nu, profile: Profile,
                     radius: float | None = None, log_form: bool = False):
    """exp of the integral of eps mu1 + E11 out along the axis, clockwise around
    x*, and back to 0, with s continued from i|s| at 0."""
    tp = alpha_turning_point(zeta_i, profile)
    xs = tp.x_star
    r = radius if radius is not None else 2.0 * default_delta(profile, xs)
    if not 0.0 < r < xs:
        raise FrameError("contour radius must lie in (0, x*)")
    others = [t for t in find_turning_points(zeta_i, profile) if t.x_star != tp.x_star]
    for t in others:
        if abs(t.x_star - xs) <= r * 1.05:
            raise FrameError("contour radius collides with a second turning point")
    zeta = 1j * zeta_i
    c = loop_contour(xs, r)
    nodes, fp, s = _contour_data(c, zeta, profile, panel_len=min(0.05, r / 4))
    # on the return leg s must have turned into -i|s|
    back = nodes.seg == 2
    if np.any(back) and not np.all(np.imag(s[back]) < 0):
        raise FrameError("square root did not flip sign around the turning point")
    mu1 = eigenvalues(fp, zeta, s)[0]
    expo = complex(np.sum((eps * mu1 + e11(fp, zeta, nu, s)) * nodes.w))
    return expo if log_form else np.exp(expo)


# --------------------------------------------------------------------------
# end-to-end asymptotic theta(0)


@dataclass(frozen=True)
class AsymptoticTheta:
    vector: np.ndarray
    regime: str
    alpha: complex | None = None


def theta_zero_asymptotic(zeta, nu, eps: float, profile: Profile) -> AsymptoticTheta:
    from .frame import classify_zeta

    zeta = complex(zeta)
    cls = classify_zeta(zeta, profile)
    f0 = profile.vn_state_flow
    s0 = s_principal(zeta, f0.c0sq_eta)
    T0 = t_matrix(f0, zeta, s0)
    if cls in ("I", "II"):
        return AsymptoticTheta(T0[:, 0], "not_class_III")
    if cls == "III_minus":
        raise UnsupportedFrequencyError("Class III_minus frequencies are not supported")
    zi = zeta.imag
    _check_not_exceptional(zi, profile)
    if profile.ptype not in ("I", "D", "M"):
        raise UnsupportedFrequencyError(f"profile type {profile.ptype} has no matching theory")
    tps = find_turning_points(zi, profile)
    if not tps:
        raise UnsupportedFrequencyError("Class III frequency without a turning point")
    if tps[-1].d < 0:
        return AsymptoticTheta(T0[:, 0], "caseD" if profile.ptype == "D" else "caseM_decreasing")
    a = complex(alpha_reflection(eps, zi, nu, profile))
    regime = "caseI" if profile.ptype == "I" else ("caseM_two" if len(tps) == 2 else "caseM_increasing")
    return AsymptoticTheta(T0[:, 0] + a * T0[:, 1], regime, a)

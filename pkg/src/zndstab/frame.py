"""Pointwise spectral data of the transposed linearized system.

The system for theta is theta' = (eps Phi0 + Phi1) theta with
Phi0 = {Ax^{-1}(zeta + i Ay)}^t and Phi1 = {Ax^{-1}(nu + B)}^t.  Everything here
is evaluated from a FlowPoint, so the same code serves real and complex x.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .profile import FlowPoint, Profile


class FrameError(ValueError):
    pass


class NearSingularFrameWarning(RuntimeWarning):
    pass


# --------------------------------------------------------------------------
# frequencies


@dataclass(frozen=True)
class Frequency:
    zeta: complex
    nu: complex
    eps: float
    fclass: str = "I"

    @property
    def tau(self) -> complex:
        return self.zeta * self.eps + self.nu

    @classmethod
    def make(cls, zeta, nu, eps, profile: Profile):
        return cls(complex(zeta), complex(nu), float(eps), classify_zeta(zeta, profile))


def classify_zeta(zeta, profile: Profile, rng=None) -> str:
    zeta = complex(zeta)
    if zeta.real < 0:
        raise FrameError("Re zeta must be non-negative")
    rng = rng or profile.ranges()
    if zeta.real == 0.0 and rng["ce_min"] <= abs(zeta) <= rng["ce_max"]:
        return "III_plus" if zeta.imag > 0 else "III_minus"
    if zeta.imag == 0.0 and rng["u_min"] <= zeta.real <= rng["u_max"]:
        return "II"
    return "I"


def exceptional_values(profile: Profile) -> list[float]:
    """zeta_i values excluded from the Class III analysis."""
    ends = [float(np.sqrt(profile.vn_state_flow.c0sq_eta)),
            float(np.sqrt(profile.flow_inf.c0sq_eta))]
    if profile.ptype == "M" and profile.x_M is not None:
        ends.append(float(np.sqrt(profile.flow(np.float64(profile.x_M)).c0sq_eta)))
    return ends


# --------------------------------------------------------------------------
# square-root branch


@dataclass(frozen=True)
class BranchedS:
    value: complex
    sheet: int = 0  # 0: principal determination, 1: negated


def s_principal(zeta, c0sq_eta):
    """s = sqrt(zeta^2 + c0^2 eta), positive branch with the imaginary cut."""
    zeta = np.asarray(zeta, dtype=complex)
    rad = zeta**2 + np.asarray(c0sq_eta)
    rad = np.asarray(rad, dtype=complex)
    s = np.sqrt(rad)
    on_cut = (rad.real < 0) & (np.abs(rad.imag) <= 1e-14 * np.abs(rad))
    if np.any(on_cut):
        sgn = np.where(np.broadcast_to(zeta, rad.shape).imag >= 0, 1.0, -1.0)
        s = np.where(on_cut, 1j * sgn * np.sqrt(np.abs(rad.real)), s)
    return s


def continue_sqrt(rad, s_start):
    """Continue sqrt(rad_k) along a sampled path from the value s_start.

    Returns (values, sheet) where sheet marks sign relative to the principal root.
    """
    rad = np.asarray(rad, dtype=complex)
    out = np.empty_like(rad)
    prev = complex(s_start)
    if abs(prev**2 - rad[0]) > 1e-8 * max(1.0, abs(rad[0])):
        raise FrameError("start value is not a square root of the first radicand")
    root = np.sqrt(rad)
    for k in range(rad.size):
        a, b = root[k], -root[k]
        cand = a if abs(a - prev) <= abs(b - prev) else b
        if abs(cand) < 1e-12 and rad.size > 1:
            raise FrameError("path passes through a zero of s")
        if k > 0 and abs(cand - prev) > 0.5 * max(abs(cand), abs(prev)):
            raise FrameError("path sampling too coarse for square-root continuation")
        out[k] = cand
        prev = cand
    sheet = (np.abs(out - root) > np.abs(out + root)).astype(int)
    return out, sheet


def s_branch(z, zeta, profile: Profile, path=None, s_start=None) -> BranchedS:
    """Branch-tracked s at a point.

    With no path, real z uses the principal rule.  With ``path`` (array of
    complex positions ending at z) the root is continued from ``s_start`` (or
    from the principal value at the first, real, point).
    """
    if path is None:
        z = complex(z)
        if z.imag != 0.0:
            raise FrameError("complex position needs a continuation path")
        f = profile.flow(np.float64(z.real))
        return BranchedS(complex(s_principal(zeta, f.c0sq_eta)), 0)
    path = np.asarray(path, dtype=complex)
    from .contour import flow_along

    fl = flow_along(profile, path)
    rad = complex(zeta) ** 2 + fl.c0sq_eta
    if s_start is None:
        if path[0].imag != 0:
            raise FrameError("continuation must start on the real axis")
        s_start = complex(s_principal(zeta, rad[0] - complex(zeta) ** 2))
    vals, sheet = continue_sqrt(rad, s_start)
    return BranchedS(complex(vals[-1]), int(sheet[-1]))


# --------------------------------------------------------------------------
# eigenstructure


def eigenvalues(fp: FlowPoint, zeta, s):
    eta, kap, u = fp.eta, fp.kappa, fp.u
    mu1 = -kap * (kap * zeta + s) / (eta * u)
    mu2 = -kap * (kap * zeta - s) / (eta * u)
    mu3 = zeta / u
    return mu1, mu2, mu3


def t_matrix(fp: FlowPoint, zeta, s):
    """Eigenvector matrix of Phi0, shape (..., 5, 5)."""
    zeta = np.asarray(zeta, dtype=complex)
    s = np.asarray(s, dtype=complex)
    eta, kap, u, m = fp.eta, fp.kappa, fp.u, fp.m
    shape = np.broadcast(eta, s, zeta).shape
    T = np.zeros(shape + (5, 5), dtype=complex)
    a = m * s / (kap * u)
    bS = kap * fp.p_S * s / (u * m)
    bL = kap * fp.p_lam * s / (u * m)
    zu = zeta / u
    T[..., 0, 0], T[..., 0, 1], T[..., 0, 2] = a, -a, -1j * m / (1.0 - eta)
    T[..., 1, 0], T[..., 1, 1], T[..., 1, 2] = zu, zu, 1j
    T[..., 2, 0], T[..., 2, 1], T[..., 2, 2] = -1j, -1j, zu
    T[..., 3, 0], T[..., 3, 1], T[..., 3, 3] = -bS, bS, 1.0
    T[..., 4, 0], T[..., 4, 1], T[..., 4, 4] = -bL, bL, 1.0
    return T


def t_matrix_dx(fp: FlowPoint, zeta, s):
    """x-derivative of t_matrix along the profile (zeta fixed)."""
    zeta = np.asarray(zeta, dtype=complex)
    s = np.asarray(s, dtype=complex)
    eta, kap, u, m = fp.eta, fp.kappa, fp.u, fp.m
    c0 = np.sqrt(fp.c0_sq)
    dc0 = fp.dc0_sq / (2.0 * c0)
    dkap = fp.du / c0 - u * dc0 / fp.c0_sq
    ds = fp.d_c0sq_eta / (2.0 * s)
    du, deta = fp.du, fp.deta
    shape = np.broadcast(eta, s, zeta).shape
    dT = np.zeros(shape + (5, 5), dtype=complex)
    da = m * (ds / (kap * u) - s * (dkap * u + kap * du) / (kap * u) ** 2)

    def dprod(pX, dpX):
        # derivative of kap pX s / (u m)
        return (dkap * pX * s + kap * dpX * s + kap * pX * ds - kap * pX * s * du / u) / (u * m)

    dbS = dprod(fp.p_S, fp.dp_S)
    dbL = dprod(fp.p_lam, fp.dp_lam)
    dzu = -zeta * du / u**2
    dT[..., 0, 0], dT[..., 0, 1], dT[..., 0, 2] = da, -da, -1j * m * deta / (1.0 - eta) ** 2
    dT[..., 1, 0], dT[..., 1, 1] = dzu, dzu
    dT[..., 2, 2] = dzu
    dT[..., 3, 0], dT[..., 3, 1] = -dbS, dbS
    dT[..., 4, 0], dT[..., 4, 1] = -dbL, dbL
    return dT


def phi0_explicit(fp: FlowPoint, zeta):
    """Closed-form Phi0 (transposed leading-order matrix)."""
    zeta = np.asarray(zeta, dtype=complex)
    eta, u, m = fp.eta, fp.u, fp.m
    pS, pL = fp.p_S, fp.p_lam
    shape = np.broadcast(eta, zeta).shape
    P = np.zeros(shape + (5, 5), dtype=complex)
    k2 = 1.0 - eta
    P[..., 0, 0] = -k2 * zeta / (eta * u)
    P[..., 0, 1] = -m * zeta / (eta * u)
    P[..., 0, 2] = -1j * m / k2
    P[..., 1, 0] = -k2 * zeta / (eta * m * u)
    P[..., 1, 1] = -k2 * zeta / (eta * u)
    P[..., 2, 0] = 1j * k2 / (eta * m)
    P[..., 2, 1] = 1j / eta
    P[..., 2, 2] = zeta / u
    for row, pX in ((3, pS), (4, pL)):
        P[..., row, 0] = k2 * pX * zeta / (eta * m**2 * u)
        P[..., row, 1] = k2 * pX * zeta / (eta * m * u)
        P[..., row, 2] = 1j * pX / m
        P[..., row, row] = zeta / u
    return P


def coefficient_matrices(fp: FlowPoint):
    """A_x, A_y, B of the reduced linearized system, shape (..., 5, 5)."""
    v, u = fp.v, fp.u
    shape = np.shape(v)
    dt = np.result_type(v, complex) if np.iscomplexobj(v) else float
    Ax = np.zeros(shape + (5, 5), dtype=dt)
    Ay = np.zeros_like(Ax)
    B = np.zeros_like(Ax)
    p_v = -fp.c0_sq / v**2
    Ax[..., 0, 0], Ax[..., 0, 1] = u, -v
    Ax[..., 1, 0], Ax[..., 1, 1], Ax[..., 1, 3], Ax[..., 1, 4] = v * p_v, u, v * fp.p_S, v * fp.p_lam
    Ax[..., 2, 2] = u
    Ax[..., 3, 3] = u
    Ax[..., 4, 4] = u
    Ay[..., 0, 2] = -v
    Ay[..., 2, 0], Ay[..., 2, 3], Ay[..., 2, 4] = v * p_v, v * fp.p_S, v * fp.p_lam
    B[..., 0, 0], B[..., 0, 1] = -fp.du, fp.dv
    B[..., 1, 0] = fp.dp - v * fp.d_c0sq_over_v2
    B[..., 1, 1], B[..., 1, 3], B[..., 1, 4] = fp.du, v * fp.dp_S, v * fp.dp_lam
    B[..., 3, 0], B[..., 3, 1], B[..., 3, 3], B[..., 3, 4] = -fp.Phi_v, fp.dS, -fp.Phi_S, -fp.Phi_lam
    B[..., 4, 0], B[..., 4, 1], B[..., 4, 3], B[..., 4, 4] = -fp.r_v, fp.dlam, -fp.r_S, -fp.r_lam
    return Ax, Ay, B


@dataclass(frozen=True)
class SystemPieces:
    """theta' = (tau M0 + i eps M1 + M2) theta."""

    M0: np.ndarray
    M1: np.ndarray
    M2: np.ndarray

    def matrix(self, tau, eps):
        return _col(tau) * self.M0 + 1j * _col(eps) * self.M1 + self.M2


def _col(a):
    a = np.asarray(a)
    return a[..., None, None] if a.ndim else a


def system_pieces(fp: FlowPoint) -> SystemPieces:
    Ax, Ay, B = coefficient_matrices(fp)
    Axi = np.linalg.inv(Ax)
    sw = lambda M: np.swapaxes(M, -1, -2)
    return SystemPieces(sw(Axi), sw(Axi @ Ay), sw(Axi @ B))


def phi0_assembled(fp: FlowPoint, zeta):
    sp = system_pieces(fp)
    return _col(zeta) * sp.M0 + 1j * sp.M1


def build_system(fp: FlowPoint, zeta, nu, eps):
    """eps Phi0 + Phi1 at the points of fp."""
    if np.any(np.abs(fp.u) < 1e-14) or np.any(np.abs(fp.c0sq_eta) < 1e-14):
        raise FrameError("A_x is singular (u = 0 or sonic point)")
    return system_pieces(fp).matrix(zeta * eps + nu, eps)


# --------------------------------------------------------------------------
# diagonal corrections


def e11(fp: FlowPoint, zeta, nu, s):
    eta, kap, u, v = fp.eta, fp.kappa, fp.u, fp.v
    sr = fp.sigma * fp.r
    k2 = 1.0 - eta
    A = v * fp.p_S * sr / (fp.T * u)
    Bn = 2.0 * nu + v * fp.sigma * fp.r_v
    dlns = fp.d_c0sq_eta / (2.0 * s**2)
    return (-k2 * A / (2.0 * eta)
            - k2 * Bn / (2.0 * eta * u)
            + (2.0 - eta) * fp.deta / (4.0 * eta * k2)
            + kap * zeta / (2.0 * eta * s) * (fp.deta / k2 - A - Bn / u)
            + (kap * zeta + s) / (zeta + kap * s) * zeta * sr / (eta * u * s)
            - 0.5 * dlns)


def e22(fp: FlowPoint, zeta, nu, s):
    return e11(fp, zeta, nu, -np.asarray(s))


def e11_regular(fp: FlowPoint, zeta, nu, s):
    """E11 + (1/2) d(ln s)/dx: the part without the 1/(x - x*) pole."""
    return e11(fp, zeta, nu, s) + fp.d_c0sq_eta / (4.0 * np.asarray(s) ** 2)


def e_matrix(fp: FlowPoint, zeta, nu, s):
    """Full E = T^{-1} Phi1 T - T^{-1} T'."""
    T = t_matrix(fp, zeta, s)
    dT = t_matrix_dx(fp, zeta, s)
    sp = system_pieces(fp)
    Phi1 = _col(nu) * sp.M0 + sp.M2
    Ti = np.linalg.inv(T)
    return Ti @ Phi1 @ T - Ti @ dT


@dataclass(frozen=True)
class ModeFrame:
    s: BranchedS
    mu: np.ndarray
    T_mat: np.ndarray
    E11: complex
    E22: complex
    kappa: float
    eta: float
    m: float
    near_singular: bool = False


def mode_frame(x, zeta, nu, profile: Profile, s: BranchedS | None = None,
               fp: FlowPoint | None = None) -> ModeFrame:
    zeta = complex(zeta)
    if fp is None:
        x = complex(x)
        if x.imag != 0.0:
            raise FrameError("complex positions need a FlowPoint and BranchedS")
        fp = profile.flow(np.float64(x.real))
    if s is None:
        s = BranchedS(complex(s_principal(zeta, fp.c0sq_eta)), 0)
    sv = s.value
    mu1, mu2, mu3 = eigenvalues(fp, zeta, sv)
    mu = np.array([mu1, mu2, mu3, mu3, mu3], dtype=complex)
    T = t_matrix(fp, zeta, sv)
    flag = abs(sv) < 1e-8 * (1 + abs(zeta)) or abs(zeta - complex(fp.u)) < 1e-8 * (1 + abs(zeta))
    if flag:
        warnings.warn("mode frame evaluated near a turning point", NearSingularFrameWarning)
    return ModeFrame(s, mu, T, complex(e11(fp, zeta, nu, sv)), complex(e22(fp, zeta, nu, sv)),
                     complex(fp.kappa), complex(fp.eta), fp.m, flag)


# --------------------------------------------------------------------------
# turning points


@dataclass(frozen=True)
class TurningPoint:
    x_star: float
    d: float
    kind: str


def find_turning_points(zeta_i: float, profile: Profile) -> list[TurningPoint]:
    """Real roots of c0^2 eta(x) = zeta_i^2, sorted decreasing in x."""
    g = profile.model.gamma
    m, P = profile.m, profile.P_flux
    # (g+1) m^2 v^2 - g P v + zeta_i^2 = 0
    A, Bq, C = (g + 1.0) * m**2, -g * P, zeta_i**2
    disc = Bq * Bq - 4 * A * C
    if disc < 0:
        return []
    roots = [(-Bq - np.sqrt(disc)) / (2 * A), (-Bq + np.sqrt(disc)) / (2 * A)]
    v_lo, v_hi = profile.vn_state.v, profile.w_inf.v
    out = []
    for v in roots:
        if not (v_lo < v < v_hi):
            continue
        qlam = profile.H_flux + profile._a * v * v - profile._b * v
        lam = qlam / profile.model.q
        if not 0.0 < lam < 1.0:
            continue
        x0 = profile.lambda_to_x(float(lam))
        # polish on c0^2 eta directly
        f = lambda x: float(profile.flow(np.float64(x)).c0sq_eta) - C
        a, b = max(0.0, x0 - 1e-6 * (1 + x0)), x0 + 1e-6 * (1 + x0)
        if f(a) * f(b) < 0:
            x0 = brentq(f, a, b, xtol=1e-14, rtol=4 * np.finfo(float).eps)
        if x0 >= profile.X_max:
            continue
        d = float(profile.flow(np.float64(x0)).d_c0sq_eta)
        out.append(TurningPoint(float(x0), d, "increasing" if d > 0 else "decreasing"))
    return sorted(out, key=lambda t: -t.x_star)


def eigen_separation(zeta, nu, profile: Profile, x_lo: float, eps: float | None = None,
                     n: int = 2001) -> float:
    zz = complex(zeta) + (complex(nu) / eps if eps else 0.0)
    xs = np.linspace(x_lo, profile.X_max, n)
    fp = profile.flow(xs)
    s = s_principal(zz, fp.c0sq_eta)
    mu1, mu2, mu3 = eigenvalues(fp, zz, s)
    sep = np.minimum(np.abs(mu1 - mu2), np.abs(mu1 - mu3))
    return float(np.min(sep))

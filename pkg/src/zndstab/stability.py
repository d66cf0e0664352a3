"""Jump data at the von Neumann shock and the stability function V."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .eos import eos_eval
from .frame import coefficient_matrices, s_principal, t_matrix
from .profile import FlowPoint, Profile


class ConsistencyError(RuntimeError):
    """An internal dual-evaluation gate failed."""


@dataclass(frozen=True)
class JumpData:
    h_t: np.ndarray
    h_y: np.ndarray
    g_plus: float
    chi_v: float
    ell_plus: float
    v_minus: float
    v_plus: float
    u_minus: float
    u_plus: float
    eta_plus: float
    kappa_plus: float
    c0sq_eta_plus: float
    m: float

    def g_t(self, fp: FlowPoint):
        """g_t = -(v', u', 0, S', lam') as an x-field, shape (..., 5)."""
        z = np.zeros_like(fp.dv)
        return -np.stack([fp.dv, fp.du, z, fp.dS, fp.dlam], axis=-1)

    def g_y(self, fp: FlowPoint):
        z = np.zeros_like(fp.dv)
        return np.stack([z, z, -fp.v * fp.dp, z, z], axis=-1)


def jump_data(profile: Profile) -> JumpData:
    up, vn = profile.upstream, profile.vn_state
    model = profile.model
    f = profile.vn_state_flow
    th = eos_eval(vn.v, vn.S, vn.lam, model)
    vm, vp = up.v, vn.v
    m = profile.m
    T, eta, pS = float(th.T), float(f.eta), float(th.p_S)
    g_plus = T - 0.5 * (vm - vp) * pS
    pre = (vm - vp) / (vm * T * eta)
    h_t = pre * np.array([2.0 * (1.0 - eta) * g_plus / m,
                          T * eta + 2.0 * (1.0 - eta) * g_plus,
                          0.0,
                          -m * (vm - vp) * eta,
                          0.0])
    h_y = np.array([0.0, 0.0, m * (vm - vp), 0.0, 0.0])
    chi = vp / vm
    ell = 2.0 - (1.0 - eta) * (1.0 - chi) * vm * pS / T
    return JumpData(h_t, h_y, float(g_plus), float(chi), float(ell), vm, vp,
                    up.u, vn.u, eta, float(f.kappa), float(f.c0sq_eta), m)


def t_columns(profile: Profile, zeta):
    """First two columns of T(0+, zeta) with the principal s."""
    f = profile.vn_state_flow
    s = s_principal(zeta, f.c0sq_eta)
    T = t_matrix(f, zeta, s)
    return T[..., :, 0], T[..., :, 1], s


def L_closed_forms(zeta, jd: JumpData):
    zeta = np.asarray(zeta, dtype=complex)
    s = s_principal(zeta, jd.c0sq_eta_plus)
    pre = -jd.u_minus * (1.0 - jd.chi_v) / jd.eta_plus
    uu = jd.u_plus * jd.u_minus
    common = jd.eta_plus * (1.0 - zeta**2 / uu)
    L1 = pre * (jd.ell_plus * zeta * (zeta + jd.kappa_plus * s) / uu + common)
    L2 = pre * (jd.ell_plus * zeta * (zeta - jd.kappa_plus * s) / uu + common)
    return L1, L2


def L_inner_products(zeta, profile: Profile, jd: JumpData):
    zeta = np.asarray(zeta, dtype=complex)
    t1, t2, _ = t_columns(profile, zeta)
    vec = zeta[..., None] * jd.h_t + 1j * jd.h_y
    return -np.sum(t1 * vec, axis=-1), -np.sum(t2 * vec, axis=-1)


def L_dual(zeta, profile: Profile, jd: JumpData | None = None, rtol: float = 1e-8):
    """Closed forms and inner-product forms of L1, L2; raises on mismatch."""
    jd = jd or jump_data(profile)
    c1, c2 = L_closed_forms(zeta, jd)
    i1, i2 = L_inner_products(zeta, profile, jd)
    for c, i, name in ((c1, i1, "L1"), (c2, i2, "L2")):
        err = np.abs(c - i) / np.maximum(np.abs(c), 1e-300)
        if np.any(err > rtol):
            raise ConsistencyError(f"{name} dual evaluation mismatch {np.max(err):.3e}")
    return c1, c2


@dataclass(frozen=True)
class StabilityValue:
    V: complex
    L: complex
    La: complex
    theta0_source: str
    b: tuple | None = None
    warning: str | None = None


def V_simple(theta0, zeta, nu, eps, jd: JumpData, profile: Profile,
             source: str = "exact_oracle") -> StabilityValue:
    """V from theta(0) alone.

    The boundary term is theta(0).g_t(0+), which equals tau b1 + i eps b2 by
    the adjoint identity d/dx(theta.w') = -theta.Ax^{-1}(tau g_t + i eps g_y).
    """
    theta0 = np.asarray(theta0, dtype=complex)
    tau = zeta * eps + nu
    gt0 = jd.g_t(profile.vn_state_flow)
    V = np.dot(theta0, gt0) - np.dot(theta0, tau * jd.h_t + 1j * eps * jd.h_y)
    La = -np.dot(theta0, zeta * jd.h_t + 1j * jd.h_y)
    return StabilityValue(complex(V), complex(V / eps), complex(La), source)


def b_integrands(theta, fp: FlowPoint, jd: JumpData):
    """theta . Ax^{-1} g_j at sample points, j = 1, 2."""
    Ax, _, _ = coefficient_matrices(fp)
    gt = jd.g_t(fp)
    gy = jd.g_y(fp)
    a1 = np.linalg.solve(Ax, gt[..., None])[..., 0]
    a2 = np.linalg.solve(Ax, gy[..., None])[..., 0]
    return np.sum(theta * a1, axis=-1), np.sum(theta * a2, axis=-1)


def V_original(tau, eps, b1, b2, theta0, jd: JumpData, tail_bound: float = 0.0,
               tol: float = 1e-8) -> StabilityValue:
    theta0 = np.asarray(theta0, dtype=complex)
    V = tau * b1 + 1j * eps * b2 - np.dot(theta0, tau * jd.h_t + 1j * eps * jd.h_y)
    zeta = (tau - 0.0) / eps
    La = -np.dot(theta0, zeta * jd.h_t + 1j * jd.h_y)
    warn = None
    if tail_bound > tol * max(abs(V), 1e-300):
        warn = f"tail bound {tail_bound:.2e} exceeds tolerance"
    return StabilityValue(complex(V), complex(V / eps), complex(La), "exact_oracle",
                          (complex(b1), complex(b2)), warn)


def von_neumann_check(profile: Profile, zeta_grid=None, jd: JumpData | None = None):
    """Scan L1 over Re zeta >= 0 for zeros; returns (passed, min |L1|)."""
    jd = jd or jump_data(profile)
    if zeta_grid is None:
        re = np.linspace(0.0, 4.0, 81)
        im = np.linspace(-4.0, 4.0, 161)
        zeta_grid = (re[:, None] + 1j * im[None, :]).ravel()
    zeta_grid = np.asarray(zeta_grid, dtype=complex)
    L1 = _L1_any(zeta_grid, jd)
    ok = bool(np.all(np.isfinite(L1)))
    # argument principle on the boundary of the scanned box when it is a grid
    passed = ok and not _brackets_zero(zeta_grid, L1)
    return passed, float(np.min(np.abs(L1)))


def _L1_any(zeta, jd):
    if callable(getattr(jd, "L1", None)):
        return jd.L1(zeta)
    return L_closed_forms(zeta, jd)[0]


def _brackets_zero(zeta, L):
    """Detect a sign change of Re and Im simultaneously between neighbours on
    the imaginary axis or a vanishing value."""
    if np.any(np.abs(L) < 1e-12):
        return True
    on_axis = np.abs(zeta.real) < 1e-15
    if np.count_nonzero(on_axis) >= 2:
        order = np.argsort(zeta[on_axis].imag)
        La = L[on_axis][order]
        # a real-valued function on the axis crossing zero
        re, im = La.real, La.imag
        for k in range(len(La) - 1):
            if re[k] * re[k + 1] < 0 and abs(im[k]) < 1e-12 and abs(im[k + 1]) < 1e-12:
                return True
    return False

"""Steady ZND strong-detonation profile.

The reaction zone is reconstructed from the three conserved fluxes (mass,
momentum, total enthalpy), which fix every state variable as an algebraic
function of the reactant fraction lam.  Only y = ln(lam) is integrated:

    dy/dx = r / (u lam) = -k exp(-E/(R T)) / u.

Because everything is a function of lam, analytic continuation to complex x
reduces to continuing the scalar y along a path.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import quad, solve_ivp
from scipy.optimize import brentq

from .eos import (
    ConfigError,
    EosDomainError,
    EosModel,
    entropy_from_vT,
    entropy_source,
    eos_eval,
    rate_eval,
)


class ProfileError(RuntimeError):
    """Integration or closure failure; carries the offending location."""

    def __init__(self, msg, where=None):
        super().__init__(msg if where is None else f"{msg} (at {where})")
        self.where = where


@dataclass(frozen=True)
class GasState:
    v: float
    u: float
    S: float
    lam: float

    def as_dict(self):
        return {"v": self.v, "u": self.u, "S": self.S, "lam": self.lam}


@dataclass(frozen=True)
class FlowPoint:
    """Profile data and x-derivatives at one or more (possibly complex) points."""

    lam: np.ndarray
    v: np.ndarray
    u: np.ndarray
    S: np.ndarray
    p: np.ndarray
    T: np.ndarray
    c0_sq: np.ndarray
    eta: np.ndarray
    kappa: np.ndarray
    m: float
    p_S: np.ndarray
    p_lam: np.ndarray
    sigma: np.ndarray
    r: np.ndarray
    r_v: np.ndarray
    r_S: np.ndarray
    r_lam: np.ndarray
    Phi: np.ndarray
    Phi_v: np.ndarray
    Phi_S: np.ndarray
    Phi_lam: np.ndarray
    # x-derivatives
    dlam: np.ndarray
    dv: np.ndarray
    du: np.ndarray
    dp: np.ndarray
    dS: np.ndarray
    dT: np.ndarray
    dc0_sq: np.ndarray
    deta: np.ndarray
    dp_S: np.ndarray
    dp_lam: np.ndarray
    d_c0sq_over_v2: np.ndarray

    @property
    def c0sq_eta(self):
        return self.c0_sq - self.u**2

    @property
    def d_c0sq_eta(self):
        return self.dc0_sq - 2.0 * self.u * self.du


def upstream_state(model: EosModel, mach: float) -> GasState:
    """Quiescent state in units with v = 1 and unit sound speed."""
    if not mach > 0:
        raise ConfigError("Mach number must be positive")
    T = 1.0 / (model.gamma * model.R_gas)
    return GasState(1.0, float(mach), float(entropy_from_vT(1.0, T, model)), 1.0)


def von_neumann_jump(upstream: GasState, model: EosModel) -> GasState:
    """Nonreactive Rankine-Hugoniot jump to the subsonic branch."""
    g = model.gamma
    th = eos_eval(upstream.v, upstream.S, upstream.lam, model)
    c0 = np.sqrt(th.c0_sq)
    M = upstream.u / c0
    if M <= 1.0:
        if np.isclose(M, 1.0, rtol=0, atol=1e-14):
            return upstream
        raise ConfigError(f"upstream state is not supersonic (Mach {M:.6g})")
    ratio = ((g - 1.0) * M**2 + 2.0) / ((g + 1.0) * M**2)
    m = upstream.u / upstream.v
    v1 = ratio * upstream.v
    p1 = th.p + m**2 * (upstream.v - v1)
    T1 = p1 * v1 / model.R_gas
    S1 = float(entropy_from_vT(v1, T1, model))
    return GasState(float(v1), float(m * v1), S1, upstream.lam)


def _total_enthalpy(state: GasState, model: EosModel):
    th = eos_eval(state.v, state.S, state.lam, model)
    return th.e + th.p * state.v + 0.5 * state.u**2, th


@dataclass
class Profile:
    model: EosModel
    mach: float
    upstream: GasState
    vn_state: GasState
    m: float
    P_flux: float
    H_flux: float
    X_max: float
    tol_eq: float
    grid: np.ndarray
    _sol: object = field(repr=False)
    ptype: str = "other"
    x_M: float | None = None
    decay_beta: float = 0.0
    w_inf: GasState | None = None

    # closure coefficients a v^2 - b v + (H - q lam) = 0
    @property
    def _a(self):
        g = self.model.gamma
        return self.m**2 * (g + 1.0) / (2.0 * (g - 1.0))

    @property
    def _b(self):
        g = self.model.gamma
        return g * self.P_flux / (g - 1.0)

    # ----- closure -------------------------------------------------------
    def volume_of_lambda(self, lam):
        lam = np.asarray(lam)
        a, b = self._a, self._b
        c = self.H_flux - self.model.q * lam
        disc = b * b - 4.0 * a * c
        if np.iscomplexobj(disc):
            sq = np.sqrt(disc)
            if np.any(np.abs(disc) < 1e-10 * b * b):
                raise ProfileError("closure branch collision in complex continuation")
        else:
            if np.any(disc <= 0):
                raise ProfileError("subsonic branch lost", where=float(np.min(lam)))
            sq = np.sqrt(disc)
        return 2.0 * c / (b + sq)

    def flow_from_lambda(self, lam) -> FlowPoint:
        model = self.model
        lam = np.asarray(lam)
        m = self.m
        v = self.volume_of_lambda(lam)
        u = m * v
        p = self.P_flux - m**2 * v
        T = p * v / model.R_gas
        if not np.iscomplexobj(T) and np.any(T <= 0):
            raise EosDomainError("non-positive temperature on profile")
        S = entropy_from_vT(v, T, model)
        th = eos_eval(v, S, lam, model)
        rb = rate_eval(v, S, lam, model)
        sb = entropy_source(v, S, lam, model)
        c0_sq = th.c0_sq
        eta = 1.0 - u**2 / c0_sq
        kappa = u / np.sqrt(c0_sq)
        dlam = rb.r / u
        dv = model.q / (2.0 * self._a * v - self._b) * dlam
        du = m * dv
        dp = -(m**2) * dv
        dT = (dp * v + th.p * dv) / model.R_gas
        dS = -model.q * dlam / th.T
        dc0 = model.gamma * (dp * v + th.p * dv)
        deta = -(2.0 * u * du * c0_sq - u**2 * dc0) / c0_sq**2
        dpS = dp / model.c_v
        dcv2 = model.gamma * (dp / v - th.p * dv / v**2)
        return FlowPoint(
            lam=lam, v=v, u=u, S=S, p=th.p, T=th.T, c0_sq=c0_sq, eta=eta,
            kappa=kappa, m=m, p_S=th.p_S, p_lam=th.p_lambda, sigma=th.sigma,
            r=rb.r, r_v=rb.r_v, r_S=rb.r_S, r_lam=rb.r_lambda, Phi=sb.Phi,
            Phi_v=sb.Phi_v, Phi_S=sb.Phi_S, Phi_lam=sb.Phi_lambda, dlam=dlam,
            dv=dv, du=du, dp=dp, dS=dS, dT=dT, dc0_sq=dc0, deta=deta,
            dp_S=dpS, dp_lam=np.zeros_like(dpS), d_c0sq_over_v2=dcv2,
        )

    # ----- real-axis evaluation -------------------------------------------
    def log_lambda(self, x):
        x = np.asarray(x, dtype=float)
        xc = np.clip(x, 0.0, self.X_max)
        y = np.asarray(self._sol(xc.ravel())).reshape(-1)
        y = y.reshape(x.shape)
        # exponential continuation beyond X_max at the equilibrium rate
        tail = x > self.X_max
        if np.any(tail):
            y = np.where(tail, y - self.decay_beta_exact * (x - self.X_max), y)
        return y

    def lam(self, x):
        return np.exp(self.log_lambda(x))

    def flow(self, x) -> FlowPoint:
        return self.flow_from_lambda(self.lam(x))

    @property
    def vn_state_flow(self) -> FlowPoint:
        return self.flow_from_lambda(np.float64(1.0))

    @property
    def flow_inf(self) -> FlowPoint:
        return self.flow_from_lambda(np.float64(0.0))

    @property
    def decay_beta_exact(self) -> float:
        fi = self.flow_inf
        return float(abs(fi.r_lam) / fi.u)

    def state_at(self, x) -> GasState:
        f = self.flow(np.float64(x))
        return GasState(float(f.v), float(f.u), float(f.S), float(f.lam))

    # ----- invariants ------------------------------------------------------
    def conservation_residuals(self, x=None):
        """Max relative drift of m, p + m^2 v, e + p v + u^2/2 on the grid."""
        x = self.grid if x is None else np.asarray(x)
        f = self.flow(x)
        th = eos_eval(f.v, f.S, f.lam, self.model)
        mass = f.u / f.v
        mom = th.p + mass**2 * f.v
        en = th.e + th.p * f.v + 0.5 * f.u**2
        m0, p0, h0 = self.m, self.P_flux, self.H_flux
        return {
            "mass": float(np.max(np.abs(mass - m0)) / abs(m0)),
            "momentum": float(np.max(np.abs(mom - p0)) / abs(p0)),
            "energy": float(np.max(np.abs(en - h0)) / abs(h0)),
        }

    def tail_decay_rate(self):
        """Fitted slope of ln(lam) on the last decade of the reaction zone."""
        y_end = float(self.log_lambda(self.X_max))
        x0 = brentq(lambda x: float(self.log_lambda(x)) - (y_end + np.log(10.0)),
                    0.0, self.X_max, xtol=1e-13)
        xs = np.linspace(x0, self.X_max, 200)
        slope = np.polyfit(xs, self.log_lambda(xs), 1)[0]
        return float(-slope)

    # ----- spectral ranges -------------------------------------------------
    def c0sq_eta_of_v(self, v):
        g = self.model.gamma
        return g * self.P_flux * v - (g + 1.0) * self.m**2 * v**2

    def ranges(self, n=4001):
        """Sampled ranges of u and c0 eta^{1/2} over [0, inf)."""
        xs = self._sample_grid(n)
        f = self.flow(xs)
        ce = np.sqrt(np.maximum(f.c0sq_eta, 0.0))
        ends = [float(np.sqrt(self.flow_from_lambda(np.float64(l)).c0sq_eta)) for l in (1.0, 0.0)]
        lo, hi = min(ce.min(), *ends), max(ce.max(), *ends)
        if self.ptype == "M" and self.x_M is not None:
            hi = max(hi, float(np.sqrt(self.flow(np.float64(self.x_M)).c0sq_eta)))
        u_all = np.concatenate([f.u, [self.vn_state.u, self.w_inf.u]])
        return {"u_min": float(u_all.min()), "u_max": float(u_all.max()),
                "ce_min": float(lo), "ce_max": float(hi)}

    def _sample_grid(self, n):
        return np.unique(np.concatenate([np.linspace(0.0, self.X_max, n), self.grid]))

    def lambda_to_x(self, lam_target: float) -> float:
        if not 0.0 < lam_target <= 1.0:
            raise ValueError("lam must lie in (0, 1]")
        yt = np.log(lam_target)
        if yt >= 0.0:
            return 0.0
        y_end = float(self.log_lambda(self.X_max))
        if yt <= y_end:
            return self.X_max + (y_end - yt) / self.decay_beta_exact
        return brentq(lambda x: float(self.log_lambda(x)) - yt, 0.0, self.X_max,
                      xtol=1e-14, rtol=4 * np.finfo(float).eps)

    # ----- serialization ---------------------------------------------------
    def to_json_dict(self, n_samples: int = 201) -> dict:
        xs = np.linspace(0.0, self.X_max, n_samples)
        f = self.flow(xs)
        return {
            "model": self.model.to_dict(),
            "mach": self.mach,
            "upstream": self.upstream.as_dict(),
            "vn_state": self.vn_state.as_dict(),
            "w_inf": self.w_inf.as_dict(),
            "mass_flux": self.m,
            "X_max": self.X_max,
            "tol_eq": self.tol_eq,
            "ptype": self.ptype,
            "x_M": self.x_M,
            "decay_beta": self.decay_beta,
            "conservation": self.conservation_residuals(),
            "samples": {
                "x": xs.tolist(), "v": f.v.tolist(), "u": f.u.tolist(),
                "S": f.S.tolist(), "lam": f.lam.tolist(), "p": f.p.tolist(),
                "c0sq_eta": f.c0sq_eta.tolist(),
            },
        }

    def to_csv(self, n_samples: int = 201) -> str:
        xs = np.linspace(0.0, self.X_max, n_samples)
        f = self.flow(xs)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "v", "u", "S", "lam", "p", "c0sq_eta"])
        for row in zip(xs, f.v, f.u, f.S, f.lam, f.p, f.c0sq_eta):
            w.writerow([repr(float(val)) for val in row])
        return buf.getvalue()

    def to_json(self, n_samples: int = 201) -> str:
        return json.dumps(self.to_json_dict(n_samples), sort_keys=True, indent=1)


def _shell(model: EosModel, mach: float, tol_eq: float = 1e-10) -> Profile:
    """Profile skeleton with fluxes only (no reaction-zone solution)."""
    up = upstream_state(model, mach)
    if mach <= 1.0:
        raise ConfigError("strong detonation requires a supersonic upstream state")
    vn = von_neumann_jump(up, model)
    m = up.u / up.v
    th_up = eos_eval(up.v, up.S, up.lam, model)
    P = float(th_up.p + m**2 * up.v)
    H, _ = _total_enthalpy(up, model)
    H = float(H)

    shell = Profile(model, float(mach), up, vn, float(m), P, H, 0.0, tol_eq,
                    np.zeros(1), None)
    # subsonic branch must survive complete burning
    try:
        shell.volume_of_lambda(np.float64(0.0))
    except ProfileError as exc:
        raise ConfigError(
            "no strong detonation: equilibrium state has no subsonic branch "
            "(raise the Mach number)") from exc

    return shell


def integrate_profile(model: EosModel, mach: float, tol_eq: float = 1e-10,
                      rtol: float = 1e-13, x_cap: float = 1e6) -> Profile:
    """Build the steady profile for a given shock Mach number."""
    if not tol_eq > 0 or not rtol > 0:
        raise ConfigError("tolerances must be positive")
    shell = _shell(model, mach, tol_eq)
    up, vn, m, P, H = shell.upstream, shell.vn_state, shell.m, shell.P_flux, shell.H_flux

    def rhs(x, y):
        lam = np.exp(y[0])
        v = shell.volume_of_lambda(lam)
        T = (P - m**2 * v) * v / model.R_gas
        return [-model.k_rate * np.exp(-model.E_act / (model.R_gas * T)) / (m * v)]

    y_stop = np.log(tol_eq)

    def done(x, y):
        return y[0] - y_stop

    done.terminal = True
    done.direction = -1
    sol = solve_ivp(rhs, (0.0, x_cap), [0.0], method="DOP853", rtol=rtol,
                    atol=1e-14, dense_output=True, events=done)
    if sol.status != 1:
        raise ProfileError("reaction did not reach equilibrium tolerance", where=x_cap)
    X_max = float(sol.t_events[0][0])
    grid = np.unique(np.concatenate([sol.t[sol.t <= X_max], [X_max]]))

    def ysol(x):
        return sol.sol(x)[0]

    prof = Profile(model, float(mach), up, vn, float(m), P, H, X_max, tol_eq,
                   grid, ysol)
    f_inf = prof.flow_inf
    prof.w_inf = GasState(float(f_inf.v), float(f_inf.u), float(f_inf.S), 0.0)
    prof.decay_beta = prof.tail_decay_rate() if model.k_rate > 0 else 0.0
    ptype, x_M = classify_profile(prof)
    prof.ptype, prof.x_M = ptype, x_M
    return prof


def half_reaction_length(model: EosModel, mach: float) -> float:
    """x at which lam = 1/2, by quadrature of dx = u dlam / r over the closure."""
    shell = _shell(model, mach)
    m, P = shell.m, shell.P_flux

    def dxdlam(lam):
        v = shell.volume_of_lambda(np.float64(lam))
        T = (P - m**2 * v) * v / model.R_gas
        return m * v / (model.k_rate * lam * np.exp(-model.E_act / (model.R_gas * T)))

    val, _ = quad(dxdlam, 0.5, 1.0, epsabs=0.0, epsrel=1e-12)
    return float(val)


def calibrate_rate(model: EosModel, mach: float, half_length: float = 1.0) -> EosModel:
    """Copy of ``model`` whose k_rate puts lam = 1/2 at x = half_length."""
    if not half_length > 0:
        raise ConfigError("half_length must be positive")
    x_half = half_reaction_length(model, mach)
    return replace(model, k_rate=model.k_rate * x_half / half_length)


def classify_profile(profile: Profile, band: float = 1e-12):
    """Type from the sign pattern of d(c0^2 eta)/dx along the reaction zone.

    The derivative is v' times a bracket and v' > 0 decays like lam in the
    tail, so the sign test is applied to d(c0^2 eta)/dx / v' (same sign,
    no spurious tail zeros).  Entries inside the band are ignored.
    """
    xs = profile._sample_grid(2001)
    f = profile.flow(xs)
    inner = (xs > 0) & (xs < profile.X_max)
    dv = f.dv[inner]
    d = f.d_c0sq_eta[inner]
    keep = np.abs(dv) > 0
    if profile.model.q == 0 or not np.any(keep):
        return "other", None
    dn = d[keep] / np.abs(dv[keep])
    pos = dn > band
    neg = dn < -band
    sig = np.sign(dn[pos | neg])
    if sig.size == 0:
        return "other", None
    if np.all(sig > 0):
        return "I", None
    if np.all(sig < 0):
        return "D", None
    changes = np.nonzero(np.diff(sig))[0]
    if len(changes) == 1 and sig[0] > 0 > sig[-1]:
        # the maximum sits at v_M where d(c0^2 eta)/dv = 0
        g = profile.model.gamma
        vM = g * profile.P_flux / (2.0 * (g + 1.0) * profile.m**2)
        qlam = profile.H_flux + profile._a * vM**2 - profile._b * vM
        lamM = qlam / profile.model.q
        return "M", profile.lambda_to_x(float(lamM))
    return "other", None


def predicted_type(model: EosModel, mach: float) -> str:
    """Type read off from the closure: c0^2 eta is concave in v, v increases."""
    prof_v = _v_range(model, mach)
    v_plus, v_inf, vM = prof_v
    if v_inf <= vM:
        return "I"
    if v_plus >= vM:
        return "D"
    return "M"


def _closure_discriminant(model: EosModel, mach: float) -> float:
    up = upstream_state(model, mach)
    m = up.u / up.v
    th = eos_eval(up.v, up.S, up.lam, model)
    P = th.p + m**2 * up.v
    H = th.e + th.p * up.v + 0.5 * up.u**2
    g = model.gamma
    a = m**2 * (g + 1.0) / (2.0 * (g - 1.0))
    b = g * P / (g - 1.0)
    return float(b * b - 4.0 * a * H)


def cj_mach(model: EosModel) -> float:
    """Chapman-Jouguet Mach number: the end state becomes sonic."""
    if model.q == 0:
        return 1.0
    lo, hi = 1.0 + 1e-12, 2.0
    while _closure_discriminant(model, hi) <= 0:
        lo, hi = hi, 2.0 * hi
        if hi > 1e6:
            raise ConfigError("no CJ point found")
    return float(brentq(lambda M: _closure_discriminant(model, M), lo, hi, xtol=1e-14))


def mach_from_overdrive(model: EosModel, overdrive: float) -> float:
    """Shock Mach number for f = (D / D_CJ)^2 > 1."""
    if not overdrive > 1.0:
        raise ConfigError("overdrive must exceed 1 for a strong detonation")
    return cj_mach(model) * float(np.sqrt(overdrive))


def _v_range(model: EosModel, mach: float):
    up = upstream_state(model, mach)
    vn = von_neumann_jump(up, model)
    m = up.u / up.v
    th = eos_eval(up.v, up.S, up.lam, model)
    P = th.p + m**2 * up.v
    H = th.e + th.p * up.v + 0.5 * up.u**2
    g = model.gamma
    a = m**2 * (g + 1.0) / (2.0 * (g - 1.0))
    b = g * P / (g - 1.0)
    disc = b * b - 4.0 * a * H
    if disc <= 0:
        raise ConfigError("no strong detonation for these parameters")
    v_inf = 2.0 * H / (b + np.sqrt(disc))
    vM = g * P / (2.0 * (g + 1.0) * m**2)
    return float(vn.v), float(v_inf), float(vM)


def continue_profile_complex(profile: Profile, path, y0=None, z0=None,
                             rtol: float = 1e-12, atol: float = 1e-14):
    """Continue y = ln(lam) along a parametrized path z(t), t in [0, 1].

    ``path`` must provide ``point(t)`` and ``deriv(t)``.  Returns a callable
    t -> y(t) (complex) built from dense output.
    """
    model = profile.model
    m, P = profile.m, profile.P_flux
    if y0 is None:
        zs = complex(path.point(0.0))
        if abs(zs.imag) > 0 or z0 is not None:
            raise ValueError("complex start requires y0")
        y0 = complex(profile.log_lambda(zs.real))

    def rhs(t, y):
        lam = np.exp(y[0])
        v = profile.volume_of_lambda(np.complex128(lam))
        T = (P - m**2 * v) * v / model.R_gas
        f = -model.k_rate * np.exp(-model.E_act / (model.R_gas * T)) / (m * v)
        return [f * path.deriv(t)]

    try:
        sol = solve_ivp(rhs, (0.0, 1.0), [complex(y0)], method="DOP853",
                        rtol=rtol, atol=atol, dense_output=True)
    except ProfileError as exc:
        raise ProfileError("profile continuation failed", where=str(path)) from exc
    if sol.status != 0:
        raise ProfileError("profile continuation failed", where=str(path))
    return lambda t: sol.sol(np.asarray(t, dtype=float))[0]

"""High-frequency instability criterion, unstable (nu, eps) loci and winding checks."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .frame import classify_zeta, exceptional_values, find_turning_points
from .profile import Profile
from .stability import L_dual, V_simple, jump_data
from .wkb import (
    BetaTriple,
    UnsupportedFrequencyError,
    beta_bracket,
    beta_exponent,
    beta_integrals,
)


@dataclass
class Winding:
    eps: float
    radius: float
    winding: int | None
    target: str
    min_abs: float = float("nan")
    turns: float = float("nan")
    conclusive: bool = True


@dataclass
class InstabilityVerdict:
    zeta_i: float
    criterion_lhs: float
    criterion_rhs: float
    verdict: str  # stable_hf | unstable_hf | excluded
    nu_star: complex | None = None
    eps_list: list = field(default_factory=list)
    windings: list = field(default_factory=list)
    L1: float | None = None
    L2: float | None = None
    betas: BetaTriple | None = None
    regime: str = ""
    note: str = ""
    out_of_ball: bool = False

    def to_dict(self):
        d = asdict(self)
        d["nu_star"] = None if self.nu_star is None else [self.nu_star.real, self.nu_star.imag]
        return d


def _excluded(zeta_i, note, regime="excluded"):
    return InstabilityVerdict(float(zeta_i), float("nan"), float("nan"), "excluded",
                              regime=regime, note=note)


def evaluate_criterion(zeta_i: float, profile: Profile, im_nu: float = 0.0,
                       R_bound: float = math.inf, eps_min: float = 0.0,
                       eps_max: float = 200.0, jd=None) -> InstabilityVerdict:
    """Compare |L2| exp(beta2) with L1 at zeta = i zeta_i and list the
    predicted unstable eps values when the former is larger."""
    zeta_i = float(zeta_i)
    zeta = 1j * zeta_i
    if zeta_i <= 0:
        return _excluded(zeta_i, "zeta_i must be positive")
    cls = classify_zeta(zeta, profile)
    for ze in exceptional_values(profile):
        if abs(zeta_i - ze) <= 1e-9 * max(1.0, ze):
            return _excluded(zeta_i, "exceptional value")
    jd = jd or jump_data(profile)
    L1, L2 = L_dual(zeta, profile, jd)
    L1r, L2r = float(L1.real), float(L2.real)
    if cls != "III_plus":
        return InstabilityVerdict(zeta_i, 0.0, L1r, "stable_hf", L1=L1r, L2=L2r,
                                  regime="not_class_III")
    if profile.ptype not in ("I", "D", "M"):
        return _excluded(zeta_i, f"profile type {profile.ptype}")
    tps = find_turning_points(zeta_i, profile)
    if not tps:
        return _excluded(zeta_i, "no turning point located")
    if tps[-1].d < 0:
        return InstabilityVerdict(zeta_i, 0.0, L1r, "stable_hf", L1=L1r, L2=L2r,
                                  regime="decreasing_turning_point")
    bt = beta_integrals(zeta_i, 0.0, profile)
    lhs = abs(L2r) * math.exp(bt.beta2)
    regime = "caseI" if profile.ptype == "I" else "caseM"
    if lhs < L1r:
        return InstabilityVerdict(zeta_i, lhs, L1r, "stable_hf", L1=L1r, L2=L2r,
                                  betas=bt, regime=regime)
    if lhs == L1r:
        return InstabilityVerdict(zeta_i, lhs, L1r, "excluded", L1=L1r, L2=L2r,
                                  betas=bt, regime=regime, note="criterion is marginal")
    re_nu = (bt.beta2 - math.log(L1r / abs(L2r))) / bt.beta3
    nu_star = complex(re_nu, im_nu)
    eps_list = predicted_eps(bt, nu_star, L2r, eps_min, eps_max)
    return InstabilityVerdict(zeta_i, lhs, L1r, "unstable_hf", nu_star, eps_list,
                              L1=L1r, L2=L2r, betas=bt, regime=regime,
                              out_of_ball=abs(nu_star) > R_bound)


def predicted_eps(bt: BetaTriple, nu: complex, L2: float, eps_min: float, eps_max: float):
    sgn = -0.5 if L2 > 0 else 0.5
    out = []
    n = 0
    while True:
        eps = ((2 * n + sgn) * math.pi - nu.imag * bt.beta3) / bt.beta1
        if eps > eps_max:
            break
        if eps >= eps_min and eps > 0:
            out.append(float(eps))
        n += 1
    return out


def V_a(nu, zeta_i: float, eps: float, L1: float, L2: float, bt: BetaTriple):
    """L1 + alpha L2 as an analytic function of nu."""
    return L1 + np.exp(beta_exponent(eps, zeta_i, np.asarray(nu), bt)) * L2


def dV_a_dnu(nu, zeta_i, eps, L2, bt):
    return -bt.beta3 * np.exp(beta_exponent(eps, zeta_i, np.asarray(nu), bt)) * L2


# --------------------------------------------------------------------------
# argument principle


def winding_number(f, center: complex, radius: float, n0: int = 64,
                   max_arg_step: float = math.pi / 4, max_points: int = 20000,
                   vanish_tol: float = 1e-12):
    """Winding of f around 0 along |nu - center| = radius (counter-clockwise).

    The circle is sampled adaptively so that no step changes arg f by more
    than ``max_arg_step``.  Returns (winding or None, min |f|, turns).
    """
    th = list(np.linspace(0.0, 2 * np.pi, n0 + 1))
    vals = list(np.asarray(f(center + radius * np.exp(1j * np.asarray(th))), dtype=complex))
    i = 0
    while i < len(th) - 1:
        a, b = vals[i], vals[i + 1]
        if min(abs(a), abs(b)) <= vanish_tol * max(1.0, max(abs(v) for v in vals)):
            return None, float(min(abs(v) for v in vals)), float("nan")
        d = np.angle(b / a)
        if abs(d) > max_arg_step:
            if len(th) >= max_points:
                return None, float(min(abs(v) for v in vals)), float("nan")
            tm = 0.5 * (th[i] + th[i + 1])
            th.insert(i + 1, tm)
            vals.insert(i + 1, complex(f(center + radius * np.exp(1j * tm))))
            continue
        i += 1
    v = np.asarray(vals)
    total = float(np.sum(np.angle(v[1:] / v[:-1])))
    turns = total / (2 * np.pi)
    w = int(round(turns))
    if abs(turns - w) > 1e-6:
        return None, float(np.min(np.abs(v))), turns
    return w, float(np.min(np.abs(v))), turns


def exact_L(nu, zeta_i: float, eps: float, profile: Profile, jd=None, tol: float = 1e-9):
    """L = V / eps from the exact oracle, theta(0) scaled to unit t1-component."""
    from .resolvent import solve_decaying, t1_normalized_theta0

    jd = jd or jump_data(profile)
    zeta = 1j * zeta_i
    nus = np.atleast_1d(np.asarray(nu, dtype=complex))
    out = np.empty(nus.shape, dtype=complex)
    for k, n in enumerate(nus):
        sol = solve_decaying(zeta, n, eps, profile, tol=tol)
        th0 = t1_normalized_theta0(sol, profile)
        out[k] = V_simple(th0, zeta, n, eps, jd, profile).L
    return out if np.ndim(nu) else out[0]


def rouche_verify(zeta_i: float, nu_center: complex, eps: float, delta: float,
                  target: str, profile: Profile, verdict: InstabilityVerdict | None = None,
                  retries: int = 2, jd=None, oracle_tol: float = 1e-9) -> Winding:
    """Winding number of V_a or of the exact L around the circle C_delta."""
    jd = jd or jump_data(profile)
    if verdict is None or verdict.betas is None:
        L1, L2 = L_dual(1j * zeta_i, profile, jd)
        L1, L2 = float(L1.real), float(L2.real)
        bt = beta_integrals(zeta_i, 0.0, profile)
    else:
        L1, L2, bt = verdict.L1, verdict.L2, verdict.betas
    if target == "Va":
        def f(nu):
            return V_a(nu, zeta_i, eps, L1, L2, bt)
        n0 = 64
    elif target == "V":
        def f(nu):
            return exact_L(nu, zeta_i, eps, profile, jd, tol=oracle_tol)
        n0 = 24
    else:
        raise ValueError("target must be 'Va' or 'V'")
    r = delta
    for _ in range(retries + 1):
        w, mn, turns = winding_number(f, nu_center, r, n0=n0)
        if w is not None:
            return Winding(float(eps), float(r), w, target, mn, turns, True)
        r *= 0.7
    return Winding(float(eps), float(r), None, target, mn, turns, False)


# --------------------------------------------------------------------------
# type M


def caseM_K_criterion(profile: Profile):
    """K = four-term bracket at x_M; K > 0 signals instability near zeta_{i,M}."""
    if profile.ptype != "M" or profile.x_M is None:
        raise UnsupportedFrequencyError("K criterion needs a type-M profile")
    xm = float(profile.x_M)
    zim = float(np.sqrt(profile.flow(np.float64(xm)).c0sq_eta))
    K = float(beta_bracket(np.float64(xm), zim, profile))
    return {"K": K, "zeta_iM": zim, "x_M": xm, "unstable_near_max": K > 0}


# --------------------------------------------------------------------------
# sweeps


@dataclass
class StabilityReport:
    profile_type: str
    rows: list
    unstable_interval: tuple | None
    eps_cutoff: float | None
    K: dict | None = None
    errors: list = field(default_factory=list)

    def to_dict(self):
        return {
            "profile_type": self.profile_type,
            "rows": [r.to_dict() for r in self.rows],
            "unstable_interval": self.unstable_interval,
            "eps_cutoff": self.eps_cutoff,
            "K": self.K,
            "errors": self.errors,
        }


def sweep(profile: Profile, zeta_grid, im_nu: float = 0.0, R_bound: float = math.inf,
          eps_min: float = 0.0, eps_max: float = 200.0, jobs: int = 1) -> StabilityReport:
    """evaluate_criterion over a grid of zeta_i values."""
    jd = jump_data(profile)
    grid = [float(z) for z in zeta_grid]

    def one(z):
        try:
            return evaluate_criterion(z, profile, im_nu, R_bound, eps_min, eps_max, jd)
        except Exception as exc:  # recorded per point
            return _excluded(z, f"{type(exc).__name__}: {exc}", regime="error")

    if jobs > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=jobs) as ex:
            rows = list(ex.map(one, grid))
    else:
        rows = [one(z) for z in grid]
    unstable = [r.zeta_i for r in rows if r.verdict == "unstable_hf"]
    interval = (min(unstable), max(unstable)) if unstable else None
    cutoff = _overlap_cutoff(rows) if unstable else None
    K = None
    if profile.ptype == "M":
        try:
            K = caseM_K_criterion(profile)
        except UnsupportedFrequencyError:
            K = None
    errors = [r.note for r in rows if r.regime == "error"]
    return StabilityReport(profile.ptype, rows, interval, cutoff, K, errors)


def _overlap_cutoff(rows):
    """Smallest eps above which consecutive unstable bands cover the axis.

    For a contiguous block of unstable zeta_i with beta_1 varying over
    [b_lo, b_hi], the n-th band is [c_n / b_hi, c_n / b_lo] with
    c_n = (2n -+ 1/2) pi; bands overlap once c_{n+1} / b_hi <= c_n / b_lo.
    """
    us = [r for r in rows if r.verdict == "unstable_hf" and r.betas is not None]
    if len(us) < 2:
        return None
    b = [r.betas.beta1 for r in us]
    b_lo, b_hi = min(b), max(b)
    if b_hi <= b_lo:
        return None
    # c_n / b_lo >= (c_n + 2 pi) / b_hi  <=>  c_n >= 2 pi b_lo / (b_hi - b_lo)
    c_min = 2 * math.pi * b_lo / (b_hi - b_lo)
    return float(c_min / b_lo)

"""Finite-eps ground truth for theta' = (eps Phi0 + Phi1) theta.

The decaying solution is built by integrating backward from X_max with a
fourth-order Magnus scheme (two Gauss points, one commutator).  Each step is
a matrix exponential, so the fast exponential/oscillatory behaviour costs
nothing; only the variation of the coefficients limits the step.  The
vector is renormalized after every step and the real log-magnitude kept in
``log_scale``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .contour import Contour, continue_log_lambda
from .frame import (
    FrameError,
    eigenvalues,
    s_principal,
    system_pieces,
    t_matrix,
)
from .profile import Profile

_C = np.sqrt(3.0) / 6.0


class StiffnessBudgetError(RuntimeError):
    """The requested accuracy needs more steps than the budget allows."""

    def __init__(self, msg, x_reached=None):
        super().__init__(msg)
        self.x_reached = x_reached


@dataclass(frozen=True)
class ScaledSolution:
    """theta(x_k) = vec[k] * exp(log_scale[k]); extra trailing components
    (if any) are the b-integral accumulators."""

    x: np.ndarray
    vec: np.ndarray
    log_scale: np.ndarray
    anchor: str = "decaying"
    zeta: complex = 0j
    nu: complex = 0j
    eps: float = 1.0
    err_est: float = 0.0
    n_steps: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def theta(self) -> np.ndarray:
        return self.vec[:, :5]

    def at(self, x):
        """(vector, log_scale) at a stored sample."""
        k = int(np.argmin(np.abs(self.x - x)))
        if abs(self.x[k] - x) > 1e-12 * max(1.0, abs(x)):
            raise KeyError(f"x={x} is not a stored sample")
        return self.vec[k], float(self.log_scale[k])

    def theta0(self):
        k = int(np.argmin(np.abs(self.x)))
        return self.vec[k, :5], float(self.log_scale[k])

    def relative(self, x_ref):
        """Samples rescaled so that the stored vector at x_ref keeps its norm.

        Returned values are exact ratios theta(x)/exp(log_scale(x_ref)).
        """
        _, ls = self.at(x_ref)
        with np.errstate(over="ignore"):
            return self.vec * np.exp(self.log_scale - ls)[:, None]


# --------------------------------------------------------------------------
# Magnus core


def magnus_steps(Afun, t):
    """Step exponentials exp(Omega_k) for the intervals t[k] -> t[k+1].

    ``Afun(points)`` returns the (n, d, d) coefficient (already multiplied by
    dz/dt for contour parametrizations).  ``t`` may be decreasing.
    """
    t = np.asarray(t)
    h = np.diff(t)
    mid = 0.5 * (t[1:] + t[:-1])
    pts = np.concatenate([mid - _C * h, mid + _C * h])
    A = Afun(pts)
    n = h.size
    A1, A2 = A[:n], A[n:]
    hh = h[:, None, None]
    Om = 0.5 * hh * (A1 + A2) + (np.sqrt(3.0) / 12.0) * hh**2 * (A2 @ A1 - A1 @ A2)
    return expm(Om)


def propagate(steps, v0):
    """Apply step exponentials in order with renormalization."""
    n = steps.shape[0]
    d = v0.size
    vec = np.empty((n + 1, d), dtype=complex)
    ls = np.empty(n + 1)
    nv = np.linalg.norm(v0)
    vec[0] = v0 / nv
    ls[0] = np.log(nv)
    v = vec[0]
    acc = ls[0]
    for k in range(n):
        v = steps[k] @ v
        nv = np.linalg.norm(v)
        if not np.isfinite(nv) or nv == 0.0:
            raise StiffnessBudgetError("solution lost (overflow or underflow)", k)
        v = v / nv
        acc += np.log(nv)
        vec[k + 1] = v
        ls[k + 1] = acc
    return vec, ls


# --------------------------------------------------------------------------
# coefficients


def _augmented(fp, tau, eps, jd=None):
    """theta' = A theta, optionally with b accumulators b_j' = (Ax^{-1} g_j).theta."""
    sp = system_pieces(fp)
    A = sp.matrix(tau, eps)
    if jd is None:
        return A
    from .frame import coefficient_matrices

    Ax, _, _ = coefficient_matrices(fp)
    G = np.stack([jd.g_t(fp), jd.g_y(fp)], axis=-1)  # (..., 5, 2)
    rows = np.swapaxes(np.linalg.solve(Ax, G), -1, -2)  # (..., 2, 5)
    n = A.shape[0]
    out = np.zeros((n, 7, 7), dtype=complex)
    out[:, :5, :5] = A
    out[:, 5:, :5] = rows
    return out


def limit_decomposition(zeta, nu, eps: float, profile: Profile, x: float | None = None):
    """Eigen-decomposition of eps Phi0 + Phi1 at equilibrium (or at x).

    Returns (eigenvalues, eigenvectors, index of the mu1* branch).
    """
    zeta, nu = complex(zeta), complex(nu)
    fp = profile.flow_inf if x is None else profile.flow(np.float64(x))
    sp = system_pieces(fp)
    A = sp.matrix(zeta * eps + nu, eps)
    ev, V = np.linalg.eig(A)
    zn = zeta + nu / eps
    target = eps * eigenvalues(fp, zn, s_principal(zn, fp.c0sq_eta))[0]
    k = int(np.argmin(np.abs(ev - target)))
    others = np.delete(ev, k)
    sep = float(np.min(np.abs(others - ev[k])))
    if sep < 1e-8 * max(1.0, abs(ev[k])):
        raise FrameError("eigenvalue separation fails at equilibrium")
    if not np.all(others.real > ev[k].real):
        raise FrameError("mu1* is not the most decaying mode at equilibrium")
    return ev, V, k


def _grid(profile: Profile, n: int, breakpoints=()):
    """Points on [0, X_max] clustered where the profile varies fastest."""
    xs = np.linspace(0.0, profile.X_max, 4001)
    f = profile.flow(xs)
    g = np.abs(f.dlam) + np.abs(f.deta)
    dens = 1.0 + 3.0 * np.sqrt(g / g.max())
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(xs))])
    grid = np.interp(np.linspace(0.0, cum[-1], n + 1), cum, xs)
    bps = [b for b in breakpoints if 0.0 < b < profile.X_max]
    if bps:
        grid = np.unique(np.concatenate([grid, bps]))
        # drop points closer than 1e-3 step to a breakpoint
        keep = np.ones(grid.size, dtype=bool)
        for b in bps:
            near = (np.abs(grid - b) < 1e-3 * profile.X_max / n) & (grid != b)
            keep &= ~near
        grid = grid[keep]
    return grid


def _solve_on_grid(zeta, nu, eps, profile, grid, jd):
    tau = zeta * eps + nu
    _, V, k = limit_decomposition(zeta, nu, eps, profile)
    v0 = V[:, k]
    if jd is not None:
        v0 = np.concatenate([v0, [0.0, 0.0]])
    t = grid[::-1]  # X_max -> 0

    def Afun(x):
        return _augmented(profile.flow(np.real(x)), tau, eps, jd)

    steps = magnus_steps(Afun, t)
    vec, ls = propagate(steps, v0)
    return t, vec, ls


def solve_decaying(zeta, nu, eps: float, profile: Profile, tol: float = 1e-10,
                   with_b: bool = False, breakpoints=(), n0: int | None = None,
                   max_steps: int = 2_000_000) -> ScaledSolution:
    """Decaying solution on [0, X_max], refined by step doubling until the
    direction of theta(0) is stable to ``tol``."""
    zeta, nu = complex(zeta), complex(nu)
    jd = None
    if with_b:
        from .stability import jump_data

        jd = jump_data(profile)
    n = n0 or int(max(400, 8 * profile.X_max, 2.0 * eps * profile.X_max / 10.0))
    prev = None
    while True:
        grid = _grid(profile, n, breakpoints)
        t, vec, ls = _solve_on_grid(zeta, nu, eps, profile, grid, jd)
        th0 = vec[-1, :5]
        j = int(np.argmax(np.abs(th0)))
        dirn = th0 / th0[j]
        if prev is not None:
            err = float(np.max(np.abs(dirn - prev))) / 15.0
            if err <= tol:
                break
        prev = dirn
        n *= 2
        if n > max_steps:
            raise StiffnessBudgetError(
                f"step budget exhausted at eps={eps}: refine below {max_steps} steps", 0.0)
    order = np.argsort(t)
    return ScaledSolution(t[order], vec[order], ls[order], "decaying", zeta, nu, float(eps),
                          err, int(grid.size - 1),
                          {"b_tail_bound": _tail_bound(profile, vec, ls, order) if with_b else 0.0})


def _tail_bound(profile, vec, ls, order):
    """Crude bound for the neglected b-integral tail beyond X_max."""
    lam_end = float(profile.lam(profile.X_max))
    return lam_end * float(np.exp(ls[0] - ls[-1])) / max(profile.decay_beta_exact, 1e-300)


def b_integrals(sol: ScaledSolution):
    """(b1, b2) = -int_0^X_max theta . Ax^{-1} g_j dx, in units where theta(0)
    is the stored vector at x = 0 times exp(log_scale(0))."""
    if sol.vec.shape[1] < 7:
        raise ValueError("solution was computed without b accumulators")
    v, ls = sol.theta0()
    k = int(np.argmin(np.abs(sol.x)))
    # accumulators integrate from X_max down to 0: value = int_X^0 = -int_0^X
    return sol.vec[k, 5], sol.vec[k, 6]


# --------------------------------------------------------------------------
# normalizations


def t1_normalized_theta0(sol: ScaledSolution, profile: Profile) -> np.ndarray:
    """theta(0) scaled to unit component along t1(0, zeta)."""
    v, _ = sol.theta0()
    f0 = profile.vn_state_flow
    T0 = t_matrix(f0, sol.zeta, s_principal(sol.zeta, f0.c0sq_eta))
    c = np.linalg.solve(T0, v)
    return v / c[0]


def g_normalized_theta0(sol: ScaledSolution, profile: Profile, x1: float,
                        contour: Contour | None = None) -> np.ndarray:
    """theta(0) times G, where G makes theta(x1) match theta_1(x1).

    theta_1 = exp(eps h1 + k1) T e1 with exponents taken along the detour
    contour (upper half plane for increasing turning points, lower for
    decreasing ones).  Only the t1-component at x1 is matched.
    """
    from .wkb import theta1_approx

    expo, a1 = theta1_approx(x1, sol.zeta, sol.nu, sol.eps, profile, contour, log_form=True)
    v1, ls1 = sol.at(x1)
    f1 = profile.flow(np.float64(x1))
    # project with the frame whose first column is a1 (same branch of s)
    T1 = _frame_with_first_column(f1, sol.zeta, a1)
    c1 = np.linalg.solve(T1, v1)[0]
    v0, ls0 = sol.theta0()
    logG = expo - np.log(c1) - ls1
    return v0 * np.exp(logG + ls0)


def _frame_with_first_column(fp, zeta, a1):
    """T(x, zeta) whose first column equals a1 (chooses the sign of s)."""
    s = s_principal(zeta, fp.c0sq_eta)
    T = t_matrix(fp, zeta, s)
    if np.linalg.norm(T[:, 0] - a1) > np.linalg.norm(T[:, 1] - a1):
        T = t_matrix(fp, zeta, -s)
    return T


# --------------------------------------------------------------------------
# complex continuation


def continue_theta_complex(v_start, log_scale_start: float, contour: Contour, zeta, nu,
                           eps: float, profile: Profile, tol: float = 1e-8,
                           n_per_unit: int | None = None, y_start=None,
                           max_per_unit: int = 200_000) -> ScaledSolution:
    """Integrate theta along ``contour`` starting from the given state.

    Coefficients come from the analytically continued profile.  Each segment
    is parametrized by t in [0, 1] and stepped with the Magnus scheme; the
    step density is doubled until the end direction is stable to ``tol``.
    Arcs much wider than the default detour radius can be too stiff for
    that and end in StiffnessBudgetError.
    """
    zeta, nu = complex(zeta), complex(nu)
    npu = n_per_unit or int(max(200, 4 * eps))
    prev = None
    while True:
        out = _continue_once(v_start, log_scale_start, contour, zeta, nu, eps, profile,
                             npu, y_start)
        end = out.vec[-1]
        dirn = end / end[int(np.argmax(np.abs(end)))]
        if prev is not None:
            err = float(np.max(np.abs(dirn - prev))) / 15.0
            if err <= tol:
                return ScaledSolution(out.x, out.vec, out.log_scale, "continued", zeta, nu,
                                      float(eps), err, out.n_steps)
        prev = dirn
        npu *= 2
        if npu > max_per_unit:
            raise StiffnessBudgetError(f"continuation budget exhausted at eps={eps}",
                                       complex(contour.start))


def _continue_once(v_start, log_scale_start, contour, zeta, nu, eps, profile, npu, y_start):
    tau = zeta * eps + nu
    v = np.asarray(v_start, dtype=complex)
    xs, vecs, lss = [contour.start], [v / np.linalg.norm(v)], [log_scale_start + np.log(np.linalg.norm(v))]
    y = y_start
    for seg in contour.segments:
        n = max(8, int(np.ceil(seg.length * npu)))
        t = np.linspace(0.0, 1.0, n + 1)
        h = np.diff(t)
        mid = 0.5 * (t[1:] + t[:-1])
        tq = np.concatenate([mid - _C * h, mid + _C * h])
        order = np.argsort(tq)
        y_end, ev = continue_log_lambda(profile, Contour((seg,)), {0: tq[order]}, y)
        yq = np.empty_like(ev[0])
        yq[order] = ev[0]
        fq = profile.flow_from_lambda(np.exp(yq))
        Aq = system_pieces(fq).matrix(tau, eps) * seg.deriv(tq)[:, None, None]
        lookup = {float(a): i for i, a in enumerate(tq)}

        def Afun(pts, Aq=Aq, lookup=lookup):
            return Aq[[lookup[float(p)] for p in pts]]

        steps = magnus_steps(Afun, t)
        vec, ls = propagate(steps, vecs[-1])
        ls = ls + lss[-1]
        xs.extend(seg.point(t[1:]))
        vecs.extend(vec[1:])
        lss.extend(ls[1:])
        y = y_end
    return ScaledSolution(np.asarray(xs), np.asarray(vecs), np.asarray(lss), "continued",
                          zeta, nu, float(eps), 0.0, len(xs) - 1)

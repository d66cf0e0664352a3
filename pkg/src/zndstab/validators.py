"""Fixed-point validators: the gap lemma on an unbounded interval and the
method of the parameter problem on a real interval.

Both constructions are run numerically on a grid so that the contraction
and error estimates they rest on can be measured rather than assumed.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.linalg import expm

from .frame import eigenvalues, e_matrix, s_principal, system_pieces, t_matrix
from .profile import Profile


class GapViolationError(ValueError):
    """No admissible path family: Re(mu_j - mu_k) has the wrong sign."""

    def __init__(self, j: int, x: float, msg: str):
        super().__init__(f"{msg} (mode {j}, x = {x:.6g})")
        self.j = j
        self.x = x


def _phi_blocks(X):
    """exp(X), phi1(X), phi2(X) for a stack of square matrices."""
    n, d, _ = X.shape
    I = np.broadcast_to(np.eye(d, dtype=complex), (n, d, d))
    big = np.zeros((n, 3 * d, 3 * d), dtype=complex)
    big[:, :d, :d] = X
    big[:, :d, d:2 * d] = I
    big[:, d:2 * d, 2 * d:] = I
    E = expm(big)
    return E[:, :d, :d], E[:, :d, d:2 * d], E[:, :d, 2 * d:]


def _affine_sweep(E, P1, P2, dt, f, y0, reverse: bool):
    """y' = A y + f along a grid with exponential steps.

    E, P1, P2 are the step blocks for consecutive intervals in the order
    they are traversed; ``f`` is sampled at the grid points.
    """
    n = f.shape[0]
    y = np.empty_like(f)
    order = range(n - 1, 0, -1) if reverse else range(0, n - 1)
    start = n - 1 if reverse else 0
    y[start] = y0
    for k, i in enumerate(order):
        j = i - 1 if reverse else i + 1
        y[j] = E[k] @ y[i] + dt[k] * (P1[k] @ f[i] + P2[k] @ (f[j] - f[i]))
    return y


# --------------------------------------------------------------------------
# gap lemma


@dataclass
class GapLemmaReport:
    x: np.ndarray
    V: np.ndarray
    h: float
    contraction: list
    increments: list
    sup_error: float
    C1: float
    converged: bool
    contraction_bound: float = float("nan")
    hypotheses: dict = field(default_factory=dict)

    @property
    def contraction_factor(self) -> float:
        c = [q for q in self.contraction if np.isfinite(q)]
        return max(c) if c else 0.0


def gap_lemma_iterate(M, Theta, V_star, h: float, delta_star: float, x,
                      max_iter: int = 40, tol: float = 1e-13) -> GapLemmaReport:
    """Iterate V = V* - int_x^oo F(x<-y) Theta V dy~ on a slow grid.

    ``M`` and ``Theta`` are (n, N, N) samples in the fast variable x~ = x/h
    at the slow points ``x`` (increasing; the last point stands in for
    infinity).  The flow F of V' = M V is built from exponential steps.
    """
    x = np.asarray(x, dtype=float)
    M = np.asarray(M, dtype=complex)
    Theta = np.asarray(Theta, dtype=complex)
    V_star = np.asarray(V_star, dtype=complex)
    n, N, _ = M.shape
    dx = np.diff(x)[::-1]  # traversed from the right
    Mm = 0.5 * (M[1:] + M[:-1])[::-1]
    dt = -dx / h  # fast-variable step, negative going left
    E, P1, P2 = _phi_blocks(Mm * dt[:, None, None])

    hyp = {
        "max_abs_M_Vstar": float(np.max(np.abs(M @ V_star))),
        "neutral_min_hermitian": float(np.min(np.linalg.eigvalsh(
            0.5 * (M[:, 1:, 1:] + np.conj(np.swapaxes(M[:, 1:, 1:], 1, 2)))))),
        "theta_over_h2": float(np.max(np.abs(Theta) * np.exp(delta_star * x)[:, None, None]) / h**2),
        "theta_decay_fit": _decay_fit(x, np.max(np.abs(Theta), axis=(1, 2))),
    }

    # sup_x int_x^oo |F(x<-y)| |Theta(y)| dy~, bounded step by step
    nE = np.linalg.norm(E, 2, axis=(1, 2))
    nT = np.linalg.norm(Theta, 2, axis=(1, 2))[::-1]
    c, kappa = 0.0, 0.0
    for k in range(n - 1):
        c = nE[k] * c + 0.5 * abs(dt[k]) * (nT[k + 1] + nE[k] * nT[k])
        kappa = max(kappa, c)

    V = np.broadcast_to(V_star, (n, N)).copy()
    incs, contr = [], []
    converged = False
    for _ in range(max_iter):
        f = np.einsum("nij,nj->ni", Theta, V)
        U = _affine_sweep(E, P1, P2, dt, f, np.zeros(N, dtype=complex), reverse=True)
        Vn = V_star[None, :] + U
        inc = float(np.max(np.abs(Vn - V)))
        if incs:
            contr.append(inc / incs[-1] if incs[-1] > 0 else 0.0)
        incs.append(inc)
        V = Vn
        if inc <= tol * max(1.0, float(np.max(np.abs(V_star)))):
            converged = True
            break
    err = np.max(np.abs(V - V_star[None, :]), axis=1)
    nv = float(np.linalg.norm(V_star))
    C1 = float(np.max(err * np.exp(delta_star * x)) / (h * nv))
    return GapLemmaReport(x, V, float(h), contr, incs, float(err.max()), C1, converged,
                          float(kappa), hyp)


def _decay_fit(x, a):
    good = a > 1e-300
    if np.count_nonzero(good) < 3:
        return float("inf")
    xs, ys = x[good], np.log(a[good])
    half = xs >= xs[0] + 0.5 * (xs[-1] - xs[0])
    if np.count_nonzero(half) < 3:
        half = good[good]
    p = np.polyfit(xs[half], ys[half], 1)
    return float(-p[0])


def _stencil(x, eta):
    """Five-point stencil offsets; forward near x = 0."""
    off = np.array([-2, -1, 0, 1, 2], dtype=float)
    fwd = np.array([0, 1, 2, 3, 4], dtype=float)
    pts = np.where((x < 2 * eta)[:, None], x[:, None] + fwd * eta, x[:, None] + off * eta)
    return pts


def _d_stencil(F, x, eta):
    """Derivatives at three consecutive stencil slots, shape (n, 3, ...):
    slots 1..3 (central) or 0..2 (forward, near x = 0)."""
    c = (F[:, 2:] - F[:, :-2]) / (2 * eta)
    f = (-3 * F[:, :3] + 4 * F[:, 1:4] - F[:, 2:5]) / (2 * eta)
    fwd = (x < 2 * eta).reshape((-1,) + (1,) * (F.ndim - 1))
    return np.where(fwd, f, c)


def _first_mode_frame(fp, zeta, nu, eps):
    """Phi0 + h Phi1 with its mu1* eigenvalue and right/left eigenvectors."""
    sp = system_pieces(fp)
    A = sp.matrix(zeta * eps + nu, eps) / eps
    ev, Vr = np.linalg.eig(A)
    zn = zeta + nu / eps
    target = eigenvalues(fp, zn, s_principal(zn, fp.c0sq_eta))[0]
    k = np.argmin(np.abs(ev - np.asarray(target)[..., None]), axis=-1)
    Vi = np.linalg.inv(Vr)
    idx = np.arange(A.shape[0])
    r = Vr[idx, :, k]
    ell = Vi[idx, k, :]
    scale = r[:, 2] / (-1j)
    r = r / scale[:, None]
    ell = ell * scale[:, None]
    mu = ev[idx, k]
    return A, mu, r, ell


@dataclass
class ConjugatedForm:
    x: np.ndarray
    M: np.ndarray
    Theta: np.ndarray
    V_star: np.ndarray
    mu_sharp: np.ndarray
    frame: np.ndarray  # theta = frame @ V * exp(int mu_sharp dx~)
    h: float

    def theta_direction(self, V, k: int = 0):
        th = self.frame[k] @ np.asarray(V)[k]
        return th / np.linalg.norm(th)


def conjugated_form(zeta, nu, eps: float, profile: Profile, x) -> ConjugatedForm:
    """Operators (M, Theta, V*) of dV/dx~ = (M + Theta) V for the decaying mode.

    Phi0 + h Phi1 is block-diagonalized exactly by its mu1* eigenvector and
    spectral projector, and the O(h) coupling left by the x-dependence of
    that basis is removed to O(h^2) by one further near-identity step.
    """
    zeta, nu = complex(zeta), complex(nu)
    x = np.asarray(x, dtype=float)
    n = x.size
    eta = 1e-4 * max(1.0, profile.X_max / 50.0)
    pts = _stencil(x, eta)  # (n, 5)
    fp = profile.flow(pts.ravel())
    A, mu, r, ell = _first_mode_frame(fp, zeta, nu, eps)
    A = A.reshape(n, 5, 5, 5)
    mu = mu.reshape(n, 5)
    r = r.reshape(n, 5, 5)
    ell = ell.reshape(n, 5, 5)
    # complement basis: the other columns of T pushed through the spectral
    # projector, which keeps the lower block close to diagonal
    T = t_matrix(fp, zeta, s_principal(zeta, fp.c0sq_eta)).reshape(n, 5, 5, 5)
    P = np.eye(5)[None, None] - r[..., :, None] * ell[..., None, :]
    S = np.concatenate([r[..., :, None], P @ T[..., :, 1:]], axis=-1)  # (n, 5, 5, 5)
    Si = np.linalg.inv(S)
    B = Si @ A @ S
    B[..., 0, 1:] = 0.0
    B[..., 1:, 0] = 0.0
    dS = _d_stencil(S, x, eta)  # (n, 3, 5, 5)
    ii = np.arange(n)
    slots = np.where(x < 2 * eta, 0, 1)[:, None] + np.arange(3)[None, :]
    R = -Si[ii[:, None], slots] @ dS  # slow-variable coupling
    Bm = B[ii[:, None], slots]
    G = Bm[..., 1:, 1:] - Bm[..., :1, :1] * np.eye(4)
    K = np.zeros_like(R)
    K[..., 0, 1:] = np.linalg.solve(np.swapaxes(G, -1, -2), R[..., 0, 1:][..., None])[..., 0]
    K[..., 1:, 0] = -np.linalg.solve(G, R[..., 1:, 0][..., None])[..., 0]
    dK = np.where((x < 2 * eta)[:, None, None],
                  (-3 * K[:, 0] + 4 * K[:, 1] - K[:, 2]) / (2 * eta),
                  (K[:, 2] - K[:, 0]) / (2 * eta))
    # quantities at the grid point itself (slot 2, or slot 0 when forward)
    at = np.where(x < 2 * eta, 0, 1)
    Kx, Rx, Bx = K[ii, at], R[ii, at], Bm[ii, at]
    h = 1.0 / eps
    I = np.eye(5)
    J = I + h * Kx
    Ns = np.linalg.solve(J, (eps * Bx + Rx) @ J - h * dK)
    Nf = h * Ns
    mu_sharp = Nf[:, 0, 0].copy()
    blk = np.zeros_like(Nf)
    blk[:, 0, 0] = Nf[:, 0, 0]
    blk[:, 1:, 1:] = Nf[:, 1:, 1:]
    Theta = Nf - blk
    M = blk - mu_sharp[:, None, None] * I
    M[:, 0, 0] = 0.0
    V_star = np.zeros(5, dtype=complex)
    V_star[0] = 1.0
    frame = S[ii, slots[:, 0] + at] @ J
    return ConjugatedForm(x, M, Theta, V_star, mu_sharp, frame, h)


# --------------------------------------------------------------------------
# method of the parameter problem on a real interval


@dataclass
class MppReport:
    x: np.ndarray
    omega: np.ndarray  # theta e^{-q_k} in block-WKB coordinates
    theta_scaled: np.ndarray  # theta e^{-q_k}
    approx_scaled: np.ndarray  # theta_k e^{-q_k}
    k: int
    eps: float
    error: float  # sup |theta - theta_k| / |e^{q_k}|
    leading_error: float  # same against the leading term T e_k
    contraction: list
    iterations: int
    converged: bool
    anchors: dict


_GROUPS = ((0,), (1,), (2, 3, 4))


def _mpp_data(zeta, nu, eps, profile, x, s_sign):
    fp = profile.flow(x)
    s = s_sign * s_principal(zeta, fp.c0sq_eta)
    mu1, mu2, mu3 = eigenvalues(fp, zeta, s)
    lam = np.stack([mu1, mu2, mu3, mu3, mu3], axis=-1)
    T = t_matrix(fp, zeta, s)
    E = e_matrix(fp, zeta, nu, s)
    return lam, T, E


def mpp_iterate(zeta, nu, eps: float, profile: Profile, a: float, b: float, k: int = 1,
                anchors="right", n: int | None = None, s_sign: float = 1.0,
                max_iter: int = 60, tol: float = 1e-12, gap_tol: float = 1e-9) -> MppReport:
    """Exact solution near the approximate theta_k on [a, b].

    The approximate solutions are first-order block-WKB modes: the 3x3 block
    of the repeated eigenvalue is carried by its own fundamental matrix.
    ``anchors`` is 'right', 'left', 'auto' or a dict {j: 'left'|'right'}
    giving where each P_j path starts; 'right' is the natural choice when
    theta_k is known near b and continued leftward.
    """
    if k not in (1, 2):
        raise ValueError("k must be 1 or 2")
    zeta, nu = complex(zeta), complex(nu)
    kk = k - 1
    if n is None:
        lam0, _, _ = _mpp_data(zeta, nu, eps, profile, np.linspace(a, b, 64), s_sign)
        spread = float(np.max(np.abs(lam0 - lam0[:, kk:kk + 1])))
        n = int(max(400, 10 * eps * spread * (b - a)))
    x = np.linspace(a, b, n + 1)
    lam, T, E = _mpp_data(zeta, nu, eps, profile, x, s_sign)

    # neutral gap and path directions
    gi = {g[0]: g for g in _GROUPS}
    side = {}
    for g in _GROUPS:
        j = g[0]
        if j == kk:
            continue
        d = (lam[:, j] - lam[:, kk]).real
        scale = gap_tol * max(1.0, float(np.max(np.abs(lam))))
        want = anchors.get(j + 1, "auto") if isinstance(anchors, dict) else anchors
        ok_right = bool(np.all(d >= -scale))
        ok_left = bool(np.all(d <= scale))
        if want == "auto":
            if ok_right:
                want = "right"
            elif ok_left:
                want = "left"
            else:
                i = int(np.argmax(np.abs(d) * (np.sign(d) != np.sign(d[0]))))
                raise GapViolationError(j + 1, float(x[i]),
                                        f"Re(mu_{j + 1} - mu_{k}) changes sign: no neutral gap")
        elif want == "right" and not ok_right:
            i = int(np.nonzero(d < -scale)[0][-1])  # first violation seen from b
            raise GapViolationError(j + 1, float(x[i]),
                                    f"Re(h_{j + 1} - h_{k}) increases leftward from the anchor")
        elif want == "left" and not ok_left:
            i = int(np.nonzero(d > scale)[0][0])
            raise GapViolationError(j + 1, float(x[i]),
                                    f"Re(h_{j + 1} - h_{k}) increases rightward from the anchor")
        side[j] = want
    own = anchors if anchors in ("left", "right") else "right"
    side[kk] = own

    # first-order off-block correction K and the exact remainder R
    h = 1.0 / eps
    K = np.zeros_like(E)
    for g in _GROUPS:
        for f in _GROUPS:
            if g is f:
                continue
            for i in g:
                for j in f:
                    K[:, i, j] = E[:, i, j] / (lam[:, j] - lam[:, i])
    dK = np.gradient(K, x, axis=0, edge_order=2)
    D = np.zeros_like(E)
    for g in _GROUPS:
        ix = np.ix_(range(len(x)), g, g)
        D[ix] = E[ix]
    Lm = lam[:, :, None] * np.eye(5)
    J = np.eye(5) + h * K
    Rr = np.linalg.solve(J, (eps * Lm + E) @ J - h * dK) - eps * Lm - D

    # per-group step blocks for omega_g' = (eps(mu_g - mu_k) + D_gg - E_kk) omega_g + f_g
    steps = {}
    for g in _GROUPS:
        j = g[0]
        Ag = (eps * (lam[:, j] - lam[:, kk]) - E[:, kk, kk])[:, None, None] * np.eye(len(g)) \
            + D[:, g][:, :, g]
        Am = 0.5 * (Ag[1:] + Ag[:-1])
        dx = np.diff(x)
        rev = side[j] == "right"
        if rev:
            Am, dt = Am[::-1], -dx[::-1]
        else:
            dt = dx
        steps[j] = (_phi_blocks(Am * dt[:, None, None]), dt, rev)

    omega = np.zeros((x.size, 5), dtype=complex)
    ek = np.zeros(5, dtype=complex)
    ek[kk] = 1.0
    contr, incs = [], []
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        f = np.einsum("nij,nj->ni", Rr, omega)
        new = np.empty_like(omega)
        for g in _GROUPS:
            (E_, P1, P2), dt, rev = steps[g[0]]
            y0 = ek[list(g)]
            new[:, list(g)] = _affine_sweep(E_, P1, P2, dt, f[:, list(g)], y0, rev)
        inc = float(np.max(np.abs(new - omega)))
        if incs and incs[-1] > 0:
            contr.append(inc / incs[-1])
        incs.append(inc)
        omega = new
        if it > 1 and inc <= tol:
            converged = True
            break

    Tk = T @ J
    th = np.einsum("nij,nj->ni", Tk, omega)
    ap = Tk[:, :, kk]
    err = float(np.max(np.linalg.norm(th - ap, axis=1)))
    lead = float(np.max(np.linalg.norm(th - T[:, :, kk], axis=1)))
    return MppReport(x, omega, th, ap, k, float(eps), err, lead, contr, it, converged,
                     {j + 1: v for j, v in side.items()})


def mpp_phase(zeta, eps: float, profile: Profile, x, k: int = 1, s_sign: float = 1.0):
    """eps h_k(x) relative to x[0] on a real grid (trapezoid)."""
    fp = profile.flow(np.asarray(x, dtype=float))
    mus = eigenvalues(fp, complex(zeta), s_sign * s_principal(complex(zeta), fp.c0sq_eta))
    return eps * cumulative_trapezoid(mus[k - 1], x, initial=0.0)

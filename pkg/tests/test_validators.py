import numpy as np
import pytest

from zndstab.acceptance import unstable_zeta_i
from zndstab.frame import build_system, find_turning_points
from zndstab.resolvent import _grid, magnus_steps, propagate, solve_decaying
from zndstab.validators import (
    GapViolationError,
    conjugated_form,
    gap_lemma_iterate,
    mpp_iterate,
)
from zndstab.wkb import default_delta

M_SYN = np.diag([0.0, 1.0, 2.0 + 1.0j]).astype(complex)
V_STAR = np.array([1.0, 0.0, 0.0], dtype=complex)


def _synthetic(h, beta=1.0, n=2001, L=40.0, neutral=1.0):
    x = np.linspace(0.0, L, n)
    C = np.array([[neutral, 1.0, 0.5], [1.0, 0.0, 0.2], [0.3, 0.4, 0.0]], dtype=complex)
    Theta = h * h * np.exp(-beta * x)[:, None, None] * C
    M = np.broadcast_to(M_SYN, (n, 3, 3))
    return M, Theta, x


def test_gap_lemma_trivial_perturbation():
    M, Theta, x = _synthetic(0.1)
    r = gap_lemma_iterate(M, 0 * Theta, V_STAR, 0.1, 0.5, x)
    assert r.converged and r.sup_error == 0.0
    assert len(r.increments) == 1


def test_gap_lemma_error_scales_with_h():
    errs, kap = [], []
    for h in (0.04, 0.02, 0.01):
        M, Theta, x = _synthetic(h)
        r = gap_lemma_iterate(M, Theta, V_STAR, h, 0.5, x)
        assert r.converged
        assert r.contraction_factor <= r.contraction_bound
        assert r.hypotheses["max_abs_M_Vstar"] == 0.0
        errs.append(r.sup_error)
        kap.append(r.contraction_bound)
    for a, b in zip(errs[:-1], errs[1:]):
        assert a / b == pytest.approx(2.0, rel=0.2)
    for a, b in zip(kap[:-1], kap[1:]):
        assert a / b == pytest.approx(2.0, rel=0.2)


def test_gap_lemma_off_block_forcing_is_second_order():
    # with no neutral-to-neutral term the damped modes respond quasi-statically
    errs = []
    for h in (0.04, 0.02, 0.01):
        M, Theta, x = _synthetic(h, neutral=0.0)
        errs.append(gap_lemma_iterate(M, Theta, V_STAR, h, 0.5, x).sup_error)
    for a, b in zip(errs[:-1], errs[1:]):
        assert a / b == pytest.approx(4.0, rel=0.2)


def test_gap_lemma_fixed_point_solves_ode():
    h = 0.02
    M, Theta, x = _synthetic(h)
    r = gap_lemma_iterate(M, Theta, V_STAR, h, 0.5, x)
    # V' = (M + Theta) V in the fast variable; check with centred differences
    dV = np.gradient(r.V, x / h, axis=0)
    rhs = np.einsum("nij,nj->ni", M + Theta, r.V)
    assert np.max(np.abs(dV - rhs)[5:-5]) < 1e-5 * h


def test_conjugated_form_reproduces_decaying_solution(stable_I):
    x = _grid(stable_I, 1500)
    zeta, nu, eps = 1 + 0.5j, 0.5, 20.0
    cf = conjugated_form(zeta, nu, eps, stable_I, x)
    assert np.max(np.abs(cf.Theta)) < 50 * cf.h**2
    r = gap_lemma_iterate(cf.M, cf.Theta, cf.V_star, cf.h, 0.05, x)
    th = solve_decaying(zeta, nu, eps, stable_I).theta0()[0]
    d = cf.theta_direction(r.V, 0)
    ph = np.vdot(d, th) / abs(np.vdot(d, th))
    assert np.linalg.norm(d * ph - th / np.linalg.norm(th)) < 1e-8


def _case_I_interval(prof):
    tp = find_turning_points(unstable_zeta_i(), prof)[-1]
    return tp.x_star - 3 * default_delta(prof, tp.x_star)


def test_mpp_solution_is_exact(unstable_I):
    zi, nu, eps = unstable_zeta_i(), 0.1, 40.0
    b = _case_I_interval(unstable_I)
    r = mpp_iterate(1j * zi, nu, eps, unstable_I, 0.0, b, k=1, n=4000)
    assert r.converged and r.error < r.leading_error

    def Afun(p):
        return build_system(unstable_I.flow(np.real(p)), 1j * zi, nu, eps)

    t = np.linspace(b, 0.0, 4001)
    vec, _ = propagate(magnus_steps(Afun, t), r.theta_scaled[-1])
    a, c = vec[-1], r.theta_scaled[0]
    a, c = a / a[np.argmax(np.abs(a))], c / c[np.argmax(np.abs(a))]
    # second-order grid error of the validator itself (about 1e-8 here)
    assert np.max(np.abs(a - c)) < 2e-8


def test_mpp_error_decreases_like_one_over_eps(unstable_I):
    zi, b = unstable_zeta_i(), _case_I_interval(unstable_I)
    lead = [mpp_iterate(1j * zi, 0.1, e, unstable_I, 0.0, b).leading_error for e in (40, 80, 160)]
    assert lead[1] / lead[2] == pytest.approx(2.0, rel=0.2)


def test_mpp_refuses_case_D_second_mode(prof_D):
    tp = find_turning_points(1.0, prof_D)[-1]
    b = tp.x_star - 3 * default_delta(prof_D, tp.x_star)
    with pytest.raises(GapViolationError) as exc:
        mpp_iterate(1j, 0.5, 40.0, prof_D, 0.0, b, k=2)
    assert exc.value.j == 1 and 0.0 <= exc.value.x <= b
    # the same mode with every path anchored where the gap allows it
    with pytest.raises(GapViolationError):
        mpp_iterate(1j, 0.5, 40.0, prof_D, 0.0, b, k=2, anchors={1: "right"})


def test_mpp_auto_anchors(prof_D):
    tp = find_turning_points(1.0, prof_D)[-1]
    b = tp.x_star - 3 * default_delta(prof_D, tp.x_star)
    r = mpp_iterate(1j, 0.5, 40.0, prof_D, 0.0, b, k=2, anchors="auto")
    assert r.converged
    assert r.anchors[1] == "left"

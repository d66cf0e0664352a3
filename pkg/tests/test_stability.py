from dataclasses import replace

import numpy as np
import pytest

from zndstab.frame import exceptional_values
from zndstab.resolvent import b_integrals, solve_decaying
from zndstab.stability import (
    ConsistencyError,
    L_closed_forms,
    L_dual,
    L_inner_products,
    V_original,
    V_simple,
    jump_data,
    von_neumann_check,
)


def test_L_forms_agree(stable_I, rng):
    jd = jump_data(stable_I)
    z = rng.uniform(0, 4, 50) + 1j * rng.uniform(-4, 4, 50)
    c1, c2 = L_closed_forms(z, jd)
    i1, i2 = L_inner_products(z, stable_I, jd)
    assert np.allclose(c1, i1, rtol=1e-10)
    assert np.allclose(c2, i2, rtol=1e-10)


def test_L1_positive_and_increasing_above_band(stable_I):
    ce0 = float(np.sqrt(stable_I.vn_state_flow.c0sq_eta))
    zi = np.linspace(1.001 * ce0, 6 * ce0, 200)
    L1, _ = L_dual(1j * zi, stable_I)
    assert np.all(np.abs(L1.imag) < 1e-10 * np.abs(L1))
    assert np.all(L1.real > 0) and np.all(np.diff(L1.real) > 0)


def test_dual_gate_detects_corruption(stable_I):
    jd = jump_data(stable_I)
    bad = replace(jd, h_t=jd.h_t * (1 + 1e-6))
    with pytest.raises(ConsistencyError):
        L_dual(np.array([1j, 2 + 1j]), stable_I, bad)


def test_V_forms_agree(stable_I):
    jd = jump_data(stable_I)
    for zeta, nu, eps in ((1 + 0.5j, 0.5, 20.0), (2j, 0.2, 40.0)):
        sol = solve_decaying(zeta, nu, eps, stable_I, with_b=True, tol=1e-11)
        th0, _ = sol.theta0()
        b1, b2 = b_integrals(sol)
        vo = V_original(zeta * eps + nu, eps, b1, b2, th0, jd)
        vs = V_simple(th0, zeta, nu, eps, jd, stable_I)
        assert abs(vo.V - vs.V) <= 1e-4 * abs(vs.V)
        assert vs.L == pytest.approx(vs.V / eps)


def test_nonreactive_shock_is_stable(stable_I):
    ok, mn = von_neumann_check(stable_I)
    assert ok and mn > 0
    assert exceptional_values(stable_I)[0] > 0

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from zndstab.acceptance import unstable_zeta_i
from zndstab.contour import detour_contour, real_segment
from zndstab.frame import build_system, find_turning_points
from zndstab.resolvent import (
    StiffnessBudgetError,
    continue_theta_complex,
    limit_decomposition,
    solve_decaying,
)
from zndstab.wkb import default_delta


def _dir(v):
    return v / v[np.argmax(np.abs(v))]


@pytest.mark.parametrize("zeta,nu,eps", [(1 + 0.5j, 0.5, 5.0), (2j, 0.3, 8.0)])
def test_oracle_matches_independent_integrator(stable_I, zeta, nu, eps):
    sol = solve_decaying(zeta, nu, eps, stable_I, tol=1e-11)
    _, V, k = limit_decomposition(zeta, nu, eps, stable_I)

    def rhs(x, y):
        return build_system(stable_I.flow(np.float64(x)), zeta, nu, eps) @ y

    ref = solve_ivp(rhs, (stable_I.X_max, 0.0), V[:, k].astype(complex), method="DOP853",
                    rtol=1e-12, atol=1e-14)
    assert np.max(np.abs(_dir(sol.theta0()[0]) - _dir(ref.y[:, -1]))) < 1e-8


def test_limit_mode_is_most_decaying(stable_I):
    ev, _, k = limit_decomposition(1 + 0.5j, 0.5, 40.0, stable_I)
    assert np.all(np.delete(ev, k).real > ev[k].real)


def test_step_budget(stable_I):
    with pytest.raises(StiffnessBudgetError):
        solve_decaying(1 + 0.5j, 0.5, 80.0, stable_I, tol=1e-14, max_steps=2000)


def test_log_scale_tracks_growth(stable_I):
    # theta = vec exp(log_scale); the stored vectors stay normalized
    sol = solve_decaying(1 + 0.5j, 0.5, 40.0, stable_I)
    assert np.allclose(np.linalg.norm(sol.theta, axis=1), 1.0, atol=1e-12)
    assert sol.log_scale[0] > sol.log_scale[-1]


def test_complex_continuation_on_axis(stable_I):
    zeta, nu, eps = 1 + 0.5j, 0.5, 40.0
    sol = solve_decaying(zeta, nu, eps, stable_I, breakpoints=[5.0], tol=1e-11)
    v, ls = sol.at(5.0)
    c = continue_theta_complex(v[:5], ls, real_segment(5.0, 0.0), zeta, nu, eps, stable_I,
                               tol=1e-10)
    assert np.max(np.abs(_dir(c.vec[-1]) - _dir(sol.theta0()[0]))) < 1e-9
    assert c.log_scale[-1] + np.log(np.abs(c.vec[-1]).max()) == pytest.approx(
        sol.theta0()[1] + np.log(np.abs(sol.theta0()[0]).max()), abs=1e-8)


def test_detours_are_homotopic(unstable_I):
    zi, eps = unstable_zeta_i(), 40.0
    xs = find_turning_points(zi, unstable_I)[-1].x_star
    d = default_delta(unstable_I, xs)
    x1 = xs + 2 * d
    sol = solve_decaying(1j * zi, 0.1, eps, unstable_I, breakpoints=[x1], tol=1e-11)
    v, ls = sol.at(x1)
    ref = _dir(sol.theta0()[0])
    for r in (0.5 * d, d):
        c = continue_theta_complex(v[:5], ls, detour_contour(x1, 0.0, xs, r, upper=True),
                                   1j * zi, 0.1, eps, unstable_I, tol=1e-10)
        assert np.max(np.abs(_dir(c.vec[-1]) - ref)) < 1e-8

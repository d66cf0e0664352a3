import numpy as np
import pytest

from zndstab.acceptance import class_III_band, unstable_zeta_i
from zndstab.frame import FrameError, find_turning_points
from zndstab.wkb import (
    UnsupportedFrequencyError,
    alpha_by_contour,
    alpha_reflection,
    beta1_gauss_jacobi,
    beta_integrals,
    default_contour,
    default_delta,
    theta_zero_asymptotic,
)


def test_beta1_two_quadratures_agree(unstable_I):
    lo, hi = class_III_band(unstable_I)
    for f in (0.2, 0.5, 0.9):
        zi = lo + f * (hi - lo)
        b = beta_integrals(zi, 0.0, unstable_I)
        assert b.beta1 == pytest.approx(beta1_gauss_jacobi(zi, unstable_I), rel=1e-10)
        assert b.beta1 > 0 and b.beta3 > 0


def test_beta_quadrature_converged(unstable_I):
    zi = unstable_zeta_i()
    a = beta_integrals(zi, 0.0, unstable_I)
    b = beta_integrals(zi, 0.0, unstable_I, n_panels=48, order=32)
    assert (a.beta1, a.beta2, a.beta3) == pytest.approx((b.beta1, b.beta2, b.beta3), rel=1e-8)


def test_alpha_closed_form_vs_contour(unstable_I):
    zi, eps, nu = unstable_zeta_i(), 50.0, 0.2 + 0.1j
    a = alpha_reflection(eps, zi, nu, unstable_I)
    tp = find_turning_points(zi, unstable_I)[-1]
    d = default_delta(unstable_I, tp.x_star)
    for r in (2 * d, 3 * d):
        c = alpha_by_contour(eps, zi, nu, unstable_I, radius=r)
        assert abs(c - a) <= 1e-6 * abs(a)


def test_alpha_rejects_case_D_and_bad_radius(prof_D, unstable_I):
    lo, hi = class_III_band(prof_D)
    with pytest.raises(UnsupportedFrequencyError):
        beta_integrals(0.5 * (lo + hi), 0.0, prof_D)
    zi = unstable_zeta_i()
    xs = find_turning_points(zi, unstable_I)[-1].x_star
    with pytest.raises(FrameError):
        alpha_by_contour(10.0, zi, 0.0, unstable_I, radius=1.1 * xs)


def test_exceptional_value_is_rejected(unstable_I):
    lo, _ = class_III_band(unstable_I)
    with pytest.raises(UnsupportedFrequencyError):
        theta_zero_asymptotic(1j * lo, 0.0, 20.0, unstable_I)


def test_theta_zero_regimes(unstable_I, prof_D):
    zi = unstable_zeta_i()
    r = theta_zero_asymptotic(1j * zi, 0.1, 30.0, unstable_I)
    assert r.regime == "caseI" and r.alpha is not None
    assert abs(r.alpha) == pytest.approx(abs(alpha_reflection(30.0, zi, 0.1, unstable_I)))
    assert theta_zero_asymptotic(1 + 1j, 0.1, 30.0, unstable_I).regime == "not_class_III"
    lo, hi = class_III_band(prof_D)
    assert theta_zero_asymptotic(0.5j * (lo + hi), 0.1, 30.0, prof_D).regime == "caseD"
    with pytest.raises(UnsupportedFrequencyError):
        theta_zero_asymptotic(-1j * zi, 0.1, 30.0, unstable_I)


def test_default_contour_detours(unstable_I):
    zi = unstable_zeta_i()
    xs = find_turning_points(zi, unstable_I)[-1].x_star
    c = default_contour(2 * xs, 1j * zi, unstable_I)
    assert len(c.segments) == 3
    pts = c.segments[1].point(np.linspace(0, 1, 9))
    assert np.all(pts.imag >= 0)
    with pytest.raises(FrameError):
        default_contour(2 * xs, 1j * zi, unstable_I, radius=1.5 * xs)

import math

import numpy as np
import pytest

from zndstab.acceptance import class_III_band, unstable_zeta_i
from zndstab.eos import EosModel
from zndstab.instability import (
    V_a,
    caseM_K_criterion,
    evaluate_criterion,
    predicted_eps,
    rouche_verify,
    sweep,
    winding_number,
)
from zndstab.profile import calibrate_rate, integrate_profile
from zndstab.wkb import UnsupportedFrequencyError


@pytest.mark.parametrize("f,expect", [
    (lambda z: z - 0.1, 1),
    (lambda z: (z - 0.1j) ** 2, 2),
    (lambda z: z - 2.0, 0),
    (lambda z: 1.0 / (z + 0.2), -1),
    (lambda z: np.exp(3j * z), 0),
])
def test_winding_number(f, expect):
    w, mn, turns = winding_number(f, 0.0, 1.0)
    assert w == expect
    assert turns == pytest.approx(expect, abs=1e-6)


def test_winding_refuses_zero_on_circle():
    w, mn, _ = winding_number(lambda z: z - 1.0, 0.0, 1.0)
    assert w is None


def test_stable_configuration(stable_I):
    lo, hi = class_III_band(stable_I)
    v = evaluate_criterion(0.5 * (lo + hi), stable_I)
    assert v.verdict == "stable_hf"
    assert v.criterion_lhs < v.criterion_rhs
    assert evaluate_criterion(hi + 1.0, stable_I).regime == "not_class_III"
    assert evaluate_criterion(lo, stable_I).verdict == "excluded"


def test_case_D_is_stable(prof_D):
    lo, hi = class_III_band(prof_D)
    v = evaluate_criterion(0.5 * (lo + hi), prof_D)
    assert v.verdict == "stable_hf" and v.regime == "decreasing_turning_point"


def test_unstable_locus(unstable_I):
    zi = unstable_zeta_i()
    v = evaluate_criterion(zi, unstable_I, eps_max=100.0)
    assert v.verdict == "unstable_hf"
    assert v.criterion_lhs > v.criterion_rhs
    gaps = np.diff(v.eps_list)
    assert np.allclose(gaps, 2 * math.pi / v.betas.beta1, rtol=0, atol=1e-10)
    e = v.eps_list[1]
    assert abs(V_a(v.nu_star, zi, e, v.L1, v.L2, v.betas)) < 1e-10 * abs(v.L1)
    w = rouche_verify(zi, v.nu_star, e, 0.05, "Va", unstable_I, v)
    c = rouche_verify(zi, v.nu_star + 0.5, e, 0.05, "Va", unstable_I, v)
    assert (w.winding, c.winding) == (1, 0)


def test_predicted_eps_window(unstable_I):
    zi = unstable_zeta_i()
    v = evaluate_criterion(zi, unstable_I, eps_max=300.0)
    sub = predicted_eps(v.betas, v.nu_star, v.L2, 50.0, 150.0)
    assert sub == [e for e in v.eps_list if 50.0 <= e <= 150.0]
    shifted = predicted_eps(v.betas, v.nu_star + 0.3j, v.L2, 0.0, 300.0)
    period = 2 * math.pi / v.betas.beta1
    n = (np.array(shifted) + 0.3 * v.betas.beta3 / v.betas.beta1 - v.eps_list[0]) / period
    assert np.allclose(n, np.round(n), atol=1e-9)
    assert shifted[0] > 0 and shifted[0] - period <= 0


def test_sweep_deterministic(unstable_I):
    lo, hi = class_III_band(unstable_I)
    grid = np.linspace(lo + 0.5 * (hi - lo), hi - 0.01 * (hi - lo), 8)
    a = sweep(unstable_I, grid, jobs=1).to_dict()
    b = sweep(unstable_I, grid, jobs=4).to_dict()
    assert a == b
    assert a["unstable_interval"] is not None


def test_K_criterion():
    m = calibrate_rate(EosModel(gamma=1.3, q=3.0, E_act=10.0), 3.0)
    prof = integrate_profile(m, 3.0)
    k = caseM_K_criterion(prof)
    assert np.isfinite(k["K"]) and k["x_M"] == pytest.approx(prof.x_M)


def test_K_criterion_needs_type_M(stable_I):
    with pytest.raises(UnsupportedFrequencyError):
        caseM_K_criterion(stable_I)

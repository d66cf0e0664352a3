import numpy as np
import pytest

from zndstab.contour import continue_log_lambda, detour_contour, real_segment
from zndstab.eos import ConfigError, EosModel
from zndstab.profile import (
    calibrate_rate,
    cj_mach,
    continue_profile_complex,
    half_reaction_length,
    integrate_profile,
    mach_from_overdrive,
    predicted_type,
)


@pytest.mark.parametrize("name", ["stable_I", "unstable_I", "prof_D"])
def test_conservation_and_tail(name, request):
    prof = request.getfixturevalue(name)
    res = prof.conservation_residuals()
    assert max(res.values()) < 1e-10
    assert abs(prof.decay_beta / prof.decay_beta_exact - 1) < 0.05
    assert prof.lam(prof.X_max) == pytest.approx(prof.tol_eq, rel=1e-6)


def test_calibrated_half_length(stable_I, prof_D):
    for prof in (stable_I, prof_D):
        assert prof.lam(1.0) == pytest.approx(0.5, rel=1e-9)
        assert half_reaction_length(prof.model, prof.mach) == pytest.approx(1.0, rel=1e-9)


def test_profile_types(stable_I, unstable_I, prof_D):
    assert stable_I.ptype == unstable_I.ptype == "I"
    assert prof_D.ptype == "D"
    for prof in (stable_I, unstable_I, prof_D):
        assert predicted_type(prof.model, prof.mach) == prof.ptype


def test_type_M_profile_has_interior_maximum():
    m = calibrate_rate(EosModel(gamma=1.3, q=3.0, E_act=10.0), 3.0)
    prof = integrate_profile(m, 3.0)
    assert predicted_type(m, 3.0) == prof.ptype == "M"
    assert 0 < prof.x_M < prof.X_max
    xs = np.linspace(0, prof.X_max, 4001)
    ce = prof.flow(xs).c0sq_eta
    assert abs(xs[np.argmax(ce)] - prof.x_M) < 2 * prof.X_max / 4000


def test_inert_profile_is_frozen(inert):
    assert inert.ptype == "other"
    xs = np.linspace(0, inert.X_max, 11)
    f = inert.flow(xs)
    assert np.allclose(f.v, inert.vn_state.v, rtol=1e-13)


def test_cj_and_overdrive():
    m = EosModel(gamma=1.3, q=3.0, E_act=25.0)
    mcj = cj_mach(m)
    assert mcj == pytest.approx(2.4439, abs=1e-4)
    assert mach_from_overdrive(m, 2.0) == pytest.approx(mcj * np.sqrt(2.0))
    assert cj_mach(EosModel(q=0.0)) == 1.0
    with pytest.raises(ConfigError):
        mach_from_overdrive(m, 0.9)
    with pytest.raises(ConfigError):
        integrate_profile(m, 0.99 * mcj)


def test_complex_continuation_on_real_path(stable_I):
    seg = real_segment(0.5, 3.0).segments[0]
    f = continue_profile_complex(stable_I, seg)
    t = np.linspace(0, 1, 7)
    assert np.allclose(f(t), stable_I.log_lambda(0.5 + 2.5 * t), rtol=0, atol=1e-10)


def test_continuation_is_path_independent(stable_I):
    lo, _ = continue_log_lambda(stable_I, detour_contour(3.0, 0.5, 1.5, 0.3, upper=True))
    hi, _ = continue_log_lambda(stable_I, detour_contour(3.0, 0.5, 1.5, 0.3, upper=False))
    assert lo == pytest.approx(hi, abs=1e-10)
    assert lo == pytest.approx(float(stable_I.log_lambda(0.5)), abs=1e-10)


def test_json_export(stable_I):
    d = stable_I.to_json_dict(n_samples=11)
    assert d["ptype"] == "I" and d["x_M"] is None
    assert max(d["conservation"].values()) < 1e-10
    assert stable_I.to_csv(n_samples=11).count("\n") >= 12

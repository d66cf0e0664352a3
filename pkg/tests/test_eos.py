import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zndstab.eos import (
    ConfigError,
    EosDomainError,
    EosModel,
    entropy_from_vT,
    entropy_source,
    eos_eval,
    rate_eval,
    temperature,
)

MODEL = EosModel(gamma=1.3, q=3.0, E_act=25.0, k_rate=2.0)


def _fd(f, x, h=1e-6):
    return (f(x + h) - f(x - h)) / (2 * h)


@settings(max_examples=40, deadline=None)
@given(v=st.floats(0.2, 3.0), T=st.floats(1.0, 20.0), lam=st.floats(0.0, 1.0))
def test_pressure_partials_match_differences(v, T, lam):
    S = float(entropy_from_vT(v, T, MODEL))
    th = eos_eval(v, S, lam, MODEL)
    p_v = _fd(lambda a: eos_eval(a, S, lam, MODEL).p, v)
    p_S = _fd(lambda a: eos_eval(v, a, lam, MODEL).p, S)
    assert th.p_v == pytest.approx(p_v, rel=1e-6)
    assert th.p_S == pytest.approx(p_S, rel=1e-6)
    assert th.c0_sq == pytest.approx(MODEL.gamma * th.p * v, rel=1e-12)


def test_temperature_roundtrip():
    v, T = np.array([0.3, 1.0, 2.5]), np.array([2.0, 5.0, 11.0])
    S = entropy_from_vT(v, T, MODEL)
    assert np.allclose(temperature(v, S, MODEL), T, rtol=1e-13)


@settings(max_examples=30, deadline=None)
@given(v=st.floats(0.3, 2.0), T=st.floats(2.0, 15.0), lam=st.floats(0.05, 1.0))
def test_rate_and_source_partials(v, T, lam):
    S = float(entropy_from_vT(v, T, MODEL))
    rb = rate_eval(v, S, lam, MODEL)
    assert rb.r_v == pytest.approx(_fd(lambda a: rate_eval(a, S, lam, MODEL).r, v), rel=1e-5)
    assert rb.r_S == pytest.approx(_fd(lambda a: rate_eval(v, a, lam, MODEL).r, S), rel=1e-5)
    assert rb.r_lambda == pytest.approx(_fd(lambda a: rate_eval(v, S, a, MODEL).r, lam),
                                        rel=1e-6)
    sb = entropy_source(v, S, lam, MODEL)
    assert sb.Phi_v == pytest.approx(_fd(lambda a: entropy_source(a, S, lam, MODEL).Phi, v),
                                     rel=1e-5)
    assert sb.Phi_S == pytest.approx(_fd(lambda a: entropy_source(v, a, lam, MODEL).Phi, S),
                                     rel=1e-5)
    assert sb.Phi >= 0.0


def test_reaction_energy_is_heat_release():
    th = eos_eval(1.0, 0.0, 0.5, MODEL)
    assert th.deltaF == MODEL.q
    assert th.sigma < 0


def test_complex_arguments_are_accepted():
    th = eos_eval(1.0 + 0.1j, 0.0, 0.5, MODEL)
    assert np.iscomplexobj(th.p)


def test_domain_errors():
    with pytest.raises(EosDomainError):
        eos_eval(-1.0, 0.0, 0.5, MODEL)


@pytest.mark.parametrize("bad", [{"gamma": 1.0}, {"k_rate": 0.0}, {"q": -1.0},
                                 {"E_act": float("nan")}, {"gamma": True}, {"gama": 1.4}])
def test_config_errors(bad):
    with pytest.raises(ConfigError):
        EosModel.from_dict(bad)


def test_json_roundtrip():
    assert EosModel.from_json(MODEL.to_json()) == MODEL

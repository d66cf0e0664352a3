import numpy as np
import pytest

from zndstab.frame import (
    FrameError,
    classify_zeta,
    continue_sqrt,
    e11,
    e22,
    e_matrix,
    eigenvalues,
    exceptional_values,
    find_turning_points,
    phi0_assembled,
    phi0_explicit,
    s_principal,
    t_matrix,
    t_matrix_dx,
)


def test_phi0_matches_explicit_and_diagonalizes(stable_I, rng):
    xs = rng.uniform(0, stable_I.X_max, 20)
    for x in xs:
        fp = stable_I.flow(np.float64(x))
        zeta = complex(rng.uniform(0, 3), rng.uniform(-3, 3))
        P = phi0_explicit(fp, zeta)
        assert np.allclose(phi0_assembled(fp, zeta), P, rtol=0, atol=1e-12 * np.abs(P).max())
        s = s_principal(zeta, fp.c0sq_eta)
        T = t_matrix(fp, zeta, s)
        mu = np.array(eigenvalues(fp, zeta, s))[[0, 1, 2, 2, 2]]
        res = np.abs(P @ T - T * mu).max()
        assert res <= 1e-12 * np.linalg.norm(P) * np.linalg.norm(T)


def test_principal_root_conventions():
    # positive real part off the cut, +i|s| on the cut for Im zeta > 0
    assert s_principal(1.0, 3.0) == pytest.approx(2.0)
    s = s_principal(2j, 1.0)
    assert s == pytest.approx(1j * np.sqrt(3.0))
    assert s_principal(-2j, 1.0) == pytest.approx(-1j * np.sqrt(3.0))


def test_continue_sqrt_follows_the_branch():
    th = np.linspace(0, 2 * np.pi, 400)
    vals, sheet = continue_sqrt(np.exp(1j * th), 1.0)
    assert vals[-1] == pytest.approx(-1.0)
    assert sheet[-1] == 1 and sheet[0] == 0
    with pytest.raises(FrameError):
        continue_sqrt(np.array([1.0, 2.0]), 3.0)


def test_classify(stable_I):
    lo, hi = sorted(exceptional_values(stable_I)[:2])
    mid = 0.5 * (lo + hi)
    assert classify_zeta(1j * mid, stable_I) == "III_plus"
    assert classify_zeta(-1j * mid, stable_I) == "III_minus"
    assert classify_zeta(1j * (hi + 1), stable_I) == "I"
    r = stable_I.ranges()
    assert classify_zeta(0.5 * (r["u_min"] + r["u_max"]), stable_I) == "II"
    assert classify_zeta(1 + 1j, stable_I) == "I"
    with pytest.raises(FrameError):
        classify_zeta(-1.0, stable_I)


def test_turning_points(unstable_I, prof_D):
    for prof, sign in ((unstable_I, 1), (prof_D, -1)):
        lo, hi = sorted(exceptional_values(prof)[:2])
        zi = 0.5 * (lo + hi)
        tps = find_turning_points(zi, prof)
        assert len(tps) == 1
        x = tps[0].x_star
        assert prof.flow(np.float64(x)).c0sq_eta == pytest.approx(zi**2, rel=1e-12)
        assert np.sign(tps[0].d) == sign


def test_t_matrix_derivative(stable_I):
    zeta, h = 0.7 + 1.3j, 1e-5
    for x in (0.3, 1.0, 4.0):
        def T(y):
            fp = stable_I.flow(np.float64(y))
            return t_matrix(fp, zeta, s_principal(zeta, fp.c0sq_eta))
        fp = stable_I.flow(np.float64(x))
        dT = t_matrix_dx(fp, zeta, s_principal(zeta, fp.c0sq_eta))
        fd = (T(x + h) - T(x - h)) / (2 * h)
        assert np.allclose(dT, fd, rtol=1e-6, atol=1e-8)


def test_e_matrix_diagonal(stable_I):
    zeta, nu = 1.2 + 0.4j, 0.3 - 0.2j
    fp = stable_I.flow(np.float64(0.8))
    s = s_principal(zeta, fp.c0sq_eta)
    E = e_matrix(fp, zeta, nu, s)
    assert E[0, 0] == pytest.approx(e11(fp, zeta, nu, s), rel=1e-10)
    assert E[1, 1] == pytest.approx(e22(fp, zeta, nu, s), rel=1e-10)

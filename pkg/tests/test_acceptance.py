"""Acceptance gate: one test per criterion, tolerances pinned here.

Each test prints a single PASS/FAIL line (visible with ``pytest -s`` and in
the verbose log of ``zndstab crosscheck``).
"""
import pytest

from zndstab import acceptance as acc


def _gate(result):
    print()
    print(result.line())
    assert result.passed, result.detail


def test_criterion_01_eigenstructure():
    _gate(acc.check_eigenstructure(n=200, tol=1e-12))


def test_criterion_02_profile_conservation():
    _gate(acc.check_profile(cons_tol=1e-10, decay_tol=0.05))


@pytest.mark.slow
def test_criterion_03_class_I_rate():
    _gate(acc.check_class_I_rate(target=-1.0, tol=0.2, eps_list=(20.0, 40.0, 80.0, 160.0)))


@pytest.mark.slow
def test_criterion_04_alpha_dual():
    _gate(acc.check_alpha(n_zeta=5, tol=1e-6))


@pytest.mark.slow
def test_criterion_05_matching():
    _gate(acc.check_matching(target=-1.0, tol=0.3))


def test_criterion_06_L1_dual():
    _gate(acc.check_L1(n=200, rtol=1e-8))


@pytest.mark.slow
def test_criterion_07_V_forms():
    _gate(acc.check_V_forms(rtol=1e-4))


@pytest.mark.slow
def test_criterion_08_instability_locus():
    _gate(acc.check_instability(periods=3, spacing_tol=1e-10))


@pytest.mark.slow
def test_criterion_09_gap_lemma():
    _gate(acc.check_gap_lemma(target=1.0, tol=0.2, eps_list=(20.0, 40.0, 80.0, 160.0)))


@pytest.mark.slow
def test_criterion_10_mpp():
    _gate(acc.check_mpp(target=-1.0, tol=0.2, eps_list=(20.0, 40.0, 80.0, 160.0)))

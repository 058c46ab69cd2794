import cmath
import math
import sys
from pathlib import Path

import numpy as np
import pytest

# Add src directory to path
sys.path.append(str(Path(__file__).parent.parent))

from src import oracle
from src.complexfn import (EULER_GAMMA, check_window, digamma, em_length, log_gamma, log_xi1_array,
                           logderiv2_xi1_array, logderiv_xi1_array, xi1, zeta, zeta_array)
from src.errors import DomainError


def test_log_gamma_closed_forms():
    """log Gamma at 1, 2 and 1/2"""
    assert abs(log_gamma(1).value) < 1e-14
    assert abs(log_gamma(2).value) < 1e-14
    assert abs(log_gamma(0.5).value - 0.572364942925) < 1e-11


def test_log_gamma_recurrence_off_axis():
    """log Gamma(z + 1) = log Gamma(z) + log z up to the branch"""
    z = 0.3 + 40j
    lhs = log_gamma(z + 1).value
    rhs = log_gamma(z).value + cmath.log(z)
    diff = lhs - rhs
    assert abs(diff.real) < 1e-10
    assert abs(math.remainder(diff.imag, 2 * math.pi)) < 1e-10


def test_log_gamma_pole_flagged():
    result = log_gamma(-2)
    assert result.at_pole
    assert math.isinf(result.est_abs_err)


def test_digamma_closed_forms():
    assert abs(digamma(1).value + EULER_GAMMA) < 1e-13
    assert abs(digamma(2).value - (1 - EULER_GAMMA)) < 1e-13


def test_zeta_closed_forms():
    assert abs(zeta(2).value - math.pi ** 2 / 6) < 1e-12
    assert abs(zeta(0).value + 0.5) < 1e-12
    assert abs(zeta(-1).value + 1 / 12) < 1e-12


def test_zeta_first_critical_zero():
    """zeta(1/2 + 14.134725i) is tiny"""
    assert abs(zeta(0.5 + 14.134725j).value) < 1e-5


def test_zeta_pole_at_one():
    assert zeta(1).at_pole


def test_zeta_derivative_matches_difference():
    s = 0.7 + 30j
    h = 1e-5
    numeric = (zeta(s + h).value - zeta(s - h).value) / (2 * h)
    assert abs(zeta(s, deriv_order=1).value - numeric) < 1e-6 * max(1.0, abs(numeric))


def test_em_length_grows_with_height():
    assert em_length(0.0) == 50
    assert em_length(1000.0) >= 1300


def test_xi1_functional_equation():
    """xi1(s) = xi1(1 - s)"""
    s = 0.3 + 20j
    a = xi1(s).value
    b = xi1(1 - s).value
    assert abs(a - b) < 1e-9 * abs(a)


def test_xi1_real_on_critical_line():
    value = xi1(0.5 + 6j).value
    assert abs(value.imag) < 1e-9 * abs(value)


def test_xi_equal_at_zero_and_one():
    assert abs(xi1(0, "xi").value - xi1(1, "xi").value) < 1e-9
    assert abs(xi1(0, "xi").value - 0.5) < 1e-12


def test_xi1_poles():
    assert xi1(0).at_pole
    assert xi1(1).at_pole


def test_log_xi1_far_up_the_line():
    """log form stays finite where xi1 itself underflows"""
    result = xi1(0.5 + 1500j, "log_xi1")
    assert np.isfinite(result.value.real)
    assert result.value.real < -700


def test_logderiv_matches_log_difference():
    s = np.array([0.8 + 25j])
    h = 1e-5
    logs, _, _ = log_xi1_array(np.array([s[0] + h, s[0] - h]))
    numeric = (logs[0] - logs[1]) / (2 * h)
    value, _, _ = logderiv_xi1_array(s)
    assert abs(value[0] - numeric) < 1e-6


def test_check_window_rejects_height():
    with pytest.raises(DomainError):
        check_window(0.5 + 2200j)
    with pytest.raises(DomainError):
        zeta(0.5 + 5000j)


def test_unknown_xi_variant():
    with pytest.raises(DomainError):
        xi1(2, "bogus")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def _same_log(a: np.ndarray, b: np.ndarray, rtol: float) -> bool:
    """equal as logarithms: real parts to rtol, imaginary parts modulo 2 pi"""
    real_ok = np.abs(a.real - b.real) < rtol * np.maximum(1.0, np.abs(a.real))
    imag_ok = np.abs(np.angle(np.exp(1j * (a.imag - b.imag)))) < rtol * np.maximum(1.0, np.abs(a.imag))
    return bool(np.all(real_ok & imag_ok))


def test_xi1_symmetries_at_random_points(rng):
    s = rng.uniform(-2.0, 3.0, 10_000) + 1j * rng.uniform(0.0, 1000.0, 10_000)
    logs, _, _ = log_xi1_array(s)
    flipped, _, _ = log_xi1_array(1.0 - s)
    conjugate, _, _ = log_xi1_array(np.conj(s))
    assert _same_log(logs, flipped, 1e-8)
    assert _same_log(np.conj(logs), conjugate, 1e-8)


def test_zeta_schwarz_reflection(rng):
    s = rng.uniform(-2.0, 3.0, 500) + 1j * rng.uniform(0.0, 1000.0, 500)
    a = zeta_array(s)
    b = zeta_array(np.conj(s))
    assert np.all(np.abs(np.conj(a) - b) < 1e-8 * np.maximum(1.0, np.abs(a)))


def test_euler_maclaurin_length_is_converged(rng):
    n = em_length(1000.0)
    for s in rng.uniform(0.5, 3.0, 50) + 1j * rng.uniform(0.0, 1000.0, 50):
        a = zeta(s, n_terms=n)
        b = zeta(s, n_terms=n + 10)
        assert abs(a.value - b.value) <= a.est_abs_err + b.est_abs_err, s


def test_zeta_derivative_against_oracle(rng):
    for s in rng.uniform(-2.0, 3.0, 20) + 1j * rng.uniform(1.0, 1000.0, 20):
        expected = oracle.evaluate("zeta_deriv", s)
        value = zeta(s, deriv_order=1).value
        assert abs(value - expected) < 1e-8 * max(1.0, abs(expected)), s


@pytest.mark.parametrize("s", [0.8 + 25j, 2.0 + 300j, -0.7 + 40j, 1.5 + 900j])
def test_second_log_derivative_against_oracle(s):
    expected = oracle.evaluate("logderiv2_xi1", s)
    value, singular = logderiv2_xi1_array(np.array([s]))
    assert not singular[0]
    assert abs(value[0] - expected) < 1e-8 * max(1.0, abs(expected))

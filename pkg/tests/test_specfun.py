import math

import mpmath as mp
import pytest

from singdet.errors import BesselOverflowError
from singdet.specfun import (bessel_i, bessel_i_scaled, bessel_j, bessel_j_zero, bessel_k,
                             bessel_k_scaled, gamma, log_gamma)

mp.mp.dps = 40

ORDERS = [0.0, 0.25, 0.3, 0.5, 1.0, 1.3, 2.5, 4.0, 7.7]
ARGS = [1e-3, 0.1, 0.9, 2.0, 2.5, 7.0, 14.9, 15.1, 30.0, 120.0]


def close(a, b, tol):
    return abs(a - b) <= tol * abs(b)


@pytest.mark.parametrize("x", [0.1, 0.5, 1.0, 1.3, 2.5, 7.0, 12.5, 30.0, 100.5])
def test_gamma_vs_mpmath(x):
    # condition number of Gamma is about x psi(x)
    kappa = max(1.0, x * float(mp.digamma(x)))
    assert close(gamma(x), float(mp.gamma(x)), 2e-14 * kappa)
    assert abs(log_gamma(x) - float(mp.loggamma(x))) <= 1e-13 * max(1.0, abs(float(mp.loggamma(x))))


def test_gamma_examples():
    assert abs(gamma(1.3) - 0.8974706963062772) < 1e-15
    assert gamma(5.0) == 24.0
    assert close(gamma(0.5), math.sqrt(math.pi), 1e-15)


@pytest.mark.parametrize("x", [0.0, -1.0, -3.0])
def test_gamma_poles(x):
    with pytest.raises(ValueError):
        gamma(x)


@pytest.mark.parametrize("nu", ORDERS)
@pytest.mark.parametrize("x", ARGS)
def test_bessel_i_k_vs_mpmath(nu, x):
    ref_i = mp.besseli(nu, x)
    ref_k = mp.besselk(nu, x)
    assert close(bessel_i(nu, x), float(ref_i), 2e-12)
    assert close(bessel_k(nu, x), float(ref_k), 5e-12)
    assert close(bessel_i_scaled(nu, x), float(ref_i * mp.exp(-x)), 2e-12)
    assert close(bessel_k_scaled(nu, x), float(ref_k * mp.exp(x)), 5e-12)


def test_bessel_i_example():
    assert close(bessel_i(0.3, 2.0), float(mp.besseli(0.3, 2.0)), 1e-13)


def test_bessel_i_overflow_reports_log():
    with pytest.raises(BesselOverflowError) as info:
        bessel_i(0.5, 900.0)
    assert abs(info.value.log_value - float(mp.log(mp.besseli(0.5, 900)))) < 1e-9
    # the scaled function stays available
    assert close(bessel_i_scaled(0.5, 900.0), float(mp.besseli(0.5, 900) * mp.exp(-900)), 1e-12)


@pytest.mark.parametrize("nu", [0.0, 0.3, 0.5, 1.0, 2.5, 6.0])
@pytest.mark.parametrize("x", [0.01, 1.0, 5.0, 11.9, 12.1, 25.0, 60.0])
def test_bessel_j_vs_mpmath(nu, x):
    ref = float(mp.besselj(nu, x))
    scale = max(abs(ref), float(mp.sqrt(2 / (mp.pi * x))) * 1e-3)
    assert abs(bessel_j(nu, x) - ref) <= 1e-11 * scale


def test_bessel_j_example():
    assert abs(bessel_j(0.3, 1.0) - float(mp.besselj(0.3, 1.0))) < 1e-15


@pytest.mark.parametrize("nu", [0.0, 0.3, 0.5, 1.2, 2.5])
@pytest.mark.parametrize("k", [1, 2, 5, 10])
def test_bessel_j_zero(nu, k):
    ref = float(mp.besseljzero(nu, k))
    assert abs(bessel_j_zero(nu, k) - ref) <= 1e-13 * ref


def test_bessel_j_zero_half_order_is_pi_multiple():
    for k in range(1, 6):
        assert abs(bessel_j_zero(0.5, k) - k * math.pi) < 1e-13 * k


@pytest.mark.parametrize("bad", [(-0.5, 1.0), (0.5, -1.0), (11.0, 1.0)])
def test_bessel_domain(bad):
    with pytest.raises(ValueError):
        bessel_k(*bad)

import math

import numpy as np
import pytest

from singdet import BoundaryPair, SingularProblem, WronskianError, solve_pair
from singdet.config import DEFAULT
from singdet.shooting import normalized_phi, normalized_psi
from singdet.specfun import bessel_i_scaled

DD = BoundaryPair(0.0, 0.0)


def test_half_order_closed_forms():
    pair = solve_pair(SingularProblem(0.5, "0"), DD)
    x = np.linspace(pair.psi.x_low, 1.0, 11)
    np.testing.assert_allclose(pair.phi(x), x, rtol=1e-12)
    np.testing.assert_allclose(pair.psi(x), 1.0 - x, rtol=1e-10, atol=1e-14)
    assert abs(pair.W.full - 1.0) < 1e-13


@pytest.mark.parametrize("theta1", [0.3, math.pi / 2, 2.5])
def test_robin_right_end(theta1):
    pair = solve_pair(SingularProblem(0.5, "0"), BoundaryPair(0.0, theta1))
    c = 1.0 / math.tan(theta1)
    x = np.linspace(pair.psi.x_low, 1.0, 7)
    np.testing.assert_allclose(pair.psi(x), 1.0 + c * (1.0 - x), rtol=1e-10, atol=1e-13)
    assert abs(pair.W.full - (1.0 + c)) < 1e-12 * max(1.0, abs(c))


def test_left_robin_phi_closed_form():
    # nu = 0.3, V = 0: phi = 2 nu cot(theta0) x^0.8 + x^0.2
    nu, th = 0.3, 1.1
    phi = normalized_phi(SingularProblem(nu, "0"), BoundaryPair(th, 0.0))
    x = np.array([1e-3, 0.05, 0.3, 0.8, 1.0])
    ref = 2 * nu / math.tan(th) * x ** 0.8 + x ** 0.2
    np.testing.assert_allclose(phi(x), ref, rtol=1e-9)


@pytest.mark.parametrize("nu", [0.0, 0.3, 1.0, 2.5])
@pytest.mark.parametrize("z", [1.0, 400.0, 1e6])
def test_dirichlet_wronskian_closed_form(nu, z):
    # W(psi, phi) = phi(1) = Gamma(nu+1) (2/s)^nu I_nu(s)
    s = math.sqrt(z)
    pair = solve_pair(SingularProblem(nu, "0"), DD, z)
    ref = math.lgamma(nu + 1) + nu * math.log(2 / s) + math.log(bessel_i_scaled(nu, s)) + s
    assert pair.W.sign == 1.0
    assert abs(pair.W.log_abs - ref) < 1e-9 * max(1.0, abs(ref))


@pytest.mark.parametrize("nu,V,bc", [(0.3, "x", DD), (0.3, "sin(x)", BoundaryPair(0.7, 2.0)),
                                     (1.7, "exp(x)", BoundaryPair(0.0, 1.0)),
                                     (0.0, "x^2", DD)])
def test_wronskian_is_constant(nu, V, bc):
    pair = solve_pair(SingularProblem(nu, V), bc, 3.0)
    assert pair.W.constancy_dev < 1e-8
    r = np.array(pair.W.samples)
    assert np.max(np.abs(r - pair.W.value)) <= 1e-8 * abs(pair.W.value)


def test_psi_head_representation_is_continuous():
    p = SingularProblem(0.3, "x")
    pair = solve_pair(p, BoundaryPair(0.0, 1.0), 2.0, need_psi_head=True)
    psi = pair.psi
    xm = psi.x_match
    below = psi(np.array([xm * (1 - 1e-9)]))[0]
    above = psi(np.array([xm * (1 + 1e-9)]))[0]
    assert abs(below - above) <= 1e-8 * abs(above)
    # near 0 psi is dominated by the beta g2 term
    a, b = psi.head_coeffs
    assert b != 0.0
    t = 1e-8
    ratio = psi(t) / (math.exp(psi.head_logscale) * b * float(psi.g2(t)))
    assert abs(ratio - 1.0) < 1e-4


def test_loose_integration_fails_constancy_check():
    loose = DEFAULT.with_overrides(rtol=1e-3, atol=1e-4)
    p = SingularProblem(0.3, "50*sin(20*x)")
    with pytest.raises(WronskianError) as info:
        solve_pair(p, DD, 0.0, loose)
    assert info.value.args


def test_check_can_be_disabled():
    loose = DEFAULT.with_overrides(rtol=1e-3, atol=1e-4)
    p = SingularProblem(0.3, "50*sin(20*x)")
    pair = solve_pair(p, DD, 0.0, loose, check=False)
    assert pair.W.constancy_dev > 0.0


def test_psi_without_heads_stops_at_x_low():
    psi = normalized_psi(SingularProblem(0.3, "0"), DD, x_low=0.2)
    assert psi.trace.x[0] == pytest.approx(0.2)
    assert psi.head_coeffs == (0.0, 0.0)
    with pytest.raises(ValueError, match="only available"):
        psi(0.1)

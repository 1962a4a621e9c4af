import math

import numpy as np
import pytest

from conftest import model_det, rel
from singdet import (AdmissibilityError, BoundaryPair, EvaluationError, PoleError,
                     SingularProblem, char_function, eigenvalues, factor_check,
                     factor_potentials, log_derivative, prefactor, variation_check, zeta_det)
from singdet.problem import parse_potential
from singdet.specfun import bessel_j_zero

DD = BoundaryPair(0.0, 0.0)


def test_examples():
    assert abs(zeta_det(SingularProblem(0.5), DD).value - 2.0) < 1e-12
    r = zeta_det(SingularProblem(0.3), DD)
    assert rel(r.value, 2.2686) < 1e-4
    assert rel(r.value, model_det(0.3)) < 1e-9
    zero = zeta_det(SingularProblem(0.5), BoundaryPair(0.0, 3 * math.pi / 4))
    assert abs(zero.value) < 1e-12


def test_result_fields():
    r = zeta_det(SingularProblem(0.3), BoundaryPair(0.6, 0.0))
    assert (r.mu0, r.mu1) == (-0.3, 0.5)
    assert r.prefactor == prefactor(-0.3, 0.5)
    assert r.sign == math.copysign(1.0, r.value)
    assert math.log(abs(r.value)) == pytest.approx(r.log_value, abs=1e-13)


@pytest.mark.parametrize("nu", [0.0, 0.3, 0.5, 1.2, 2.5])
def test_prefactor_identity(nu):
    assert rel(prefactor(nu, 0.5), model_det(nu)) < 1e-12


def test_char_function_examples():
    p = SingularProblem(0.5)
    assert abs(char_function(p, DD, 1.0).value - 2.3504023873) < 1e-9
    assert abs(char_function(p, DD, -math.pi ** 2).value) < 1e-8
    q = SingularProblem(0.3)
    assert char_function(q, DD, 0.0).value == zeta_det(q, DD).value


@pytest.mark.parametrize("z", [0.5, 1.0, 4.0, 25.0])
def test_char_function_model_symmetry(z):
    s = math.sqrt(z)
    assert rel(char_function(SingularProblem(0.5), DD, z).value, 2 * math.sinh(s) / s) < 1e-8


def test_large_z_reports_log():
    r = char_function(SingularProblem(0.5), DD, 1e6)
    assert r.log_value == pytest.approx(math.log(2.0) + 1000.0 - math.log(2000.0), rel=1e-10)
    r = char_function(SingularProblem(0.5), DD, 1e7)
    assert r.value is None or math.isinf(r.value) or r.value > 0
    assert r.log_value == pytest.approx(math.log(2.0) + math.sqrt(1e7) - math.log(2 * math.sqrt(1e7)),
                                        rel=1e-10)


def test_gate():
    with pytest.raises(AdmissibilityError):
        zeta_det(SingularProblem(0.0), BoundaryPair(1.0, 0.0))
    with pytest.raises(AdmissibilityError):
        zeta_det(SingularProblem(1.5), BoundaryPair(1.0, 0.0))


def test_eigen_examples():
    ev = eigenvalues(SingularProblem(0.5), DD, 4)
    assert ev.complete
    assert abs(ev.values[0] - 9.8696044011) < 1e-9
    np.testing.assert_allclose(ev.values, [(k * math.pi) ** 2 for k in range(1, 5)], rtol=1e-10)
    ev = eigenvalues(SingularProblem(0.3), DD, 3)
    np.testing.assert_allclose(ev.values, [bessel_j_zero(0.3, k) ** 2 for k in range(1, 4)],
                               rtol=1e-9)
    ev = eigenvalues(SingularProblem(0.5), BoundaryPair(0.0, math.pi / 2), 3)
    assert abs(ev.values[0] - 2.4674011003) < 1e-9
    np.testing.assert_allclose(ev.values, [((k - 0.5) * math.pi) ** 2 for k in range(1, 4)],
                               rtol=1e-10)


def test_eigen_list_structure():
    ev = eigenvalues(SingularProblem(0.3, "x"), BoundaryPair(0.5, 1.0), 4)
    assert np.all(np.diff(ev.values) > 0)
    for lam, (a, b) in zip(ev.values, ev.brackets):
        assert a <= lam <= b
    assert len(ev.residuals) == 4


def test_negative_eigenvalue_found():
    # Robin at theta1 close to pi produces a negative eigenvalue
    ev = eigenvalues(SingularProblem(0.5), BoundaryPair(0.0, 3.0), 2)
    assert ev.values[0] < 0
    z = -ev.values[0]
    assert abs(char_function(SingularProblem(0.5), BoundaryPair(0.0, 3.0), z).value) < 1e-7


def test_partial_list_flagged():
    ev = eigenvalues(SingularProblem(0.5), DD, 5, lam_max=50.0)
    assert not ev.complete
    assert len(ev.values) == 2


@pytest.mark.parametrize("nu,V,bc", [(0.3, "0", DD), (0.3, "x", BoundaryPair(0.7, 1.0)),
                                     (1.2, "exp(x)", DD)])
def test_zero_set(nu, V, bc):
    p = SingularProblem(nu, V)
    ev = eigenvalues(p, bc, 3)
    for lam in ev.values:
        hi = char_function(p, bc, -lam * (1 + 1e-7))
        lo = char_function(p, bc, -lam * (1 - 1e-7))
        assert hi.sign * lo.sign < 0


def test_log_derivative_model():
    # d/dz log(sinh(s)/s) = (coth s)/(2 s) - 1/(2 z)
    z = 2.0
    s = math.sqrt(z)
    ref = 1 / (2 * s * math.tanh(s)) - 1 / (2 * z)
    assert abs(log_derivative(SingularProblem(0.5), DD, z) - ref) < 1e-9


# ---------------------------------------------------------------- factorization

@pytest.mark.parametrize("omega,nu,z,expected", [("1", 0.3, 1.0, 0.7142857143),
                                                 ("1", 0.3, 2.0, 1.4285714286),
                                                 ("exp(x)", 0.3, 1.0, 0.7142857143)])
def test_factor_examples(omega, nu, z, expected):
    rep = factor_check(nu, omega, z)
    assert abs(rep.ratio_I - expected) < 1e-6
    assert rep.rel_err_I < 1e-6 and rep.rel_err_II < 1e-6


@pytest.mark.parametrize("omega,nu,z", [("1+x^2", 0.6, 3.0), ("2-sin(x)", 0.2, 0.7),
                                        ("exp(-x)", 0.45, 5.0)])
def test_factor_ratios(omega, nu, z):
    rep = factor_check(nu, omega, z)
    assert rep.expected_II == pytest.approx(1 / (2 - 2 * nu))
    assert rep.rel_err_I < 1e-6 and rep.rel_err_II < 1e-6


def test_factor_potentials_trivial_weight():
    v12, v21 = factor_potentials(0.3, parse_potential("1"))
    for x in (0.1, 0.5, 0.9):
        assert v12(x) == 0.0 and v21(x) == 0.0


def test_factor_rejects_vanishing_weight():
    with pytest.raises(EvaluationError):
        factor_check(0.3, "x - 0.5", 1.0)
    with pytest.raises(ValueError):
        factor_check(1.3, "1", 1.0)


# ---------------------------------------------------------------- variation

def test_variation_zero_weight():
    rep = variation_check(SingularProblem(0.3, "x"), DD, "0")
    assert rep.d_logdet == 0.0 and rep.d_logW == 0.0 and abs(rep.d_green) < 1e-15


def test_variation_trace_value():
    rep = variation_check(SingularProblem(0.5), DD, "1", h=1e-4)
    assert abs(rep.d_logdet - 1 / 6) < 1e-7
    assert abs(rep.d_green - 1 / 6) < 1e-9


@pytest.mark.parametrize("nu,V,bc,w", [(0.3, "0", DD, "sin(x)"),
                                       (0.3, "x", BoundaryPair(0.5, 1.0), "exp(-x)"),
                                       (1.2, "0", BoundaryPair(0.0, 2.0), "x^0.5")])
def test_variation_gap(nu, V, bc, w):
    rep = variation_check(SingularProblem(nu, V), bc, w)
    assert rep.gap < 1e-6
    assert rep.gap_green < 1e-6


def test_variation_pole():
    # theta1 = 3 pi / 4 with nu = 1/2 has a zero mode
    with pytest.raises(PoleError):
        variation_check(SingularProblem(0.5), BoundaryPair(0.0, 3 * math.pi / 4), "1")

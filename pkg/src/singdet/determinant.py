"""Zeta-regularised determinant from the Wronskian of normalised solutions.

    det(H(theta0, theta1)) = pi / (2^{mu0+mu1} Gamma(mu0+1) Gamma(mu1+1)) W(psi, phi)

plus the characteristic function ``z -> det(H + z)``, eigenvalues as its
zeros, the factorisation identities and the variation-formula check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import expr as ex
from .config import DEFAULT, Settings
from .errors import EvaluationError, PoleError
from .problem import (BoundaryPair, PotentialExpr, SingularProblem, check_admissible,
                      diagnostic_grid, mu_invariants, parse_potential, potential_from_ast)
from .shooting import WronskianValue, build_heads, solve_pair
from .specfun import gamma


def prefactor(mu0: float, mu1: float) -> float:
    """``pi / (2^{mu0+mu1} Gamma(mu0+1) Gamma(mu1+1))``."""
    return math.pi / (2.0 ** (mu0 + mu1) * gamma(mu0 + 1.0) * gamma(mu1 + 1.0))


@dataclass(frozen=True)
class DetResult:
    """Determinant with its ingredients.

    ``value`` is None when ``|det|`` is not representable as a float; the
    pair ``(log_value, sign)`` is always available.
    """

    value: float | None
    log_value: float
    sign: float
    mu0: float
    mu1: float
    wronskian: WronskianValue
    prefactor: float


def _assemble(W: WronskianValue, mu0: float, mu1: float) -> DetResult:
    pre = prefactor(mu0, mu1)
    sign = W.sign
    if W.value == 0.0:
        return DetResult(0.0, -math.inf, 0.0, mu0, mu1, W, pre)
    log_value = math.log(pre) + W.log_abs
    value = sign * math.exp(log_value) if log_value < 709.0 else None
    return DetResult(value, log_value, sign, mu0, mu1, W, pre)


def _gate(p: SingularProblem, bc: BoundaryPair) -> None:
    check_admissible(p.nu, bc, determinant=True)


def char_function(p: SingularProblem, bc: BoundaryPair, z: float,
                  settings: Settings = DEFAULT) -> DetResult:
    """``det(H + z)`` for real ``z``."""
    _gate(p, bc)
    mu = mu_invariants(p.nu, bc)
    pair = solve_pair(p, bc, float(z), settings)
    return _assemble(pair.W, mu.mu0, mu.mu1)


def zeta_det(p: SingularProblem, bc: BoundaryPair, settings: Settings = DEFAULT) -> DetResult:
    """Zeta-regularised determinant of ``H(theta0, theta1)``.

    Examples
    --------
    >>> round(zeta_det(SingularProblem(0.5), BoundaryPair()).value, 9)
    2.0
    """
    return char_function(p, bc, 0.0, settings)


def log_derivative(p: SingularProblem, bc: BoundaryPair, z: float, h: float | None = None,
                   settings: Settings = DEFAULT) -> float:
    """``d/dz log|det(H + z)|`` by a fourth-order central difference.

    The default step ``1e-3 max(1, |z|)`` balances truncation against the
    ``~1e-10`` noise of the Wronskian.
    """
    h = 1e-3 * max(1.0, abs(z)) if h is None else float(h)
    L = [char_function(p, bc, z + k * h, settings).log_value for k in (-2, -1, 1, 2)]
    return (L[0] - 8.0 * L[1] + 8.0 * L[2] - L[3]) / (12.0 * h)


# ---------------------------------------------------------------- spectrum

@dataclass(frozen=True)
class EigenList:
    values: tuple[float, ...]
    brackets: tuple[tuple[float, float], ...]
    residuals: tuple[float, ...]
    complete: bool


def _scan_step(lam: float) -> float:
    # a quarter of the model spacing 2 pi sqrt(lam) + pi^2/4
    return 0.25 * (math.pi ** 2 / 4.0 + 2.0 * math.pi * math.sqrt(max(lam, 0.0)))


def _default_lam_min(p: SingularProblem, bc: BoundaryPair) -> float:
    from .oracle import discretize, lowest_eigs
    lam1 = lowest_eigs(discretize(p, bc, 1e-3, 400), 1)[0]
    return lam1 - 0.25 * abs(lam1) - 2.0


def eigenvalues(p: SingularProblem, bc: BoundaryPair, count: int, lam_max: float | None = None,
                settings: Settings = DEFAULT, lam_min: float | None = None) -> EigenList:
    """Lowest ``count`` eigenvalues as zeros of ``lam -> W(psi_{-lam}, phi_{-lam})``.

    The scan starts below a coarse finite-difference estimate of the ground
    state and walks up in steps shaped like the model level spacing; each
    sign change is refined with Brent's method to ``1e-12`` relative.
    """
    _gate(p, bc)
    if count < 1:
        raise ValueError("count must be >= 1")
    lo = _default_lam_min(p, bc) if lam_min is None else float(lam_min)
    top = math.inf if lam_max is None else float(lam_max)

    def F(lam: float) -> float:
        W = solve_pair(p, bc, -lam, settings).W
        return W.value * math.exp(min(W.logscale, 700.0))

    vals, brackets, res = [], [], []
    a, fa = lo, F(lo)
    while len(vals) < count and a < top:
        b = min(a + _scan_step(a), top)
        fb = F(b)
        if fa == 0.0:
            root = a
            vals.append(root)
            brackets.append((a, a))
        elif fa * fb < 0.0:
            root = brentq(F, a, b, xtol=1e-13 * max(1.0, abs(a)), rtol=1e-13, maxiter=200)
            vals.append(root)
            brackets.append((a, b))
        else:
            root = None
        if root is not None:
            res.append(abs(F(root)))
        a, fa = b, fb
        if a > 1e6:
            break
    return EigenList(tuple(vals), tuple(brackets), tuple(res), len(vals) >= count)


# ---------------------------------------------------------------- factorisation

@dataclass(frozen=True)
class FactorReport:
    """Measured Wronskian ratios of ``d1 d2`` against ``d2 d1``."""

    nu: float
    z: float
    vartheta0: float
    vartheta1: float
    ratio_I: float
    expected_I: float
    ratio_II: float
    expected_II: float

    @property
    def rel_err_I(self) -> float:
        return abs(self.ratio_I / self.expected_I - 1.0)

    @property
    def rel_err_II(self) -> float:
        return abs(self.ratio_II / self.expected_II - 1.0)


def factor_potentials(nu: float, omega_tilde: PotentialExpr) -> tuple[PotentialExpr, PotentialExpr]:
    """``V12, V21`` with ``d1 d2 = l_nu + V12/x`` and ``d2 d1 = l_{1-nu} + V21/x``."""
    w = omega_tilde.ast
    d1 = ex.derivative(w)
    d2 = ex.derivative(d1)
    r1 = ex.div(d1, w)
    r2 = ex.div(d2, w)
    c = ex.Num(1.0 - 2.0 * nu)
    v12 = ex.add(ex.mul(c, r1), ex.mul(ex.X, r2))
    v21 = ex.add(ex.mul(c, r1), ex.mul(ex.X, ex.sub(ex.mul(ex.Num(2.0), ex.mul(r1, r1)), r2)))
    return potential_from_ast(v12), potential_from_ast(v21)


def factor_check(nu: float, omega_tilde: PotentialExpr | str, z: float,
                 settings: Settings = DEFAULT) -> FactorReport:
    """Compare ``W`` of ``H12 = d1 d2`` and ``H21 = d2 d1`` built from ``omega``.

    ``omega = x^{1/2-nu} omega_tilde`` solves ``H12 omega = 0``; the angles
    ``vartheta0, vartheta1`` are the boundary conditions it satisfies.
    Case I compares ``H12(vartheta0, vartheta1)`` with ``H21(0, 0)``
    (expected ratio ``z/(2-2nu)``), Case II ``H12(vartheta0, 0)`` with
    ``H21(0, pi - vartheta1)`` (expected ``1/(2-2nu)``).
    """
    nu = float(nu)
    if not 0.0 < nu < 1.0:
        raise ValueError("factor_check requires 0 < nu < 1")
    if isinstance(omega_tilde, str):
        omega_tilde = parse_potential(omega_tilde)
    grid = np.concatenate([[0.0], diagnostic_grid()])
    wv = np.asarray(omega_tilde(grid), dtype=float) * np.ones_like(grid)
    if not np.all(np.isfinite(wv)) or np.any(wv == 0.0) or np.ptp(np.sign(wv)) != 0:
        raise EvaluationError("omega_tilde must be finite and nowhere vanishing on [0, 1]")
    v12, v21 = factor_potentials(nu, omega_tilde)
    p12 = SingularProblem(nu, v12)
    p21 = SingularProblem(1.0 - nu, v21)

    # vartheta1 from  sin t omega'(1) + cos t omega(1) = 0
    dw = ex.derivative(omega_tilde.ast)
    w1 = float(omega_tilde(1.0))
    dw1 = float(ex.evaluate(dw, 1.0))
    log_der = (0.5 - nu) + dw1 / w1
    vartheta1 = math.atan2(1.0, -log_der) % math.pi
    # vartheta0 from the g1 coefficient of omega / omega_tilde(0) = c g1 - 2nu g2
    heads = build_heads(p12, True, settings)
    x_m = heads.g1.x_match
    w0 = float(omega_tilde(0.0))
    wt = float(omega_tilde(x_m)) / w0
    dwt = float(ex.evaluate(dw, x_m)) / w0
    g2t, dg2t = heads.g2.tilde_at(x_m)
    c1 = -(x_m ** (1.0 - 2.0 * nu)) / (2.0 * nu) * (wt * float(dg2t[0]) - dwt * float(g2t[0]))
    vartheta0 = math.atan2(2.0 * nu, c1)

    def W(p, bc):
        w = solve_pair(p, bc, z, settings).W
        return w

    def ratio(a: WronskianValue, b: WronskianValue) -> float:
        return a.value / b.value * math.exp(a.logscale - b.logscale)

    w12_I = W(p12, BoundaryPair(vartheta0, vartheta1))
    w21_I = W(p21, BoundaryPair(0.0, 0.0))
    w12_II = W(p12, BoundaryPair(vartheta0, 0.0))
    w21_II = W(p21, BoundaryPair(0.0, math.pi - vartheta1))
    return FactorReport(nu, float(z), vartheta0, vartheta1,
                        ratio(w12_I, w21_I), z / (2.0 - 2.0 * nu),
                        ratio(w12_II, w21_II), 1.0 / (2.0 - 2.0 * nu))


# ---------------------------------------------------------------- variation

@dataclass(frozen=True)
class VariationReport:
    """Central differences of ``log det`` and ``log W`` under ``V -> V + eta x w``.

    ``d_green`` is the independent value ``int w phi psi / W``.
    """

    d_logdet: float
    d_logW: float
    d_green: float
    h: float

    @property
    def gap(self) -> float:
        return abs(self.d_logdet - self.d_logW)

    @property
    def gap_green(self) -> float:
        return abs(self.d_logdet - self.d_green)


def variation_check(p: SingularProblem, bc: BoundaryPair, w: PotentialExpr | str,
                    h: float = 1e-4, settings: Settings = DEFAULT) -> VariationReport:
    """Check ``d/deta log det H_eta = d/deta log W(psi_eta, phi_eta)``."""
    from .regint import weighted_green_trace

    _gate(p, bc)
    if isinstance(w, str):
        w = parse_potential(w)
    if w.is_zero:
        return VariationReport(0.0, 0.0, 0.0, h)
    dets = []
    for eta in (h, -h):
        d = zeta_det(p.varied(eta, w), bc, settings)
        if d.sign == 0.0:
            raise PoleError("determinant vanishes inside the difference stencil")
        dets.append(d)
    if dets[0].sign != dets[1].sign:
        raise PoleError("determinant changes sign inside the difference stencil")
    d_logdet = (dets[0].log_value - dets[1].log_value) / (2.0 * h)
    d_logW = (dets[0].wronskian.log_abs - dets[1].wronskian.log_abs) / (2.0 * h)
    d_green = weighted_green_trace(p, bc, 0.0, w, settings)
    return VariationReport(d_logdet, d_logW, d_green, h)

"""Regularised integrals, resolvent traces and the contour determinant.

The trace ``Tr (H + z)^{-1} = int_0^1 phi_z psi_z dx / W(psi_z, phi_z)`` is
evaluated from the two normalised solutions: the Frobenius heads carry the
piece on ``[0, x_match]`` and Gauss-Legendre nodes on the integrator steps
the rest.  For positive spectrum the determinant follows from

    log det H = - fp int_0^infty Tr (H + x)^{-1} dx,

with the divergent ``a x^{-1/2} + b x^{-1}`` behaviour at infinity removed
by the finite-part rule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from .config import DEFAULT, Settings
from .errors import FitError, PoleError, RegIntError
from .frobenius import head_product_integral
from .problem import BoundaryPair, PotentialExpr, SingularProblem, mu_invariants, parse_potential
from .shooting import NormalizedSolution, normalized_psi, solve_pair
from .specfun import bessel_i_scaled, bessel_k_scaled

QUAD_LIMIT = 400
C_CHECK_TOL = 1e-10
GL_ORDER = 8
POLE_TOL = 1e-11
NU0_X_LOW = 1e-10


# ---------------------------------------------------------------- partie finie

@dataclass(frozen=True)
class AsymptoticSpec:
    """Declared power terms ``sum f_j x^{a_j}`` at infinity and at zero.

    ``terms_at_infinity`` lists ``(exponent, coefficient)`` with exponents
    strictly decreasing, ``terms_at_zero`` with exponents strictly increasing.
    """

    terms_at_infinity: tuple[tuple[float, float], ...] = ()
    terms_at_zero: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        inf = tuple((float(a), float(c)) for a, c in self.terms_at_infinity)
        zero = tuple((float(a), float(c)) for a, c in self.terms_at_zero)
        if any(inf[i][0] <= inf[i + 1][0] for i in range(len(inf) - 1)):
            raise ValueError("exponents at infinity must be strictly decreasing")
        if any(zero[i][0] >= zero[i + 1][0] for i in range(len(zero) - 1)):
            raise ValueError("exponents at zero must be strictly increasing")
        object.__setattr__(self, "terms_at_infinity", inf)
        object.__setattr__(self, "terms_at_zero", zero)

    @staticmethod
    def _sum(terms, x):
        return sum(c * x ** a for a, c in terms)


def _quad(g, a, b, points=None) -> float:
    kw = dict(limit=QUAD_LIMIT, epsabs=1e-14, epsrel=1e-12)
    if points is not None and math.isfinite(b):
        inner = [t for t in points if a < t < b]
        if inner:
            kw["points"] = inner
    val, _ = integrate.quad(g, a, b, **kw)
    return float(val)


def _tail_exponent(g, xs) -> float:
    vals = np.array([abs(g(x)) for x in xs])
    if np.all(vals == 0.0):
        return -math.inf
    vals = np.maximum(vals, 1e-300)
    return float(np.polyfit(np.log(xs), np.log(vals), 1)[0])


def _fp_infinity(terms, c: float) -> float:
    # constant term of int_c^R x^a as R -> infinity
    out = 0.0
    for a, coef in terms:
        out += -coef * math.log(c) if a == -1.0 else -coef * c ** (a + 1.0) / (a + 1.0)
    return out


def _fp_zero(terms, c: float) -> float:
    # constant term of int_eps^c x^b as eps -> 0
    out = 0.0
    for b, coef in terms:
        out += coef * math.log(c) if b == -1.0 else coef * c ** (b + 1.0) / (b + 1.0)
    return out


def _reg_once(f, spec: AsymptoticSpec, c: float, lower: float, upper: float,
              breakpoints: Sequence[float], check: bool) -> float:
    bps = sorted(float(t) for t in breakpoints)
    total = 0.0
    # [lower, c]
    if lower == 0.0 and spec.terms_at_zero:
        def g0(x):
            return f(x) - AsymptoticSpec._sum(spec.terms_at_zero, x)
        total += _quad(g0, 0.0, c, bps) + _fp_zero(spec.terms_at_zero, c)
        if check:
            slope = _tail_exponent(g0, np.array([1e-6, 1e-7, 1e-8]) * c)
            if slope <= -1.0 + 1e-2:
                raise RegIntError(f"integrand minus declared terms at 0 behaves like x^{slope:.3g}",
                                  slope)
    elif c > lower:
        total += _quad(f, lower, c, bps)
    # [c, upper]
    if math.isinf(upper):
        terms = spec.terms_at_infinity

        def g(x):
            return f(x) - AsymptoticSpec._sum(terms, x)
        edges = [c] + [t for t in bps if t > c]
        for a, b in zip(edges[:-1], edges[1:]):
            total += _quad(g, a, b)
        total += _quad(g, edges[-1], math.inf)
        total += _fp_infinity(terms, c)
        if check:
            slope = _tail_exponent(g, edges[-1] * np.array([1e3, 1e4, 1e5]) + 1.0)
            if slope >= -1.0 - 1e-2:
                raise RegIntError(f"integrand minus declared terms decays only like x^{slope:.3g}",
                                  slope)
    elif upper > c:
        total += _quad(f, c, upper, bps)
    return total


def reg_integral(f: Callable[[float], float], spec: AsymptoticSpec = AsymptoticSpec(),
                 c: float | None = None, lower: float = 0.0, upper: float = math.inf,
                 breakpoints: Sequence[float] = (), check: bool = True) -> float:
    """Finite-part integral ``fp int_lower^upper f`` split at ``c``.

    Declared terms at zero are used when ``lower == 0`` and those at
    infinity when ``upper`` is infinite.  With ``check`` the value is
    recomputed with the split at a second point and both must agree to
    ``1e-10`` relative.

    Raises
    ------
    RegIntError
        If the subtracted integrand is not integrable at an endpoint, or the
        two splits disagree.

    Examples
    --------
    >>> round(reg_integral(lambda x: 1 / x ** 2 + 1 / x,
    ...                    AsymptoticSpec(((-1.0, 1.0), (-2.0, 1.0))), lower=1.0), 12)
    1.0
    """
    if not lower < upper:
        raise ValueError("need lower < upper")
    if c is None:
        c = 1.0 if lower < 1.0 < upper else (lower + 1.0 if math.isinf(upper) else 0.5 * (lower + upper))
    if not lower <= c <= upper or (lower == 0.0 and c == 0.0):
        raise ValueError("split point c must lie inside the interval")
    val = _reg_once(f, spec, c, lower, upper, breakpoints, check)
    if check:
        c2 = 2.0 * c if 2.0 * c < upper else 0.5 * (c + lower)
        val2 = _reg_once(f, spec, c2, lower, upper, breakpoints, False)
        if abs(val - val2) > C_CHECK_TOL * max(1.0, abs(val)):
            raise RegIntError(f"split dependence {abs(val - val2):.3g} between c={c:g} and c={c2:g}")
    return val


# ---------------------------------------------------------------- Green kernel

_GL_T, _GL_W = np.polynomial.legendre.leggauss(GL_ORDER)


def _pole_guard(phi: NormalizedSolution, psi: NormalizedSolution, W) -> None:
    xs = np.linspace(max(phi.trace.x[0], psi.trace.x[0]), 1.0, 9)
    pf, pd, pl = phi.trace.evaluate(xs)
    sf, sd, sl = psi.trace.evaluate(xs)
    scale = np.max((np.abs(sf * pd) + np.abs(sd * pf)) * np.exp(pl + sl - W.logscale))
    if abs(W.value) <= POLE_TOL * scale:
        raise PoleError("W(psi, phi) vanishes; H + z is not invertible")


def _green_integral(p: SingularProblem, bc: BoundaryPair, z: float,
                    weight: Callable[[np.ndarray], np.ndarray] | None,
                    settings: Settings) -> float:
    pair = solve_pair(p, bc, z, settings, need_psi_head=True)
    phi, psi, W = pair.phi, pair.psi, pair.W
    _pole_guard(phi, psi, W)
    x_m = phi.x_match
    total = 0.0
    if pair.heads.g2 is None and p.nu == 0.0:
        # no second head: carry psi down with the integrator instead
        psi = normalized_psi(p, bc, z, settings, x_low=min(NU0_X_LOW, x_m))
        x_lo = psi.trace.x[0]
    else:
        x_lo = x_m
        g1 = pair.heads.g1
        wv = None if weight is None else np.asarray(weight(g1.grid.nodes), dtype=float) \
            * np.ones_like(g1.grid.nodes)
        a, b = phi.head_coeffs
        al, be = psi.head_coeffs
        head = head_product_integral(g1, pair.heads.g2, a, b, al, be, wv)
        total += head * math.exp(psi.head_logscale + phi.head_logscale - W.logscale) / W.value
    edges = np.union1d(phi.trace.x, psi.trace.x)
    edges = edges[edges >= x_lo]
    lo, hi = edges[:-1], edges[1:]
    keep = hi > lo
    lo, hi = lo[keep], hi[keep]
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    xq = (mid[:, None] + half[:, None] * _GL_T[None, :]).ravel()
    wq = (half[:, None] * _GL_W[None, :]).ravel()
    pf, _, pl = phi.evaluate(xq)
    sf, _, sl = psi.evaluate(xq)
    vals = pf * sf * np.exp(pl + sl - W.logscale) / W.value
    if weight is not None:
        vals = vals * np.asarray(weight(xq), dtype=float)
    total += float(np.dot(wq, vals))
    return total


def resolvent_trace(p: SingularProblem, bc: BoundaryPair, z: float = 0.0,
                    settings: Settings = DEFAULT) -> float:
    """``Tr (H + z)^{-1}`` from the Green kernel diagonal.

    Raises
    ------
    PoleError
        If ``-z`` is (numerically) an eigenvalue.

    Examples
    --------
    >>> round(resolvent_trace(SingularProblem(0.5), BoundaryPair(), 1.0), 9)
    0.156517643
    """
    return _green_integral(p, bc, float(z), None, settings)


def weighted_green_trace(p: SingularProblem, bc: BoundaryPair, z: float,
                         w: PotentialExpr | str, settings: Settings = DEFAULT) -> float:
    """``int_0^1 w(x) G_z(x, x) dx``, the value of ``Tr(w (H + z)^{-1})``."""
    if isinstance(w, str):
        w = parse_potential(w)
    return _green_integral(p, bc, float(z), w, settings)


# ---------------------------------------------------------------- model oracle

def _beta_parts(nu: float, theta1: float, s: float) -> tuple[float, float]:
    # numerator and denominator of beta, each divided by its exponential
    c, sn = math.cos(theta1), math.sin(theta1)
    k0, k1 = bessel_k_scaled(nu, s), bessel_k_scaled(nu + 1.0, s)
    i0, i1 = bessel_i_scaled(nu, s), bessel_i_scaled(nu + 1.0, s)
    num = c * k0 + sn * ((0.5 + nu) * k0 - s * k1)
    den = c * i0 + sn * ((0.5 + nu) * i0 + s * i1)
    if den == 0.0:
        raise PoleError("boundary denominator of beta vanishes")
    return num, den


def beta_coefficient(nu: float, theta1: float, s: float) -> float:
    """``beta(s)`` making ``sqrt(y)(K_nu(ys) - beta I_nu(ys))`` satisfy the condition at 1."""
    num, den = _beta_parts(nu, theta1, s)
    return math.exp(-2.0 * s) * num / den


def model_trace_oracle(nu: float, theta1: float, z: float) -> float:
    """``Tr (l_nu(0, theta1) + z)^{-1}`` from the Bessel resolvent kernel.

    ``z > 0`` is the spectral parameter; the kernel uses ``s = sqrt(z)``.
    """
    if z <= 0.0:
        raise ValueError("model_trace_oracle needs z > 0")
    if nu < 0.0:
        raise ValueError("nu must be >= 0")
    s = math.sqrt(z)
    num, den = _beta_parts(nu, theta1, s)
    ratio = num / den

    def kdiag(x: float) -> float:
        if x == 0.0:
            return 0.0
        t = x * s
        ii = bessel_i_scaled(nu, t)
        return x * (ii * bessel_k_scaled(nu, t) - ii * ii * ratio * math.exp(2.0 * s * (x - 1.0)))

    pts = [min(0.5, 1.0 / s)] if s > 2.0 else None
    return _quad(kdiag, 0.0, 1.0, pts)


# ---------------------------------------------------------------- asymptotics

@dataclass(frozen=True)
class TraceFit:
    """Least-squares fit ``Tr ~ a z^{-1/2} + b z^{-1} + nuisance``.

    ``coefficients`` lists every fitted coefficient against ``exponents``;
    entries flagged in ``log_terms`` carry an extra ``log z``.
    """

    a: float
    b: float
    residual: float
    coefficients: tuple[float, ...] = ()
    exponents: tuple[float, ...] = ()
    log_terms: tuple[bool, ...] = ()
    z: tuple[float, ...] = field(default=(), repr=False)
    trace: tuple[float, ...] = field(default=(), repr=False)

    def model(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        out = np.zeros_like(z)
        for c, e, lg in zip(self.coefficients, self.exponents, self.log_terms):
            out = out + c * z ** e * (np.log(z) if lg else 1.0)
        return out

    def tail_integral(self, Z: float) -> float:
        """``int_Z^infty`` of the nuisance part of the model."""
        out = 0.0
        for c, e, lg in zip(self.coefficients[2:], self.exponents[2:], self.log_terms[2:]):
            k = e + 1.0
            if lg:
                out += c * (-(Z ** k) * math.log(Z) / k + Z ** k / k ** 2)
            else:
                out += -c * Z ** k / k
        return out


# (exponent, log) columns after a and b
NUISANCE = ((-1.5, False), (-1.5, True), (-2.0, False), (-2.5, False), (-2.0, True))
MAX_COND = 1e12


def default_samples(n: int = 17) -> np.ndarray:
    return np.logspace(2.0, 6.0, n)


def fit_trace_asymptotics(p: SingularProblem, bc: BoundaryPair,
                          z_samples: Sequence[float] | None = None, nuisance: int = 4,
                          settings: Settings = DEFAULT, traces: Sequence[float] | None = None
                          ) -> TraceFit:
    """Fit the large-``z`` trace coefficients ``a`` and ``b``.

    Parameters
    ----------
    z_samples
        At least six points in ``[1e2, 1e6]``; default 17 log-spaced points.
    nuisance
        Number of extra terms taken in order from ``z^{-3/2}``,
        ``z^{-3/2} log z``, ``z^{-2}``, ``z^{-5/2}``, ``z^{-2} log z``.
    traces
        Precomputed trace values at ``z_samples``.
    """
    z = default_samples() if z_samples is None else np.asarray(z_samples, dtype=float)
    if z.size < 6:
        raise FitError("need at least 6 samples")
    if np.any(z < 1e2 * (1 - 1e-12)) or np.any(z > 1e6 * (1 + 1e-12)):
        raise FitError("samples must lie in [1e2, 1e6]")
    if not 0 <= nuisance <= len(NUISANCE):
        raise ValueError(f"nuisance must be in 0..{len(NUISANCE)}")
    if traces is None:
        tr = np.array([resolvent_trace(p, bc, float(zz), settings) for zz in z])
    else:
        tr = np.asarray(traces, dtype=float)
    cols = [(-0.5, False), (-1.0, False)] + list(NUISANCE[:nuisance])
    A = np.column_stack([z ** e * (np.log(z) if lg else 1.0) for e, lg in cols])
    A = A / np.abs(tr)[:, None]
    rhs = np.sign(tr)
    norms = np.linalg.norm(A, axis=0)
    As = A / norms
    cond = np.linalg.cond(As)
    if not np.isfinite(cond) or cond > MAX_COND:
        raise FitError(f"ill-conditioned design (cond {cond:.3g}); widen the sample spread")
    coef, *_ = np.linalg.lstsq(As, rhs, rcond=None)
    coef = coef / norms
    resid = float(np.max(np.abs(A @ coef - rhs)))
    return TraceFit(float(coef[0]), float(coef[1]), resid, tuple(float(c) for c in coef),
                    tuple(e for e, _ in cols), tuple(lg for _, lg in cols),
                    tuple(float(v) for v in z), tuple(float(v) for v in tr))


# ---------------------------------------------------------------- contour

@dataclass(frozen=True)
class ContourResult:
    value: float
    log_value: float
    fit: TraceFit
    tail: float
    Z: float
    lambda1: float


MAX_FIT_RESIDUAL = 1e-5


def contour_log_det(p: SingularProblem, bc: BoundaryPair, settings: Settings = DEFAULT,
                    Z: float | None = None, nuisance: int = 4) -> ContourResult:
    """``log det H = -fp int_0^infty Tr (H + x)^{-1} dx`` on the positive axis.

    The trace is integrated numerically on ``[0, Z]``; beyond ``Z`` the
    fitted model is used, its ``a, b`` part through the finite-part rule.

    Raises
    ------
    PoleError
        If the lowest eigenvalue is not positive.
    FitError
        If the asymptotic fit misses the samples by more than ``1e-5``.
    """
    from .determinant import eigenvalues

    Z = settings.Z if Z is None else float(Z)
    ev = eigenvalues(p, bc, 1, settings=settings)
    if not ev.values:
        raise PoleError("no eigenvalue found")
    lam1 = ev.values[0]
    if lam1 <= 0.0:
        raise PoleError(f"lowest eigenvalue {lam1:.6g} is not positive; use char_function "
                        f"at a shift z > {-lam1:.6g} instead")
    fit = fit_trace_asymptotics(p, bc, nuisance=nuisance, settings=settings)
    if fit.residual > MAX_FIT_RESIDUAL:
        raise FitError(f"trace fit residual {fit.residual:.3g} exceeds {MAX_FIT_RESIDUAL:g}")
    spec = AsymptoticSpec(((-0.5, fit.a), (-1.0, fit.b)))

    def tr(x: float) -> float:
        return resolvent_trace(p, bc, x, settings)

    # near 0 and on [1, Z] in the variable t = log x
    head = _quad(tr, 0.0, 1.0)

    def body(t: float) -> float:
        x = math.exp(t)
        return x * (tr(x) - fit.a / math.sqrt(x) - fit.b / x)

    val, _ = integrate.quad(body, 0.0, math.log(Z), limit=QUAD_LIMIT, epsabs=1e-9, epsrel=1e-10)
    # int_Z^infty (model - a/sqrt(x) - b/x) plus fp int_1^infty of the removed terms
    tail = fit.tail_integral(Z)
    total = head + float(val) + tail + _fp_infinity(spec.terms_at_infinity, 1.0)
    log_det = -total
    return ContourResult(math.exp(log_det) if log_det < 709 else math.inf, log_det, fit,
                         tail, Z, lam1)


def zeta_det_contour(p: SingularProblem, bc: BoundaryPair, settings: Settings = DEFAULT) -> float:
    """Determinant from the contour formula; an oracle for ``zeta_det``."""
    return contour_log_det(p, bc, settings).value

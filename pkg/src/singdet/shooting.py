"""Normalised solutions of ``(H + z) g = 0`` and their Wronskian.

``phi`` starts from the Frobenius head at ``x_match`` and is propagated to 1;
``psi`` starts from the boundary data at 1 and is propagated down to
``x_match``.  Both are stored as ``e^L (f, f')`` on the accepted Runge-Kutta
nodes, with quintic Hermite dense output built from ``f, f'`` and
``f'' = q f``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .config import DEFAULT, Settings
from .errors import IntegrationError, WronskianError
from .expr import compile_program
from .frobenius import SingularHead, auto_x_match, build_g1, build_g2
from .problem import BoundaryPair, SingularProblem, check_admissible

MAX_STEPS = 5_000_000
CONSTANCY_TOL = 1e-6


@dataclass(frozen=True)
class Trace:
    """Accepted integrator nodes in ascending ``x``."""

    x: np.ndarray
    f: np.ndarray
    g: np.ndarray
    q: np.ndarray
    logscale: np.ndarray

    def evaluate(self, xq) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Mantissas ``f, f'`` and log-scales at ``xq`` (quintic Hermite)."""
        xq = np.atleast_1d(np.asarray(xq, dtype=float))
        i = np.clip(np.searchsorted(self.x, xq, side="right") - 1, 0, len(self.x) - 2)
        return self._hermite(i, xq)

    def coefficients(self, i: np.ndarray):
        x0, x1 = self.x[i], self.x[i + 1]
        h = x1 - x0
        rho = np.exp(self.logscale[i + 1] - self.logscale[i])
        f0, g0 = self.f[i], self.g[i]
        f1, g1 = self.f[i + 1] * rho, self.g[i + 1] * rho
        a0 = self.q[i] * f0
        a1 = self.q[i + 1] * f1
        c0 = f0
        c1 = h * g0
        c2 = 0.5 * h * h * a0
        A = f1 - (c0 + c1 + c2)
        B = h * g1 - (c1 + 2.0 * c2)
        Cc = h * h * a1 - 2.0 * c2
        c3 = 10.0 * A - 4.0 * B + 0.5 * Cc
        c4 = -15.0 * A + 7.0 * B - Cc
        c5 = 6.0 * A - 3.0 * B + 0.5 * Cc
        return x0, h, (c0, c1, c2, c3, c4, c5)

    def _hermite(self, i, xq):
        x0, h, (c0, c1, c2, c3, c4, c5) = self.coefficients(i)
        t = (xq - x0) / h
        f = c0 + t * (c1 + t * (c2 + t * (c3 + t * (c4 + t * c5))))
        df = (c1 + t * (2.0 * c2 + t * (3.0 * c3 + t * (4.0 * c4 + t * 5.0 * c5)))) / h
        return f, df, self.logscale[i]


@dataclass(frozen=True)
class NormalizedSolution:
    """Solution normalised at one endpoint.

    ``kind`` is ``"phi"`` (normalised at 0) or ``"psi"`` (at 1).  On
    ``[0, x_match]`` the solution equals ``e^{head_logscale} (a g1 + b g2)``
    with ``head_coeffs = (a, b)``.
    """

    kind: str
    problem: SingularProblem
    bc: BoundaryPair
    z: float
    x_low: float
    trace: Trace
    g1: SingularHead
    g2: SingularHead | None
    head_coeffs: tuple[float, float]
    head_logscale: float = 0.0
    steps: int = field(default=0, compare=False)

    @property
    def x_match(self) -> float:
        return self.g1.x_match

    @property
    def logscale(self) -> np.ndarray:
        return self.trace.logscale

    def evaluate(self, x) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(f, f', L)`` with the solution equal to ``e^L f``."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        f = np.empty_like(x)
        df = np.empty_like(x)
        L = np.empty_like(x)
        inner = x < self.trace.x[0]
        if (~inner).any():
            f[~inner], df[~inner], L[~inner] = self.trace.evaluate(x[~inner])
        if inner.any():
            if self.g1 is None:
                raise ValueError(f"{self.kind} is only available on [{self.trace.x[0]:.6g}, 1]")
            a, b = self.head_coeffs
            xi = x[inner]
            val = a * self.g1(xi)
            der = a * self.g1.derivative(xi)
            if b != 0.0:
                val = val + b * self.g2(xi)
                der = der + b * self.g2.derivative(xi)
            f[inner], df[inner], L[inner] = val, der, self.head_logscale
        return f, df, L

    def __call__(self, x):
        f, _, L = self.evaluate(x)
        out = f * np.exp(L)
        return out if np.ndim(x) else float(out[0])

    def derivative(self, x):
        _, df, L = self.evaluate(x)
        out = df * np.exp(L)
        return out if np.ndim(x) else float(out[0])


@dataclass(frozen=True)
class WronskianValue:
    """``W = value * exp(logscale)``; ``constancy_dev`` is the relative spread."""

    value: float
    logscale: float
    constancy_dev: float
    samples: tuple[float, ...] = ()

    @property
    def sign(self) -> float:
        return float(np.sign(self.value))

    @property
    def log_abs(self) -> float:
        return math.log(abs(self.value)) + self.logscale if self.value != 0.0 else -math.inf

    @property
    def full(self) -> float:
        """Plain float, ``inf`` when not representable."""
        if self.value == 0.0:
            return 0.0
        la = self.log_abs
        if la > 709.0:
            return math.copysign(math.inf, self.value)
        return self.value * math.exp(self.logscale)


# ---------------------------------------------------------------- building

@dataclass(frozen=True)
class Heads:
    g1: SingularHead
    g2: SingularHead | None


def build_heads(p: SingularProblem, need_g2: bool, settings: Settings = DEFAULT) -> Heads:
    """Heads for ``p`` with ``x_match`` halved until both are well defined."""
    x_m = auto_x_match(p, settings.head_tol, settings.x_match)
    last = None
    while x_m >= 1e-7:
        g1 = build_g1(p, x_m, settings.head_tol)
        if not need_g2 or p.nu == 0.0:
            return Heads(g1, None)
        try:
            return Heads(g1, build_g2(p, g1, settings.head_tol))
        except Exception as exc:  # gt1 too small near x_match
            last = exc
            x_m *= 0.5
    raise last  # pragma: no cover


def _run(p: SingularProblem, x0: float, x1: float, f0: float, g0: float,
         settings: Settings, h0: float) -> tuple[Trace, int]:
    code, arg = compile_program(p.q_ast())
    h = settings.h0 if settings.h0 is not None else h0
    xs, fs, gs, qs, ls, n, status = K.propagate(code, arg, float(x0), float(x1), float(f0),
                                                float(g0), settings.rtol, settings.atol,
                                                float(h), MAX_STEPS)
    if status != K.STATUS_OK:
        reason = {K.STATUS_MAX_STEPS: "step limit reached",
                  K.STATUS_STEP_UNDERFLOW: "step size underflow",
                  K.STATUS_NONFINITE: "non-finite coefficient"}[int(status)]
        raise IntegrationError(f"integration on [{min(x0, x1):.3g}, {max(x0, x1):.3g}] failed: "
                               f"{reason} near x = {xs[-1]:.6g}")
    if x1 < x0:
        xs, fs, gs, qs, ls = xs[::-1], fs[::-1], gs[::-1], qs[::-1], ls[::-1]
    return Trace(xs.copy(), fs.copy(), gs.copy(), qs.copy(), ls.copy()), int(n)


def _phi_coeffs(nu: float, bc: BoundaryPair) -> tuple[float, float]:
    if bc.theta0 == 0.0:
        return 1.0, 0.0
    return 2.0 * nu / math.tan(bc.theta0), -2.0 * nu


def _ensure(p: SingularProblem, bc: BoundaryPair, z: float, determinant: bool) -> SingularProblem:
    check_admissible(p.nu, bc, determinant=determinant)
    if bc.theta0 != 0.0 and not 0.0 < p.nu < 1.0:
        raise ValueError("theta0 > 0 requires 0 < nu < 1")
    return p.shifted(z) if z != 0.0 else p


def normalized_phi(p: SingularProblem, bc: BoundaryPair, z: float = 0.0,
                   settings: Settings = DEFAULT, heads: Heads | None = None) -> NormalizedSolution:
    """Solution normalised at 0 for ``theta0``, propagated to ``x = 1``."""
    pz = _ensure(p, bc, z, determinant=False)
    if heads is None:
        heads = build_heads(pz, bc.theta0 != 0.0, settings)
    a, b = _phi_coeffs(p.nu, bc)
    x_m = heads.g1.x_match
    f0 = a * float(heads.g1(x_m))
    g0 = a * float(heads.g1.derivative(x_m))
    if b != 0.0:
        f0 += b * float(heads.g2(x_m))
        g0 += b * float(heads.g2.derivative(x_m))
    trace, n = _run(pz, x_m, 1.0, f0, g0, settings, 0.02 * x_m)
    return NormalizedSolution("phi", p, bc, float(z), x_m, trace, heads.g1, heads.g2,
                              (a, b), 0.0, n)


def normalized_psi(p: SingularProblem, bc: BoundaryPair, z: float = 0.0,
                   settings: Settings = DEFAULT, x_low: float | None = None,
                   heads: Heads | None = None) -> NormalizedSolution:
    """Solution normalised at 1 for ``theta1``, propagated down to ``x_low``.

    When ``heads`` are supplied (or ``x_low`` is left at its default) the
    solution is also represented on ``[0, x_low]`` through ``g1, g2``.
    """
    pz = _ensure(p, bc, z, determinant=False)
    if heads is None and x_low is None:
        heads = build_heads(pz, pz.nu > 0.0, settings)
    if x_low is None:
        x_low = heads.g1.x_match
    if bc.theta1 == 0.0:
        f1, g1v = 0.0, -1.0
    else:
        f1, g1v = 1.0, -1.0 / math.tan(bc.theta1)
    trace, n = _run(pz, 1.0, x_low, f1, g1v, settings, 0.01 * (1.0 - x_low))
    coeffs = (0.0, 0.0)
    L = 0.0
    if heads is not None and heads.g2 is not None and abs(heads.g1.x_match - x_low) < 1e-15:
        # psi = alpha g1 + beta g2 with alpha = W(psi, g2), beta = -W(psi, g1)
        f, df, Ls = trace.evaluate(x_low)
        g1v_, dg1 = float(heads.g1(x_low)), float(heads.g1.derivative(x_low))
        g2v, dg2 = float(heads.g2(x_low)), float(heads.g2.derivative(x_low))
        alpha = float(f[0]) * dg2 - float(df[0]) * g2v
        beta = -(float(f[0]) * dg1 - float(df[0]) * g1v_)
        coeffs = (alpha, beta)
        L = float(Ls[0])
    g1h = heads.g1 if heads is not None else None
    g2h = heads.g2 if heads is not None else None
    return NormalizedSolution("psi", p, bc, float(z), float(x_low), trace, g1h, g2h, coeffs, L, n)


def wronskian(phi: NormalizedSolution, psi: NormalizedSolution, points: int | None = None,
              check: bool = True) -> WronskianValue:
    """``W(psi, phi) = psi phi' - psi' phi`` from the median over sample points.

    Raises
    ------
    WronskianError
        If the relative spread exceeds ``1e-6 max(1, |W|)``.
    """
    n = DEFAULT.wronskian_points if points is None else max(5, int(points))
    lo = max(phi.trace.x[0], psi.trace.x[0])
    xs = np.linspace(lo, 1.0, n)
    pf, pd, pl = phi.trace.evaluate(xs)
    sf, sd, sl = psi.trace.evaluate(xs)
    W = sf * pd - sd * pf
    L = pl + sl
    Lmax = float(np.max(L))
    r = W * np.exp(L - Lmax)
    med = float(np.median(r))
    scale = max(abs(med), math.exp(-Lmax) if Lmax < 700 else 0.0)
    dev = float(np.max(np.abs(r - med)) / scale) if scale > 0.0 else 0.0
    if med != 0.0:
        # move the magnitude into the log-scale
        k = math.floor(math.log(abs(med)))
        med_n = med * math.exp(-k)
        Lmax += k
        r = r * math.exp(-k)
        med = med_n
    out = WronskianValue(med, Lmax, dev, tuple(float(v) for v in r))
    if check and dev > CONSTANCY_TOL:
        raise WronskianError(f"Wronskian not constant: relative spread {dev:.3g} > {CONSTANCY_TOL:g}",
                             dev)
    return out


@dataclass(frozen=True)
class Pair:
    phi: NormalizedSolution
    psi: NormalizedSolution
    W: WronskianValue
    heads: Heads


def solve_pair(p: SingularProblem, bc: BoundaryPair, z: float = 0.0,
               settings: Settings = DEFAULT, need_psi_head: bool = False,
               check: bool = True) -> Pair:
    """Both normalised solutions on a shared ``x_match`` plus their Wronskian."""
    pz = _ensure(p, bc, z, determinant=False)
    need_g2 = bc.theta0 != 0.0 or (need_psi_head and pz.nu > 0.0)
    heads = build_heads(pz, need_g2, settings)
    phi = normalized_phi(p, bc, z, settings, heads)
    psi = normalized_psi(p, bc, z, settings, heads.g1.x_match, heads if need_psi_head else None)
    return Pair(phi, psi, wronskian(phi, psi, settings.wronskian_points, check), heads)

"""Fundamental system ``g1, g2`` of ``H g = 0`` near the singular end.

``g1 = x^{nu+1/2} (1 + phi)`` where ``phi`` solves the Volterra equation

    phi = K[V (1 + phi)],   (K F)(x) = int_0^x (1 - (y/x)^{2 nu}) / (2 nu) F(y) dy,

and ``g2 = C g1`` by reduction of order with ``C' = g1^{-2}``.  Functions
live on geometric panels ``[x_m 2^{-j-1}, x_m 2^{-j}]``, each carrying
Chebyshev-Lobatto nodes; the panel below ``x_m 2^{-J}`` is closed with the
leading power behaviour.  All cumulative integrals are formed in scaled
variables such as ``x^{-a} int_0^x y^a F`` so that ``x^{+-2nu}`` never
overflows.

For a perturbed potential ``V + dV`` (spectral shift or variation) the
remainder is split as ``phi = phi0 + dphi`` with ``phi0`` belonging to the
unperturbed ``V``, and ``g2`` is pinned so that its expansion coefficients
at 0 agree with those of the unperturbed problem.  This keeps the boundary
functionals ``c1, c2`` independent of the perturbation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial import chebyshev as C

from .config import DEFAULT
from .errors import EvaluationError, FrobeniusError
from .problem import SingularProblem

N_PANELS = 52
PANEL_ORDER = 20
MAX_ITER = 12
MIN_X_MATCH = 1e-7
MIN_TILDE = 0.5


@lru_cache(maxsize=8)
def _cheb_tables(m: int):
    t = -np.cos(np.pi * np.arange(m) / (m - 1))
    V = C.chebvander(t, m - 1)
    Vinv = np.linalg.inv(V)
    S = np.empty((m, m))
    D = np.empty((m, m))
    for j in range(m):
        coef = Vinv[:, j]
        S[:, j] = C.chebval(t, C.chebint(coef, lbnd=-1.0))
        D[:, j] = C.chebval(t, C.chebder(coef))
    w = np.ones(m)
    w[1::2] = -1.0
    w[0] *= 0.5
    w[-1] *= 0.5
    return t, S, D, w


@dataclass(frozen=True)
class PanelGrid:
    """Geometric panels on ``[x_tip, x_match]`` with ``m`` nodes each."""

    x_match: float
    edges: np.ndarray
    nodes: np.ndarray
    m: int

    @property
    def x_tip(self) -> float:
        return float(self.edges[0])

    @property
    def halfwidth(self) -> np.ndarray:
        return 0.5 * np.diff(self.edges)

    def panel_of(self, x: np.ndarray) -> np.ndarray:
        k = np.searchsorted(self.edges, x, side="right") - 1
        return np.clip(k, 0, len(self.edges) - 2)

    def interpolate(self, values: np.ndarray, x) -> np.ndarray:
        """Barycentric Chebyshev interpolation of panel data at ``x``."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        t, _, _, w = _cheb_tables(self.m)
        k = self.panel_of(x)
        a = self.edges[k]
        b = self.edges[k + 1]
        s = (2.0 * x - a - b) / (b - a)
        diff = s[:, None] - t[None, :]
        exact = diff == 0.0
        diff[exact] = 1.0
        wk = w[None, :] / diff
        out = np.sum(wk * values[k], axis=1) / np.sum(wk, axis=1)
        hit = exact.any(axis=1)
        if hit.any():
            rows = np.nonzero(hit)[0]
            out[rows] = values[k[rows], np.argmax(exact[rows], axis=1)]
        return out

    def differentiate(self, values: np.ndarray) -> np.ndarray:
        _, _, D, _ = _cheb_tables(self.m)
        return (values @ D.T) / self.halfwidth[:, None]

    def integrate(self, values: np.ndarray, tip_power: float) -> float:
        """``int_0^{x_match}`` of panel data, tip closed by ``F ~ y^tip_power``."""
        _, S, _, _ = _cheb_tables(self.m)
        body = float(np.sum(self.halfwidth * (values @ S[-1])))
        return body + float(values[0, 0]) * self.x_tip / (tip_power + 1.0)


def make_grid(x_match: float, panels: int = N_PANELS, m: int = PANEL_ORDER) -> PanelGrid:
    if not 0.0 < x_match < 1.0:
        raise ValueError(f"x_match must lie in (0, 1), got {x_match}")
    edges = x_match * 2.0 ** -np.arange(panels, -1, -1, dtype=float)
    t, _, _, _ = _cheb_tables(m)
    a = edges[:-1, None]
    b = edges[1:, None]
    nodes = 0.5 * (b - a) * t[None, :] + 0.5 * (a + b)
    nodes[:, 0] = edges[:-1]
    nodes[:, -1] = edges[1:]
    return PanelGrid(float(x_match), edges, nodes, m)


# ---------------------------------------------------------------- scaled sums

def cum_up(grid: PanelGrid, F: np.ndarray, alpha: float, tip_power: float = 0.0) -> np.ndarray:
    """``U(x) = x^{-alpha} int_0^x y^alpha F(y) dy`` at every node.

    Below the first edge ``F`` is taken as ``F(x_tip) (y/x_tip)^tip_power``.
    """
    _, S, _, _ = _cheb_tables(grid.m)
    out = np.empty_like(F)
    hw = grid.halfwidth
    u_a = F[0, 0] * grid.x_tip / (alpha + tip_power + 1.0)
    for k in range(F.shape[0]):
        a = grid.edges[k]
        ratio = grid.nodes[k] / a
        w = ratio ** alpha * F[k] if alpha != 0.0 else F[k]
        acc = hw[k] * (S @ w)
        uk = (u_a + acc) * ratio ** -alpha if alpha != 0.0 else u_a + acc
        out[k] = uk
        u_a = uk[-1]
    return out


def cum_down(grid: PanelGrid, F: np.ndarray, alpha: float, top: int) -> np.ndarray:
    """``D(x) = x^{-alpha} int_x^{x0} y^alpha F(y) dy`` with ``x0 = edges[top]``.

    Panels at or above ``top`` are filled with NaN.
    """
    _, S, _, _ = _cheb_tables(grid.m)
    out = np.full_like(F, np.nan)
    hw = grid.halfwidth
    d_b = 0.0
    for k in range(top - 1, -1, -1):
        b = grid.edges[k + 1]
        ratio = grid.nodes[k] / b
        w = ratio ** alpha * F[k]
        cum = hw[k] * (S @ w)
        dk = (d_b + cum[-1] - cum) * ratio ** -alpha
        out[k] = dk
        d_b = dk[0]
    return out


def cum_log(grid: PanelGrid, F: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``int_0^x log(x/y) F dy`` and ``int_0^x F dy`` (nu = 0 kernel)."""
    _, S, _, _ = _cheb_tables(grid.m)
    L = np.empty_like(F)
    A = np.empty_like(F)
    hw = grid.halfwidth
    t = grid.x_tip
    l_a = F[0, 0] * t
    a_a = F[0, 0] * t
    for k in range(F.shape[0]):
        a = grid.edges[k]
        y = grid.nodes[k]
        lr = np.log(y / a)
        i0 = hw[k] * (S @ F[k])
        i1 = hw[k] * (S @ (lr * F[k]))
        L[k] = l_a + lr * a_a + lr * i0 - i1
        A[k] = a_a + i0
        l_a, a_a = L[k, -1], A[k, -1]
    return L, A


# ---------------------------------------------------------------- Volterra

def _tail_sum(M: float, n: int) -> float:
    """``sum_{k >= n} M^k / k!``."""
    if M > 100.0:
        return math.inf
    term = M ** n / math.factorial(n)
    total = 0.0
    k = n
    while term > 1e-300:
        total += term
        k += 1
        term *= M / k
        if k > n + 400:
            break
    return total


def _apply_K(grid: PanelGrid, nu: float, F: np.ndarray):
    if nu == 0.0:
        L, A = cum_log(grid, F)
        return L, A / grid.nodes
    h0 = cum_up(grid, F, 0.0)
    h2 = cum_up(grid, F, 2.0 * nu)
    return (h0 - h2) / (2.0 * nu), h2 / grid.nodes


def _kernel_mass(grid: PanelGrid, nu: float, F: np.ndarray) -> float:
    """Bound constant: ``int |F| / nu`` or ``2 int |F log y|`` for nu = 0."""
    if nu == 0.0:
        return 2.0 * grid.integrate(np.abs(F * np.log(grid.nodes)), 0.0)
    return grid.integrate(np.abs(F), 0.0) / nu


def _solve_volterra(grid, nu, V, src, tol, max_iter=MAX_ITER):
    """Iterate ``phi = K[src + V phi]`` with the factorial tail certificate."""
    M = _kernel_mass(grid, nu, V)
    S0 = _kernel_mass(grid, nu, src)
    n = 1
    while S0 * _tail_sum(M, n) > tol:
        n += 1
        if n > max_iter:
            raise FrobeniusError(
                f"Volterra tail bound {S0 * _tail_sum(M, max_iter):.3g} exceeds tol {tol:.3g} "
                f"after {max_iter} iterations", S0 * _tail_sum(M, max_iter))
    tail = S0 * _tail_sum(M, n)
    phi, dphi = _apply_K(grid, nu, src)
    for _ in range(n - 1):
        phi, dphi = _apply_K(grid, nu, src + V * phi)
    return phi, dphi, tail, n


# ---------------------------------------------------------------- heads

@dataclass(frozen=True)
class SingularHead:
    """``g(x) = prefactor x^exponent gt(x)`` on ``(0, x_match]``.

    Attributes
    ----------
    tilde, dtilde
        ``gt`` and ``gt'`` at the grid nodes; ``remainder = gt - 1``.
    tail
        Certified sup bound of the discarded Volterra tail.
    base_remainder
        Remainder of the unperturbed potential (g1 only); used to pin g2.
    wronskian_dev
        ``max |W(g1, g2) - 1|`` on the grid (g2 only).
    """

    kind: str
    nu: float
    exponent: float
    prefactor: float
    grid: PanelGrid
    tilde: np.ndarray
    dtilde: np.ndarray
    tail: float
    iterations: int
    base_remainder: np.ndarray | None = None
    delta_remainder: np.ndarray | None = None
    wronskian_dev: float = 0.0

    @property
    def x_match(self) -> float:
        return self.grid.x_match

    @property
    def remainder(self) -> np.ndarray:
        return self.tilde - 1.0

    def tilde_at(self, x) -> tuple[np.ndarray, np.ndarray]:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        g = self.grid.interpolate(self.tilde, x)
        dg = self.grid.interpolate(self.dtilde, x)
        below = x < self.grid.x_tip
        if below.any():
            # linear continuation of gt towards gt(0) = 1
            t = self.grid.x_tip
            slope = (self.tilde[0, 0] - 1.0) / t
            g[below] = 1.0 + slope * x[below]
            dg[below] = slope
        return g, dg

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        g, _ = self.tilde_at(x)
        return (self.prefactor * x.ravel() ** self.exponent * g).reshape(x.shape)

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        g, dg = self.tilde_at(x)
        xr = x.ravel()
        e = self.exponent
        return (self.prefactor * xr ** (e - 1.0) * (e * g + xr * dg)).reshape(x.shape)


def _evaluate_on(grid: PanelGrid, f) -> np.ndarray:
    vals = np.asarray(f(grid.nodes), dtype=float) * np.ones_like(grid.nodes)
    if not np.all(np.isfinite(vals)):
        bad = grid.nodes[~np.isfinite(vals)]
        raise EvaluationError(f"potential not finite near x = {bad.min():.3g}", float(bad.min()))
    return vals


def auto_x_match(p: SingularProblem, tol: float, start: float | None = None) -> float:
    """Largest ``start 2^-k`` whose a priori Volterra bound meets ``tol``."""
    x_m = DEFAULT.x_match if start is None else float(start)
    while x_m >= MIN_X_MATCH:
        grid = make_grid(x_m)
        V = _evaluate_on(grid, p.effective)
        M = _kernel_mass(grid, p.nu, V)
        S0 = M
        if p.perturbed:
            S0 = max(M, _kernel_mass(grid, p.nu, _evaluate_on(grid, p.delta)))
        # a small safety margin for the (1 + phi0) factor in the perturbation source
        if M < 50.0 and 2.0 * S0 * math.exp(M) * _tail_sum(M, MAX_ITER) <= tol:
            return x_m
        x_m *= 0.5
    raise FrobeniusError(f"no x_match >= {MIN_X_MATCH} meets the Volterra bound")


def build_g1(p: SingularProblem, x_match: float | None = None, tol: float | None = None) -> SingularHead:
    """Regular-at-0 solution ``g1 = x^{nu+1/2}(1 + phi)``.

    Parameters
    ----------
    x_match
        Right end of the head; ``None`` starts at the default and halves it
        until the tail bound allows ``<= 12`` iterations.
    tol
        Required certified tail bound.

    Raises
    ------
    FrobeniusError
        When the iteration cap is reached before the bound drops below tol.
    """
    tol = DEFAULT.head_tol if tol is None else float(tol)
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    if x_match is None:
        x_match = auto_x_match(p, tol)
    grid = make_grid(float(x_match))
    nu = p.nu
    V0 = _evaluate_on(grid, p.reference)
    if not p.perturbed:
        phi, dphi, tail, n = _solve_volterra(grid, nu, V0, V0, tol)
        return SingularHead("g1", nu, nu + 0.5, 1.0, grid, 1.0 + phi, dphi, tail, n,
                            base_remainder=phi)
    phi0, dphi0, tail0, n0 = _solve_volterra(grid, nu, V0, V0, 0.5 * tol)
    dV = _evaluate_on(grid, p.delta)
    Veff = V0 + dV
    dphi_, ddphi, tail1, n1 = _solve_volterra(grid, nu, Veff, dV * (1.0 + phi0), 0.5 * tol)
    return SingularHead("g1", nu, nu + 0.5, 1.0, grid, 1.0 + phi0 + dphi_, dphi0 + ddphi,
                        tail0 + tail1, max(n0, n1), base_remainder=phi0, delta_remainder=dphi_)


def build_g2(p: SingularProblem, g1: SingularHead, tol: float | None = None) -> SingularHead:
    """Second solution ``g2 = -(1/(2 nu)) x^{1/2-nu} (1 + phi2)`` with ``W(g1, g2) = 1``.

    ``g2 = C g1`` where, with ``u = gt1^{-2}`` and ``u0`` the same quantity
    for the unperturbed potential,

        C(x) = -x^{-2nu}/(2nu) - int_x^{x0} y^{-2nu-1}(u0 - 1) dy
               + int_0^x y^{-2nu-1}(u - u0) dy.

    The last integral converges for ``nu < 1``; for ``nu >= 1`` (where no
    boundary parameter exists) ``u0`` is replaced by ``u`` in the middle
    term and the last one is dropped.
    """
    tol = DEFAULT.head_tol if tol is None else float(tol)
    nu = p.nu
    if nu == 0.0:
        raise FrobeniusError("the second solution is not implemented for nu = 0")
    grid = g1.grid
    gt = g1.tilde
    base = g1.base_remainder if g1.base_remainder is not None else g1.tilde - 1.0
    # x0: last panel edge below which |gt| stays >= 1/2
    ok = np.minimum.accumulate(np.minimum(np.abs(gt), np.abs(1.0 + base)).min(axis=1)) >= MIN_TILDE
    top = int(np.sum(ok))
    if top < grid.nodes.shape[0]:
        raise FrobeniusError(
            f"gt1 drops below {MIN_TILDE} before x_match = {grid.x_match:.3g}; use a smaller x_match")
    two_nu = 2.0 * nu
    alpha = -two_nu - 1.0
    consistent = g1.delta_remainder is not None and nu < 1.0
    if consistent:
        u0m1 = np.expm1(-2.0 * np.log1p(base))
        ratio = g1.delta_remainder / (1.0 + base)
        G = (1.0 + u0m1) * np.expm1(-2.0 * np.log1p(ratio))
        T = cum_up(grid, G, alpha, tip_power=2.0) / grid.nodes
    else:
        u0m1 = np.expm1(-2.0 * np.log1p(gt - 1.0))
        T = 0.0
    S = cum_down(grid, u0m1, alpha, top) / grid.nodes
    Q = 1.0 + two_nu * S - two_nu * T
    u = gt ** -2.0
    dQ = two_nu / grid.nodes * (Q - u)
    tilde2 = gt * Q
    dtilde2 = g1.dtilde * Q + gt * dQ
    # independent check: spectral derivative of gt2 against W = 1
    d2 = grid.differentiate(tilde2)
    W = gt * tilde2 - grid.nodes / two_nu * (gt * d2 - g1.dtilde * tilde2)
    dev = float(np.max(np.abs(W - 1.0)))
    head = SingularHead("g2", nu, 0.5 - nu, -1.0 / two_nu, grid, tilde2, dtilde2,
                        g1.tail * (1.0 + float(np.max(np.abs(Q)))), g1.iterations,
                        wronskian_dev=dev)
    return head


def head_product_integral(g1: SingularHead, g2: SingularHead | None,
                          a1: float, b1: float, a2: float, b2: float,
                          weight: np.ndarray | None = None) -> float:
    """``int_0^{x_match} (a1 g1 + b1 g2)(a2 g1 + b2 g2) w dx`` in overflow-safe form."""
    grid = g1.grid
    x = grid.nodes
    nu = g1.nu
    w = 1.0 if weight is None else weight
    total = 0.0
    c11 = a1 * a2
    if c11 != 0.0:
        total += c11 * grid.integrate(x ** (2.0 * nu + 1.0) * g1.tilde ** 2 * w, 2.0 * nu + 1.0)
    c12 = a1 * b2 + b1 * a2
    c22 = b1 * b2
    if (c12 != 0.0 or c22 != 0.0) and g2 is None:
        raise ValueError("second solution required")
    if c12 != 0.0:
        total += c12 * grid.integrate(-x / (2.0 * nu) * g1.tilde * g2.tilde * w, 1.0)
    if c22 != 0.0:
        total += c22 * grid.integrate(x ** (1.0 - 2.0 * nu) * g2.tilde ** 2 * w / (4.0 * nu * nu),
                                      1.0 - 2.0 * nu)
    return total

"""Operator instances ``H = -d^2/dx^2 + (nu^2 - 1/4)/x^2 + V(x)/x`` on [0, 1].

A :class:`SingularProblem` carries the order, the potential numerator ``V``
and optional perturbations ``V -> V + z x + eta x w(x)``.  The unperturbed
``V`` is the reference for the boundary functionals at ``x = 0``, so shifted
and varied operators share the boundary condition of the original one.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import expr as ex
from .errors import AdmissibilityError, EvaluationError

SNAP = 1e-12


@dataclass(frozen=True)
class PotentialExpr:
    """Parsed potential ``V``; call it on an array of ``x`` values."""

    source: str
    ast: ex.Node = field(compare=False, repr=False)

    def __call__(self, x):
        return ex.evaluate(self.ast, x)

    @property
    def is_zero(self) -> bool:
        return self.ast == ex.ZERO

    def serialize(self) -> str:
        return ex.serialize(self.ast)


def parse_potential(source: str) -> PotentialExpr:
    """Parse a potential expression in ``x``.

    >>> float(parse_potential("x^2 - 1")(0.5))
    -0.75
    """
    return PotentialExpr(str(source), ex.parse(str(source)))


def potential_from_ast(node: ex.Node) -> PotentialExpr:
    return PotentialExpr(ex.serialize(node), node)


ZERO_POTENTIAL = PotentialExpr("0", ex.ZERO)


@dataclass(frozen=True)
class SingularProblem:
    """Order ``nu``, potential ``V`` and spectral shift.

    ``zshift`` and ``variation = (eta, w)`` perturb the effective potential
    to ``V + zshift x + eta x w``.
    """

    nu: float
    potential: PotentialExpr = ZERO_POTENTIAL
    zshift: float = 0.0
    variation: tuple[float, PotentialExpr] | None = None

    def __post_init__(self):
        nu = float(self.nu)
        if not math.isfinite(nu) or nu < 0.0:
            raise ValueError(f"nu must be a finite number >= 0, got {self.nu}")
        object.__setattr__(self, "nu", nu)
        if isinstance(self.potential, str):
            object.__setattr__(self, "potential", parse_potential(self.potential))
        object.__setattr__(self, "zshift", float(self.zshift))

    def shifted(self, z: float) -> "SingularProblem":
        """Problem for ``H + z``."""
        return SingularProblem(self.nu, self.potential, self.zshift + float(z), self.variation)

    def varied(self, eta: float, w: PotentialExpr | str) -> "SingularProblem":
        """Problem for ``V + eta x w`` (replaces any previous variation)."""
        if isinstance(w, str):
            w = parse_potential(w)
        return SingularProblem(self.nu, self.potential, self.zshift, (float(eta), w))

    @property
    def perturbed(self) -> bool:
        return self.zshift != 0.0 or (self.variation is not None and self.variation[0] != 0.0)

    def perturbation_ast(self) -> ex.Node:
        """``dV = zshift x + eta x w``."""
        node = ex.mul(ex.Num(self.zshift), ex.X)
        if self.variation is not None and self.variation[0] != 0.0:
            eta, w = self.variation
            node = ex.add(node, ex.mul(ex.Num(eta), ex.mul(ex.X, w.ast)))
        return node

    def effective_ast(self) -> ex.Node:
        return ex.add(self.potential.ast, self.perturbation_ast())

    def q_ast(self) -> ex.Node:
        """Coefficient ``q`` of ``f'' = q f``: ``(nu^2 - 1/4)/x^2 + V_eff/x``."""
        c = self.nu * self.nu - 0.25
        sing = ex.div(ex.Num(c), ex.BinOp("^", ex.X, ex.Num(2.0))) if c != 0.0 else ex.ZERO
        return ex.add(sing, ex.div(self.effective_ast(), ex.X))

    def reference(self, x):
        return ex.evaluate(self.potential.ast, x)

    def effective(self, x):
        return ex.evaluate(self.effective_ast(), x)

    def delta(self, x):
        return ex.evaluate(self.perturbation_ast(), x)


@dataclass(frozen=True)
class BoundaryPair:
    """Separated boundary angles in radians.

    ``theta0`` selects ``sin t c1(f) + cos t c2(f) = 0`` at the singular end,
    ``theta1`` selects ``sin t f'(1) + cos t f(1) = 0``.  Values within
    ``1e-12`` of zero are snapped to exactly zero.
    """

    theta0: float = 0.0
    theta1: float = 0.0

    def __post_init__(self):
        for name in ("theta0", "theta1"):
            t = float(getattr(self, name))
            if not math.isfinite(t):
                raise AdmissibilityError(f"{name} must be finite")
            if abs(t) < SNAP:
                t = 0.0
            if not 0.0 <= t < math.pi:
                raise AdmissibilityError(f"{name} = {t} outside [0, pi)")
            object.__setattr__(self, name, t)


@dataclass(frozen=True)
class MuInvariants:
    mu0: float
    mu1: float


def check_admissible(nu: float, bc: BoundaryPair, *, determinant: bool = True) -> None:
    """Raise :class:`AdmissibilityError` naming the violated rule."""
    if bc.theta0 != 0.0:
        if nu >= 1.0:
            raise AdmissibilityError(
                f"theta0 must be 0 for nu = {nu} >= 1 (limit point case at x = 0)")
        if nu == 0.0 and determinant:
            raise AdmissibilityError("nu = 0 with theta0 > 0 is not supported")


def mu0(theta0: float, nu: float) -> float:
    """``nu`` for ``theta0 = 0``, ``-nu`` otherwise."""
    bc = BoundaryPair(theta0, 0.0)
    check_admissible(float(nu), bc, determinant=False)
    return float(nu) if bc.theta0 == 0.0 else -float(nu)


def mu1(theta1: float) -> float:
    """``1/2`` for Dirichlet at ``x = 1``, ``-1/2`` otherwise."""
    return 0.5 if BoundaryPair(0.0, theta1).theta1 == 0.0 else -0.5


def mu_invariants(nu: float, bc: BoundaryPair) -> MuInvariants:
    return MuInvariants(mu0(bc.theta0, nu), mu1(bc.theta1))


# ---------------------------------------------------------------- class check

def diagnostic_grid() -> np.ndarray:
    return np.concatenate([2.0 ** -np.arange(1, 41), np.linspace(0.05, 1.0, 20)])


@dataclass(frozen=True)
class ClassReport:
    """Outcome of the numerical class check (advisory).

    Attributes
    ----------
    passed
        False when the dyadic partial integrals stop decaying or the
        potential fails to evaluate.
    integral
        Estimate of ``int_0^1 |V log x|`` (``|V| log^2 x`` when ``nu = 0``).
    partials
        Contributions of ``[2^-k-1, 2^-k]`` for ``k = 0..K``.
    failures
        Grid points where ``V`` was not finite.
    """

    passed: bool
    integral: float
    partials: tuple[float, ...]
    failures: tuple[float, ...]
    message: str


def check_class(p: SingularProblem, levels: int = 60) -> ClassReport:
    """Estimate the integrability condition of ``V`` near 0."""
    grid = diagnostic_grid()
    vals = np.asarray(p.effective(grid), dtype=float) * np.ones_like(grid)
    bad = tuple(float(x) for x, v in zip(grid, vals) if not np.isfinite(v))
    g, w = np.polynomial.legendre.leggauss(12)
    partials = []
    power = 2 if p.nu == 0.0 else 1
    for k in range(levels):
        a, b = 2.0 ** (-k - 1), 2.0 ** (-k)
        y = 0.5 * (b - a) * g + 0.5 * (a + b)
        v = np.asarray(p.effective(y), dtype=float) * np.ones_like(y)
        if not np.all(np.isfinite(v)):
            bad += tuple(float(t) for t, vv in zip(y, v) if not np.isfinite(vv))
            partials.append(math.inf)
            continue
        partials.append(float(0.5 * (b - a) * np.sum(w * np.abs(v) * np.abs(np.log(y)) ** power)))
    part = np.array(partials)
    total = float(np.sum(part))
    if bad:
        return ClassReport(False, total, tuple(partials), bad,
                           f"potential not finite at {len(bad)} point(s), first x = {bad[0]:.3g}")
    tail = part[-10:]
    head = max(total, 1e-300)
    ratios = tail[1:] / np.maximum(tail[:-1], 1e-300)
    decaying = tail[-1] <= 1e-12 * max(head, 1.0) or float(np.median(ratios)) < 0.9
    msg = "integrability condition satisfied numerically" if decaying else \
        "dyadic partial integrals do not decay; V log x is likely not integrable at 0"
    return ClassReport(bool(decaying), total, tuple(partials), (), msg)


# ---------------------------------------------------------------- files

def load_problem(path: str | Path) -> tuple[SingularProblem, BoundaryPair, dict]:
    """Read ``{"nu", "potential", "theta0", "theta1"}`` plus optional settings."""
    data = json.loads(Path(path).read_text())
    if not isinstance(data, dict):
        raise ValueError("problem file must contain a JSON object")
    missing = [k for k in ("nu", "potential") if k not in data]
    if missing:
        raise ValueError(f"problem file lacks field(s): {', '.join(missing)}")
    p = SingularProblem(float(data["nu"]), parse_potential(str(data["potential"])))
    bc = BoundaryPair(float(data.get("theta0", 0.0)), float(data.get("theta1", 0.0)))
    extra = {k: v for k, v in data.items() if k not in ("nu", "potential", "theta0", "theta1")}
    return p, bc, extra

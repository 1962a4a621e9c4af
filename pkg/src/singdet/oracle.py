"""Finite-difference eigenvalue oracle on the truncated interval ``[eps, 1]``.

Second-order central differences on a uniform grid.  The row at the first
interior node eliminates ``f(eps)`` through the leading Frobenius power,
``f(eps) = (eps/eps')^{mu0 + 1/2} f(eps')``; the row at ``x = 1`` is either
Dirichlet or the Robin condition with a ghost node, symmetrised by a
diagonal similarity.  Eigenvalues come from Sturm-sequence bisection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .config import DEFAULT
from .expr import compile_program
from .problem import BoundaryPair, SingularProblem, check_admissible, mu0

MAX_COUNT = 10


@dataclass(frozen=True)
class DiscretizedOperator:
    """Symmetric tridiagonal matrix ``(diag, off)`` of the truncated operator.

    ``exponent`` is ``mu0 + 1/2``, the power used in the row at ``eps``.
    """

    epsilon: float
    n: int
    diag: np.ndarray
    off: np.ndarray
    exponent: float
    nodes: np.ndarray

    @property
    def size(self) -> int:
        return self.diag.shape[0]

    def dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.off, 1) + np.diag(self.off, -1)


def discretize(p: SingularProblem, bc: BoundaryPair, eps: float | None = None,
               n: int | None = None) -> DiscretizedOperator:
    """Tridiagonal finite-difference matrix of ``H(theta0, theta1)`` on ``[eps, 1]``.

    Parameters
    ----------
    eps
        Left truncation point in ``(0, 0.01]``; default ``1e-4``.
    n
        Number of grid intervals, at least 100; default 4000.
    """
    eps = DEFAULT.eps if eps is None else float(eps)
    n = DEFAULT.n if n is None else int(n)
    if not 0.0 < eps <= 0.01:
        raise ValueError("eps must lie in (0, 0.01]")
    if n < 100:
        raise ValueError("n must be >= 100")
    check_admissible(p.nu, bc, determinant=False)
    h = (1.0 - eps) / n
    x = eps + h * np.arange(n + 1)
    x[-1] = 1.0
    code, arg = compile_program(p.q_ast())
    robin = bc.theta1 != 0.0
    idx = np.arange(1, n + 1) if robin else np.arange(1, n)
    xi = x[idx]
    q = K.eval_program_array(code, arg, xi)
    if not np.all(np.isfinite(q)):
        raise ValueError("potential is not finite on the grid")
    inv_h2 = 1.0 / (h * h)
    diag = 2.0 * inv_h2 + q
    off = np.full(idx.size - 1, -inv_h2)
    expo = mu0(bc.theta0, p.nu) + 0.5
    rho = (eps / x[1]) ** expo
    diag[0] -= rho * inv_h2
    if robin:
        cot = math.cos(bc.theta1) / math.sin(bc.theta1)
        diag[-1] = (2.0 + 2.0 * h * cot) * inv_h2 + q[-1]
        off[-1] = -math.sqrt(2.0) * inv_h2
    return DiscretizedOperator(eps, n, diag, off, expo, xi)


def lowest_eigs(d: DiscretizedOperator, count: int) -> np.ndarray:
    """Smallest ``count`` eigenvalues by Sturm-sequence bisection.

    Examples
    --------
    >>> ev = lowest_eigs(discretize(SingularProblem(0.5), BoundaryPair(), n=2000), 1)
    >>> bool(abs(ev[0] / math.pi ** 2 - 1) < 1e-3)
    True
    """
    if not 1 <= count <= MAX_COUNT:
        raise ValueError(f"count must be between 1 and {MAX_COUNT}")
    if count > d.size:
        raise ValueError("count exceeds the matrix size")
    a = np.abs(d.off)
    rad = np.zeros_like(d.diag)
    rad[:-1] += a
    rad[1:] += a
    lo = float(np.min(d.diag - rad))
    hi = float(np.max(d.diag + rad))
    return K.bisect_lowest(d.diag, d.off, int(count), lo, hi, 1e-14)


def count_below(d: DiscretizedOperator, sigma: float) -> int:
    """Number of discrete eigenvalues below ``sigma``."""
    return int(K.sturm_count(d.diag, d.off, float(sigma)))

"""Zeta-regularised determinants of regular singular Sturm-Liouville operators.

The operator ``H = -d^2/dx^2 + (nu^2 - 1/4)/x^2 + V(x)/x`` on ``[0, 1]`` with
separated boundary conditions has

    det H(theta0, theta1) = pi / (2^{mu0+mu1} Gamma(mu0+1) Gamma(mu1+1)) * W(psi, phi)

where ``phi`` and ``psi`` are the solutions normalised at the two ends.

Examples
--------
>>> from singdet import SingularProblem, BoundaryPair, zeta_det
>>> round(zeta_det(SingularProblem(0.5, "0"), BoundaryPair(0.0, 0.0)).value, 9)
2.0
"""

from ._accel import USE_NUMBA
from .config import DEFAULT, Settings
from .determinant import (DetResult, EigenList, FactorReport, VariationReport, char_function,
                          eigenvalues, factor_check, factor_potentials, log_derivative,
                          prefactor, variation_check, zeta_det)
from .errors import (AdmissibilityError, BesselOverflowError, EvaluationError, FitError,
                     FrobeniusError, IntegrationError, NumericalError, ParseError, PoleError,
                     RegIntError, SingdetError, WronskianError)
from .frobenius import SingularHead, build_g1, build_g2
from .oracle import DiscretizedOperator, discretize, lowest_eigs
from .problem import (BoundaryPair, MuInvariants, PotentialExpr, SingularProblem,
                      check_admissible, check_class, load_problem, mu0, mu1, mu_invariants,
                      parse_potential)
from .regint import (AsymptoticSpec, ContourResult, TraceFit, beta_coefficient,
                     contour_log_det, fit_trace_asymptotics, model_trace_oracle, reg_integral,
                     resolvent_trace, weighted_green_trace, zeta_det_contour)
from .shooting import (NormalizedSolution, WronskianValue, normalized_phi, normalized_psi,
                       solve_pair, wronskian)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]

"""The interpreted kernels give the same numbers as the compiled ones."""

import json
import os
import subprocess
import sys

import numpy as np

from singdet import BoundaryPair, SingularProblem, discretize, lowest_eigs, zeta_det
from singdet._accel import USE_NUMBA

SCRIPT = r"""
import json
from singdet import BoundaryPair, SingularProblem, discretize, lowest_eigs, zeta_det
from singdet._accel import USE_NUMBA
r = zeta_det(SingularProblem(0.3, "sin(x)"), BoundaryPair(0.4, 1.0))
ev = lowest_eigs(discretize(SingularProblem(0.3, "x"), BoundaryPair(), n=300), 3)
print(json.dumps({"numba": USE_NUMBA, "det": r.value, "eigs": list(ev)}))
"""


def run_without_numba():
    env = dict(os.environ, SINGDET_DISABLE_NUMBA="1")
    res = subprocess.run([sys.executable, "-c", SCRIPT], env=env, capture_output=True,
                         text=True, timeout=600)
    assert res.returncode == 0, res.stderr
    return json.loads(res.stdout.strip().splitlines()[-1])


def test_fallback_matches_compiled():
    out = run_without_numba()
    assert out["numba"] is False
    r = zeta_det(SingularProblem(0.3, "sin(x)"), BoundaryPair(0.4, 1.0))
    ev = lowest_eigs(discretize(SingularProblem(0.3, "x"), BoundaryPair(), n=300), 3)
    assert abs(out["det"] - r.value) <= 1e-12 * abs(r.value)
    np.testing.assert_allclose(out["eigs"], ev, rtol=1e-13)


def test_default_uses_numba():
    assert USE_NUMBA

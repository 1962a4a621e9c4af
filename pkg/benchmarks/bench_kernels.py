"""Compare the numba kernels with the interpreted fallback.

Run ``python3 benchmarks/bench_kernels.py``.  Each case is timed in a fresh
interpreter, once with the JIT enabled (after a warm-up call) and once with
``SINGDET_DISABLE_NUMBA=1``.
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys

CASES = {
    "propagate": """
from singdet import _kernels as K
from singdet.expr import compile_program
from singdet import SingularProblem
code, arg = compile_program(SingularProblem(0.3, "sin(x)").shifted(400.0).q_ast())
def work():
    K.propagate(code, arg, 0.01, 1.0, 1.0, 0.0, 1e-10, 1e-14, 1e-4, 200000)
""",
    "sturm_bisection": """
from singdet import BoundaryPair, SingularProblem, discretize, lowest_eigs
d = discretize(SingularProblem(0.3, "x"), BoundaryPair(), n=4000)
def work():
    lowest_eigs(d, 5)
""",
    "zeta_det": """
from singdet import BoundaryPair, SingularProblem, zeta_det
p, bc = SingularProblem(0.3, "exp(x)"), BoundaryPair(0.7, 1.0)
def work():
    zeta_det(p, bc)
""",
}

TIMER = """
import json, timeit
from singdet._accel import USE_NUMBA
{setup}
work()
n, total = timeit.Timer(work).autorange()
best = min(timeit.repeat(work, number=n, repeat={repeat})) / n
print(json.dumps({{"numba": USE_NUMBA, "seconds": best}}))
"""


def time_case(setup: str, disable: bool, repeat: int) -> dict:
    env = dict(os.environ)
    if disable:
        env["SINGDET_DISABLE_NUMBA"] = "1"
    else:
        env.pop("SINGDET_DISABLE_NUMBA", None)
    res = subprocess.run([sys.executable, "-c", TIMER.format(setup=setup, repeat=repeat)],
                         env=env, capture_output=True, text=True, check=True)
    return json.loads(res.stdout.strip().splitlines()[-1])


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("cases", nargs="*", default=list(CASES))
    args = ap.parse_args(argv)
    print(f"{'case':18s} {'numba [s]':>12s} {'python [s]':>12s} {'speed-up':>9s}")
    for name in args.cases:
        fast = time_case(CASES[name], False, args.repeat)
        slow = time_case(CASES[name], True, args.repeat)
        assert fast["numba"] and not slow["numba"]
        ratio = slow["seconds"] / fast["seconds"]
        print(f"{name:18s} {fast['seconds']:12.3e} {slow['seconds']:12.3e} {ratio:9.1f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

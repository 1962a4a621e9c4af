"""Command-line interface: ``singdet det | eig | trace | contour | scan | check``.

Exit codes: 0 success, 1 usage or input error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass
from typing import Sequence

from .config import DEFAULT, Settings
from .errors import NumericalError, SingdetError
from .problem import BoundaryPair, SingularProblem, check_admissible, check_class, load_problem, \
    mu_invariants, parse_potential

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2

COMMANDS = ("det", "eig", "trace", "contour", "scan", "check")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse exits with 2 by default
        raise UsageError(message)


@dataclass(frozen=True)
class RunConfig:
    command: str
    problem: SingularProblem
    bc: BoundaryPair
    settings: Settings
    args: argparse.Namespace
    out: str | None


def _number(text: str) -> float:
    """Float or constant expression such as ``3*pi/4``."""
    from . import expr as ex
    try:
        return float(text)
    except ValueError:
        pass
    try:
        node = ex.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    if not ex.is_const(node):
        raise argparse.ArgumentTypeError(f"not a constant: {text!r}")
    return float(ex.evaluate(node, 0.0))


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="singdet", description="Zeta-regularised determinants of "
                 "-d^2/dx^2 + (nu^2 - 1/4)/x^2 + V(x)/x on [0, 1].")
    ap.add_argument("command", nargs="?", choices=COMMANDS)
    ap.add_argument("--nu", type=float)
    ap.add_argument("--potential", type=str)
    ap.add_argument("--theta0", type=_number)
    ap.add_argument("--theta1", type=_number)
    ap.add_argument("--z", type=_number)
    ap.add_argument("--count", type=int, default=5)
    ap.add_argument("--lam-max", type=float, dest="lam_max")
    ap.add_argument("--file", type=str)
    ap.add_argument("--out", type=str)
    ap.add_argument("--tol", type=float, help="relative tolerance of the integrator")
    ap.add_argument("--param", choices=("theta1", "z"), default="theta1",
                    help="scan variable")
    ap.add_argument("--values", type=str,
                    help="scan grid: comma list or start:stop:num")
    ap.add_argument("--show-config", action="store_true", dest="show_config")
    return ap


def _grid(spec: str) -> list[float]:
    spec = spec.strip()
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise UsageError("range grid must be start:stop:num")
        try:
            a, b, n = _number(parts[0]), _number(parts[1]), int(parts[2])
        except (argparse.ArgumentTypeError, ValueError) as exc:
            raise UsageError(str(exc)) from None
        if n < 1:
            raise UsageError("range grid needs num >= 1")
        return [a + (b - a) * k / (n - 1) for k in range(n)] if n > 1 else [a]
    try:
        vals = [_number(v) for v in spec.split(",") if v.strip()]
    except argparse.ArgumentTypeError as exc:
        raise UsageError(str(exc)) from None
    if not vals:
        raise UsageError("empty scan grid")
    return vals


def make_config(args: argparse.Namespace) -> RunConfig:
    nu, pot, th0, th1 = None, "0", 0.0, 0.0
    overrides: dict = {}
    if args.file:
        p, bc, extra = load_problem(args.file)
        nu, pot, th0, th1 = p.nu, p.potential.source, bc.theta0, bc.theta1
        overrides = dict(extra)
    if args.nu is not None:
        nu = args.nu
    if args.potential is not None:
        pot = args.potential
    if args.theta0 is not None:
        th0 = args.theta0
    if args.theta1 is not None:
        th1 = args.theta1
    if args.tol is not None:
        overrides["rtol"] = args.tol
    if nu is None:
        raise UsageError("--nu (or --file) is required")
    settings = DEFAULT.with_overrides(**overrides)
    problem = SingularProblem(float(nu), parse_potential(pot))
    bc = BoundaryPair(float(th0), float(th1))
    return RunConfig(args.command, problem, bc, settings, args, args.out)


def fmt(v: float | None) -> str:
    if v is None:
        return "overflow"
    if v == 0.0 or 1e-3 <= abs(v) < 1e6:
        return f"{v:.9f}"
    return f"{v:.9e}"


def write_csv(path: str, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    """CSV with ``repr`` floats, which re-parse to the identical double."""
    def cell(v):
        return repr(float(v)) if isinstance(v, float) else ("" if v is None else str(v))
    with open(path, "w", newline="", encoding="ascii") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([cell(v) for v in r])


# ---------------------------------------------------------------- commands

def _cmd_det(cfg: RunConfig) -> tuple[list[str], list[list]]:
    from .determinant import char_function

    z = cfg.args.z or 0.0
    d = char_function(cfg.problem, cfg.bc, z, cfg.settings)
    label = "det" if z == 0.0 else f"det(H + {z:g})"
    print(f"{label} = {fmt(d.value)}")
    print(f"log|det| = {d.log_value:.12g}  sign = {d.sign:+g}")
    print(f"W(psi, phi) = {fmt(d.wronskian.full)}  constancy = {d.wronskian.constancy_dev:.2e}")
    print(f"mu0 = {d.mu0:g}  mu1 = {d.mu1:g}  prefactor = {d.prefactor:.12g}")
    return (["z", "det", "log_abs_det", "sign", "wronskian", "mu0", "mu1", "prefactor"],
            [[float(z), d.value, d.log_value, d.sign, d.wronskian.full, d.mu0, d.mu1,
              d.prefactor]])


def _cmd_eig(cfg: RunConfig):
    from .determinant import eigenvalues

    ev = eigenvalues(cfg.problem, cfg.bc, cfg.args.count, cfg.args.lam_max, cfg.settings)
    for k, (lam, r) in enumerate(zip(ev.values, ev.residuals), 1):
        print(f"lambda_{k} = {lam:.12g}   |W| = {r:.2e}")
    if not ev.complete:
        print(f"warning: found {len(ev.values)} of {cfg.args.count} eigenvalues below lam_max",
              file=sys.stderr)
    rows = [[k, lam, a, b, r] for k, (lam, (a, b), r)
            in enumerate(zip(ev.values, ev.brackets, ev.residuals), 1)]
    return ["k", "lambda", "bracket_lo", "bracket_hi", "residual"], rows


def _cmd_trace(cfg: RunConfig):
    from .regint import resolvent_trace

    z = 1.0 if cfg.args.z is None else cfg.args.z
    t = resolvent_trace(cfg.problem, cfg.bc, z, cfg.settings)
    print(f"Tr (H + {z:g})^-1 = {t:.12g}")
    return ["z", "trace"], [[float(z), t]]


def _cmd_contour(cfg: RunConfig):
    from .determinant import zeta_det
    from .regint import contour_log_det

    r = contour_log_det(cfg.problem, cfg.bc, cfg.settings)
    d = zeta_det(cfg.problem, cfg.bc, cfg.settings)
    gap = abs(r.value / d.value - 1.0) if d.value else math.inf
    print(f"contour det = {fmt(r.value)}")
    print(f"wronskian det = {fmt(d.value)}")
    print(f"relative gap = {gap:.3e}")
    print(f"fit a = {r.fit.a:.9f}  b = {r.fit.b:.9f}  residual = {r.fit.residual:.2e}")
    print(f"lambda_1 = {r.lambda1:.9g}  tail beyond Z={r.Z:g}: {r.tail:.3e}")
    return (["contour_det", "wronskian_det", "rel_gap", "a", "b", "fit_residual", "lambda1"],
            [[r.value, d.value, gap, r.fit.a, r.fit.b, r.fit.residual, r.lambda1]])


def _cmd_scan(cfg: RunConfig):
    from .determinant import char_function

    if not cfg.args.values:
        raise UsageError("scan needs --values")
    grid = _grid(cfg.args.values)
    header = [cfg.args.param, "det", "log_abs_det", "sign", "wronskian", "mu0", "mu1", "status"]
    rows = []
    print("  ".join(f"{h:>16}" for h in header))
    for v in grid:
        if cfg.args.param == "theta1":
            bc, z = BoundaryPair(cfg.bc.theta0, v), (cfg.args.z or 0.0)
        else:
            bc, z = cfg.bc, v
        try:
            d = char_function(cfg.problem, bc, z, cfg.settings)
            row = [float(v), d.value, d.log_value, d.sign, d.wronskian.full, d.mu0, d.mu1, "ok"]
        except (SingdetError, ValueError) as exc:
            row = [float(v), None, None, None, None, None, None,
                   f"error: {type(exc).__name__}: {exc}".replace(",", ";")]
        rows.append(row)
        print("  ".join(f"{fmt(c) if isinstance(c, float) else str(c):>16}" for c in row))
    return header, rows


def _cmd_check(cfg: RunConfig):
    rep = check_class(cfg.problem)
    try:
        check_admissible(cfg.problem.nu, cfg.bc, determinant=True)
        verdict, reason = "admissible", ""
    except ValueError as exc:
        verdict, reason = "rejected", str(exc)
    mu = None
    if verdict == "admissible":
        mu = mu_invariants(cfg.problem.nu, cfg.bc)
    print(f"nu = {cfg.problem.nu:g}  V = {cfg.problem.potential.source}")
    print(f"class check: {'PASS' if rep.passed else 'FAIL'}  int |V log x| ~ {rep.integral:.6g}")
    if rep.message:
        print(f"  {rep.message}")
    for xf in rep.failures[:5]:
        print(f"  evaluation failure at x = {xf:g}")
    print(f"boundary pair (theta0={cfg.bc.theta0:g}, theta1={cfg.bc.theta1:g}): {verdict}"
          + (f" ({reason})" if reason else ""))
    if mu is not None:
        print(f"mu0 = {mu.mu0:g}  mu1 = {mu.mu1:g}")
    return (["class_pass", "integral", "admissible", "mu0", "mu1"],
            [[str(rep.passed), rep.integral, verdict, mu.mu0 if mu else None,
              mu.mu1 if mu else None]])


HANDLERS = {"det": _cmd_det, "eig": _cmd_eig, "trace": _cmd_trace,
            "contour": _cmd_contour, "scan": _cmd_scan, "check": _cmd_check}


def run(argv: Sequence[str] | None = None) -> int:
    """Parse ``argv``, dispatch and map failures to exit codes."""
    try:
        args = build_parser().parse_args(argv)
        if args.show_config:
            base = DEFAULT
            if args.file or args.tol is not None:
                try:
                    base = make_config(args).settings
                except UsageError:
                    pass
            print(json.dumps(base.as_dict(), indent=2, sort_keys=True))
            if args.command is None:
                return EXIT_OK
        if args.command is None:
            raise UsageError("a command is required: " + " | ".join(COMMANDS))
        cfg = make_config(args)
        header, rows = HANDLERS[cfg.command](cfg)
        if cfg.out:
            write_csv(cfg.out, header, rows)
        return EXIT_OK
    except UsageError as exc:
        print(f"singdet: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"singdet: numerical failure [{type(exc).__name__}]: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, OSError) as exc:
        # parse errors, inadmissible pairs, unreadable files
        print(f"singdet: input error [{type(exc).__name__}]: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":  # pragma: no cover
    main()

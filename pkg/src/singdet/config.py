"""Numerical defaults shared by all modules."""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields, replace


@dataclass(frozen=True)
class Settings:
    """Tolerances and discretisation parameters.

    Attributes
    ----------
    x_match
        Initial hand-off point between the singular head and the integrator;
        halved automatically when the Volterra tail bound demands it.
    rtol, atol
        Runge-Kutta error control.
    h0
        Initial step of the integrator (None picks one from the interval).
    head_tol
        Certified sup-norm bound on the discarded Volterra tail.
    Z
        Upper cutoff of the numerical part of the contour integral.
    eps, n
        Truncation point and grid size of the finite-difference oracle.
    """

    x_match: float = 0.1
    rtol: float = 1e-10
    atol: float = 1e-14
    h0: float | None = None
    head_tol: float = 1e-13
    wronskian_points: int = 9
    Z: float = 1e4
    eps: float = 1e-4
    n: int = 4000

    def with_overrides(self, **kw) -> "Settings":
        known = {f.name for f in fields(self)}
        bad = set(kw) - known
        if bad:
            raise ValueError(f"unknown setting(s): {', '.join(sorted(bad))}")
        return replace(self, **{k: v for k, v in kw.items() if v is not None})

    def as_dict(self) -> dict:
        return asdict(self)


DEFAULT = Settings()

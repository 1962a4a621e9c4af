"""Gamma, modified Bessel I/K, Bessel J and its positive zeros.

Real orders ``0 <= nu <= 10`` and real arguments only.  The algorithms:

* ``gamma``: Lanczos approximation (g = 7, 9 terms), reflection below 1/2.
* ``bessel_i``: ascending power series for ``z < 15``; above that the
  Hankel-type expansion ``e^z / sqrt(2 pi z) * sum (-1)^k a_k(nu) / z^k``
  whenever its smallest term is below ``1e-16``, the series otherwise.
* ``bessel_k``: Temme's series for ``z <= 2`` and Steed's continued fraction
  above, on the reduced order ``|mu| <= 1/2``, followed by forward recurrence.
  Integer orders need no special treatment.
* ``bessel_j``: power series for ``x <= 12``, Miller backward recurrence
  normalised by ``(x/2)^nu = sum (nu+2k) Gamma(nu+k)/k! J_{nu+2k}(x)`` above.
"""

from __future__ import annotations

import math
from functools import lru_cache

from scipy.optimize import brentq

from .errors import BesselOverflowError

EULER_GAMMA = 0.5772156649015329

_LANCZOS_G = 7.0
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)

I_SWITCH = 15.0
I_MAX_ARG = 700.0


def _check_real(x: float, name: str) -> float:
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"{name} must be finite, got {x}")
    return x


def gamma(x: float) -> float:
    """Gamma function for ``x > 0``.

    Raises
    ------
    ValueError
        For non-positive or non-finite ``x``.
    """
    x = _check_real(x, "x")
    if x <= 0.0:
        raise ValueError(f"gamma is only implemented for x > 0, got {x}")
    if x > 171.6:
        raise OverflowError("gamma overflows for x > 171.6")
    if x == math.floor(x) and x <= 30:
        return float(math.factorial(int(x) - 1))
    if x < 0.5:
        return math.pi / (math.sin(math.pi * x) * _lanczos(1.0 - x))
    return _lanczos(x)


def _lanczos(x: float) -> float:
    x -= 1.0
    acc = _LANCZOS[0]
    for i in range(1, 9):
        acc += _LANCZOS[i] / (x + i)
    t = x + _LANCZOS_G + 0.5
    # split the power to stay finite up to x ~ 171
    half = t ** ((x + 0.5) / 2.0)
    return math.sqrt(2.0 * math.pi) * half * (half * math.exp(-t)) * acc


def log_gamma(x: float) -> float:
    """``log Gamma(x)`` for ``x > 0``."""
    x = _check_real(x, "x")
    if x <= 0.0:
        raise ValueError(f"log_gamma is only implemented for x > 0, got {x}")
    if x < 100.0:
        return math.log(gamma(x))
    x -= 1.0
    acc = _LANCZOS[0]
    for i in range(1, 9):
        acc += _LANCZOS[i] / (x + i)
    t = x + _LANCZOS_G + 0.5
    return 0.5 * math.log(2.0 * math.pi) + (x + 0.5) * math.log(t) - t + math.log(acc)


# ---------------------------------------------------------------- I_nu

def _check_order(nu: float) -> float:
    nu = _check_real(nu, "order")
    if nu < 0.0 or nu > 10.0:
        raise ValueError(f"order must lie in [0, 10], got {nu}")
    return nu


def _i_series(nu: float, z: float) -> float:
    """Ascending series; all terms positive so no cancellation."""
    h = 0.5 * z
    q = h * h
    if nu == 0.0:
        term = 1.0
    else:
        term = math.exp(nu * math.log(h) - log_gamma(nu + 1.0))
    total = term
    k = 0
    while True:
        k += 1
        term *= q / (k * (k + nu))
        total += term
        if term < 1e-17 * total:
            return total
        if k > 2000:  # pragma: no cover
            return total


def _i_asymptotic_scaled(nu: float, z: float) -> float | None:
    """``e^{-z} I_nu(z)`` from the large-argument expansion, or None."""
    mu = 4.0 * nu * nu
    term = 1.0
    total = 1.0
    prev = math.inf
    for k in range(1, 60):
        term *= -(mu - (2 * k - 1) ** 2) / (k * 8.0 * z)
        a = abs(term)
        if a > prev:
            return None  # diverging before reaching the target accuracy
        total += term
        if a < 1e-16 * abs(total):
            return total / math.sqrt(2.0 * math.pi * z)
        prev = a
    return None


def bessel_i_scaled(nu: float, z: float) -> float:
    """``exp(-z) I_nu(z)``; no upper limit on ``z``."""
    nu = _check_order(nu)
    z = _check_real(z, "z")
    if z < 0.0:
        raise ValueError(f"bessel_i requires z >= 0, got {z}")
    if z == 0.0:
        return 1.0 if nu == 0.0 else 0.0
    if z >= I_SWITCH:
        val = _i_asymptotic_scaled(nu, z)
        if val is not None:
            return val
    if z > I_MAX_ARG:
        raise ValueError("series path unavailable beyond the overflow guard")
    return _i_series(nu, z) * math.exp(-z)


def bessel_i(nu: float, z: float) -> float:
    """Modified Bessel function of the first kind.

    Raises
    ------
    BesselOverflowError
        For ``z > 700``; ``log_value`` holds ``log I_nu(z)``.
    """
    nu = _check_order(nu)
    z = _check_real(z, "z")
    if z < 0.0:
        raise ValueError(f"bessel_i requires z >= 0, got {z}")
    if z == 0.0:
        return 1.0 if nu == 0.0 else 0.0
    if z > I_MAX_ARG:
        s = bessel_i_scaled(nu, z)
        raise BesselOverflowError(f"I_{nu}({z}) overflows", z + math.log(s))
    if z >= I_SWITCH:
        val = _i_asymptotic_scaled(nu, z)
        if val is not None:
            return val * math.exp(z)
    return _i_series(nu, z)


def bessel_i_deriv(nu: float, z: float) -> float:
    """``I_nu'(z) = I_{nu+1}(z) + (nu/z) I_nu(z)``."""
    return _i_next(nu, z) + nu / z * bessel_i(nu, z)


def _i_next(nu: float, z: float) -> float:
    # orders up to 11 are fine internally
    if z >= I_SWITCH:
        val = _i_asymptotic_scaled(nu + 1.0, z)
        if val is not None:
            return val * math.exp(z)
    return _i_series(nu + 1.0, z)


# ---------------------------------------------------------------- K_nu

@lru_cache(maxsize=None)
def _zeta_int(k: int) -> float:
    """Riemann zeta at integer ``k >= 2`` by Euler-Maclaurin."""
    n = 10
    s = math.fsum(j ** -float(k) for j in range(1, n))
    s += n ** (1.0 - k) / (k - 1) + 0.5 * n ** -float(k)
    # Bernoulli corrections B2, B4, B6, B8
    b = (1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0)
    rising = float(k)
    pw = n ** (-k - 1.0)
    fact = 2.0
    for i, b2j in enumerate(b):
        s += b2j / fact * rising * pw
        # advance to next even order
        rising *= (k + 2 * i + 1) * (k + 2 * i + 2)
        pw /= n * n
        fact *= (2 * i + 3) * (2 * i + 4)
    return s


def _temme_gammas(mu: float) -> tuple[float, float, float, float]:
    """gam1, gam2, 1/Gamma(1+mu), 1/Gamma(1-mu) for ``|mu| <= 1/2``.

    Uses ``log Gamma(1+mu) = E(mu) - O(mu)`` with even part
    ``E = sum_{k even} zeta(k) mu^k / k`` and odd part
    ``O = gamma mu + sum_{k odd >= 3} zeta(k) mu^k / k`` so that
    gam1 = -e^{-E} sinh(O)/mu is free of cancellation.
    """
    e_part = 0.0
    o_over_mu = EULER_GAMMA
    m2 = mu * mu
    pw = m2
    for k in range(2, 80, 2):
        e_part += _zeta_int(k) * pw / k
        o_over_mu += _zeta_int(k + 1) * pw / (k + 1)
        pw *= m2
        if pw < 1e-18:
            break
    o = o_over_mu * mu
    if abs(o) < 1e-4:
        sinhc = 1.0 + o * o / 6.0 * (1.0 + o * o / 20.0)
    else:
        sinhc = math.sinh(o) / o
    ee = math.exp(-e_part)
    gam1 = -ee * sinhc * o_over_mu
    gam2 = ee * math.cosh(o)
    gampl = ee * math.exp(o)
    gammi = ee * math.exp(-o)
    return gam1, gam2, gampl, gammi


def _k_pair_scaled(mu: float, x: float) -> tuple[float, float]:
    """``e^x K_mu(x)`` and ``e^x K_{mu+1}(x)`` for ``|mu| <= 1/2``."""
    eps = 1e-17
    if x <= 2.0:
        x2 = 0.5 * x
        pimu = math.pi * mu
        fact = 1.0 if abs(pimu) < 1e-15 else pimu / math.sin(pimu)
        d = -math.log(x2)
        e = mu * d
        fact2 = 1.0 if abs(e) < 1e-15 else math.sinh(e) / e
        gam1, gam2, gampl, gammi = _temme_gammas(mu)
        ff = fact * (gam1 * math.cosh(e) + gam2 * fact2 * d)
        total = ff
        e = math.exp(e)
        p = 0.5 * e / gampl
        q = 0.5 / (e * gammi)
        c = 1.0
        d = x2 * x2
        total1 = p
        mu2 = mu * mu
        for i in range(1, 500):
            ff = (i * ff + p + q) / (i * i - mu2)
            c *= d / i
            p /= i - mu
            q /= i + mu
            dl = c * ff
            total += dl
            total1 += c * (p - i * ff)
            if abs(dl) < abs(total) * eps:
                break
        ex = math.exp(x)
        return total * ex, total1 * (2.0 / x) * ex
    # Steed's algorithm for the continued fraction CF2
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = delh = d
    q1, q2 = 0.0, 1.0
    a1 = 0.25 - mu * mu
    q = c = a1
    a = -a1
    s = 1.0 + q * delh
    for i in range(2, 20000):
        a -= 2 * (i - 1)
        c = -a * c / i
        qnew = (q1 - b * q2) / a
        q1, q2 = q2, qnew
        q += c * qnew
        b += 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h += delh
        dels = q * delh
        s += dels
        if abs(dels / s) < eps:
            break
    h = a1 * h
    kmu = math.sqrt(math.pi / (2.0 * x)) / s
    k1 = kmu * (mu + x + 0.5 - h) / x
    return kmu, k1


def bessel_k_scaled(nu: float, z: float) -> float:
    """``exp(z) K_nu(z)``."""
    nu = _check_order(nu)
    z = _check_real(z, "z")
    if z <= 0.0:
        raise ValueError(f"bessel_k requires z > 0, got {z}")
    nl = int(nu + 0.5)
    mu = nu - nl
    kmu, k1 = _k_pair_scaled(mu, z)
    for i in range(1, nl + 1):
        kmu, k1 = k1, (mu + i) * (2.0 / z) * k1 + kmu
    return kmu


def bessel_k(nu: float, z: float) -> float:
    """Modified Bessel function of the second kind; underflows to 0 past z ~ 745."""
    s = bessel_k_scaled(nu, z)
    return s * math.exp(-z)


def bessel_k_deriv(nu: float, z: float) -> float:
    """``K_nu'(z) = -K_{nu+1}(z) + (nu/z) K_nu(z)``."""
    nu = _check_order(nu)
    nl = int(nu + 0.5)
    mu = nu - nl
    kmu, k1 = _k_pair_scaled(mu, z)
    for i in range(1, nl + 1):
        kmu, k1 = k1, (mu + i) * (2.0 / z) * k1 + kmu
    return (-k1 + nu / z * kmu) * math.exp(-z)


# ---------------------------------------------------------------- J_nu

J_SERIES_MAX = 12.0


def _j_series(nu: float, x: float) -> float:
    h = 0.5 * x
    q = h * h
    if nu == 0.0:
        term = 1.0
    else:
        term = math.exp(nu * math.log(h) - log_gamma(nu + 1.0))
    total = term
    biggest = abs(term)
    k = 0
    while True:
        k += 1
        term *= -q / (k * (k + nu))
        total += term
        biggest = max(biggest, abs(term))
        if abs(term) < 1e-17 * biggest and k > q:
            return total


def _j_miller(nu: float, x: float) -> float:
    n_top = int(x + 12.0 * x ** (1.0 / 3.0) + 40.0)
    if n_top % 2:
        n_top += 1
    # backward recurrence J_{v-1} = (2v/x) J_v - J_{v+1} on orders nu + n
    j_next = 0.0
    j_cur = 1e-300
    norm = 0.0
    # weights c_k = (nu + 2k) Gamma(nu + k) / k!, with c_0 = Gamma(nu + 1)
    ratio = [0.0] * (n_top // 2 + 1)  # Gamma(nu+k)/k! / Gamma(nu+1)
    ratio[0] = 1.0
    for k in range(1, n_top // 2 + 1):
        ratio[k] = ratio[k - 1] * (nu + k - 1) / k if k > 1 else 1.0
    coeff = [0.0] * (n_top // 2 + 1)
    coeff[0] = 1.0
    for k in range(1, n_top // 2 + 1):
        coeff[k] = (nu + 2 * k) * ratio[k]
    for n in range(n_top, 0, -1):
        if n % 2 == 0:
            norm += coeff[n // 2] * j_cur
        v = nu + n
        j_prev = (2.0 * v / x) * j_cur - j_next
        j_next, j_cur = j_cur, j_prev
        if abs(j_cur) > 1e250:
            j_cur *= 1e-250
            j_next *= 1e-250
            norm *= 1e-250
    norm += coeff[0] * j_cur
    # (x/2)^nu / Gamma(nu+1) = sum_k c_k/Gamma(nu+1) J_{nu+2k}
    target = math.exp(nu * math.log(0.5 * x) - log_gamma(nu + 1.0)) if nu > 0 else 1.0
    return j_cur * target / norm


def bessel_j(nu: float, x: float) -> float:
    """Bessel function of the first kind for ``x >= 0``."""
    nu = _check_order(nu)
    x = _check_real(x, "x")
    if x < 0.0:
        raise ValueError(f"bessel_j requires x >= 0, got {x}")
    if x == 0.0:
        return 1.0 if nu == 0.0 else 0.0
    if x <= J_SERIES_MAX:
        return _j_series(nu, x)
    return _j_miller(nu, x)


@lru_cache(maxsize=64)
def _zeros_upto(nu: float, k: int) -> tuple[float, ...]:
    zeros: list[float] = []
    step = 0.25
    a = max(nu, 0.5)
    fa = bessel_j(nu, a)
    while len(zeros) < k:
        b = a + step
        fb = bessel_j(nu, b)
        if fa == 0.0:
            zeros.append(a)
        elif fa * fb < 0.0:
            zeros.append(brentq(lambda t: bessel_j(nu, t), a, b, xtol=1e-14, rtol=1e-15, maxiter=200))
        a, fa = b, fb
    return tuple(zeros[:k])


def bessel_j_zero(nu: float, k: int) -> float:
    """k-th positive zero ``j_{nu,k}`` of ``J_nu``."""
    nu = _check_order(nu)
    if int(k) != k or k < 1:
        raise ValueError(f"k must be a positive integer, got {k}")
    return _zeros_upto(nu, int(k))[-1]

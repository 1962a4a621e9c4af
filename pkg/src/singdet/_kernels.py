"""Hot loops: expression interpreter, Dormand-Prince propagation, Sturm bisection.

Everything here is plain Python over numpy arrays so that the same source
runs compiled (numba) or interpreted (``SINGDET_DISABLE_NUMBA=1``).
"""

from __future__ import annotations

import math

import numpy as np

from ._accel import njit
from .expr import (OP_ADD, OP_CONST, OP_COS, OP_DIV, OP_EXP, OP_IPOW, OP_LOG, OP_MUL,
                   OP_NEG, OP_POW, OP_SIN, OP_SQRT, OP_SUB, OP_X)

STATUS_OK = 0
STATUS_MAX_STEPS = 1
STATUS_STEP_UNDERFLOW = 2
STATUS_NONFINITE = 3


@njit
def eval_program(code, arg, x, stack):
    """Run a postfix program at scalar ``x`` using the scratch ``stack``."""
    sp = 0
    for i in range(code.shape[0]):
        c = code[i]
        if c == OP_CONST:
            stack[sp] = arg[i]
            sp += 1
        elif c == OP_X:
            stack[sp] = x
            sp += 1
        elif c == OP_NEG:
            stack[sp - 1] = -stack[sp - 1]
        elif c == OP_SIN:
            stack[sp - 1] = math.sin(stack[sp - 1])
        elif c == OP_COS:
            stack[sp - 1] = math.cos(stack[sp - 1])
        elif c == OP_EXP:
            stack[sp - 1] = math.exp(stack[sp - 1])
        elif c == OP_LOG:
            v = stack[sp - 1]
            stack[sp - 1] = math.log(v) if v > 0.0 else math.nan
        elif c == OP_SQRT:
            v = stack[sp - 1]
            stack[sp - 1] = math.sqrt(v) if v >= 0.0 else math.nan
        elif c == OP_IPOW:
            b = stack[sp - 1]
            n = int(arg[i])
            neg = n < 0
            if neg:
                n = -n
            r = 1.0
            while n > 0:
                if n & 1:
                    r *= b
                b *= b
                n >>= 1
            stack[sp - 1] = 1.0 / r if neg else r
        else:
            b = stack[sp - 1]
            a = stack[sp - 2]
            sp -= 1
            if c == OP_ADD:
                stack[sp - 1] = a + b
            elif c == OP_SUB:
                stack[sp - 1] = a - b
            elif c == OP_MUL:
                stack[sp - 1] = a * b
            elif c == OP_DIV:
                stack[sp - 1] = a / b
            elif c == OP_POW:
                if a < 0.0 and b != math.floor(b):
                    stack[sp - 1] = math.nan
                elif a == 0.0 and b < 0.0:
                    stack[sp - 1] = math.inf
                else:
                    stack[sp - 1] = a ** b
    return stack[0]


@njit
def eval_program_array(code, arg, xs):
    stack = np.empty(code.shape[0] + 1)
    out = np.empty(xs.shape[0])
    for i in range(xs.shape[0]):
        out[i] = eval_program(code, arg, xs[i], stack)
    return out


# Dormand-Prince 5(4) tableau
_C2, _C3, _C4, _C5 = 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0
_A21 = 1.0 / 5.0
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_A51, _A52, _A53, _A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
_A61, _A62, _A63, _A64, _A65 = (9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0,
                                49.0 / 176.0, -5103.0 / 18656.0)
_B1, _B3, _B4, _B5, _B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
_E1, _E3, _E4, _E5, _E6, _E7 = (71.0 / 57600.0, -71.0 / 16695.0, 71.0 / 1920.0,
                                -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0)

RENORM_HIGH = 1e100
RENORM_LOW = 1e-3


@njit
def _grow(buf, n):
    out = np.empty(2 * buf.shape[0])
    out[:n] = buf[:n]
    return out


@njit
def propagate(code, arg, x0, x1, f0, g0, rtol, atol, h0, max_steps):
    """Integrate ``f'' = q(x) f`` from ``x0`` to ``x1`` (either direction).

    The state is kept as ``e^L (f, f')`` with ``L`` accumulated whenever
    ``|f| + |f'|`` leaves ``[1e-3, 1e100]``; initial data are normalised.

    Returns
    -------
    xs, fs, gs, qs, ls, n, status
        Accepted nodes (including both ends) of the mantissa, its
        derivative, ``q`` at each node and the cumulative log-scale.
    """
    stack = np.empty(code.shape[0] + 1)
    cap = 1024
    xs = np.empty(cap)
    fs = np.empty(cap)
    gs = np.empty(cap)
    qs = np.empty(cap)
    ls = np.empty(cap)

    span = x1 - x0
    direction = 1.0 if span > 0 else -1.0
    mag = abs(f0) + abs(g0)
    L = 0.0
    f = f0
    g = g0
    if mag > 0.0:
        f /= mag
        g /= mag
        L = math.log(mag)
    x = x0
    q = eval_program(code, arg, x, stack)
    xs[0] = x
    fs[0] = f
    gs[0] = g
    qs[0] = q
    ls[0] = L
    n = 1
    if not math.isfinite(q):
        return xs[:n], fs[:n], gs[:n], qs[:n], ls[:n], n, STATUS_NONFINITE

    h = abs(h0) if h0 > 0.0 else 1e-3 * abs(span)
    if h > abs(span):
        h = abs(span)
    h *= direction
    steps = 0
    k1f = g
    k1g = q * f
    status = STATUS_OK
    while True:
        remaining = x1 - x
        if remaining * direction <= 0.0:
            break
        if abs(h) >= abs(remaining):
            h = remaining
            last = True
        else:
            last = False
        # stages
        y2f = f + h * _A21 * k1f
        y2g = g + h * _A21 * k1g
        k2f = y2g
        k2g = eval_program(code, arg, x + _C2 * h, stack) * y2f
        y3f = f + h * (_A31 * k1f + _A32 * k2f)
        y3g = g + h * (_A31 * k1g + _A32 * k2g)
        k3f = y3g
        k3g = eval_program(code, arg, x + _C3 * h, stack) * y3f
        y4f = f + h * (_A41 * k1f + _A42 * k2f + _A43 * k3f)
        y4g = g + h * (_A41 * k1g + _A42 * k2g + _A43 * k3g)
        k4f = y4g
        k4g = eval_program(code, arg, x + _C4 * h, stack) * y4f
        y5f = f + h * (_A51 * k1f + _A52 * k2f + _A53 * k3f + _A54 * k4f)
        y5g = g + h * (_A51 * k1g + _A52 * k2g + _A53 * k3g + _A54 * k4g)
        k5f = y5g
        k5g = eval_program(code, arg, x + _C5 * h, stack) * y5f
        y6f = f + h * (_A61 * k1f + _A62 * k2f + _A63 * k3f + _A64 * k4f + _A65 * k5f)
        y6g = g + h * (_A61 * k1g + _A62 * k2g + _A63 * k3g + _A64 * k4g + _A65 * k5g)
        k6f = y6g
        xn = x + h
        if last:
            xn = x1
        k6g = eval_program(code, arg, x + h, stack) * y6f
        fn = f + h * (_B1 * k1f + _B3 * k3f + _B4 * k4f + _B5 * k5f + _B6 * k6f)
        gn = g + h * (_B1 * k1g + _B3 * k3g + _B4 * k4g + _B5 * k5g + _B6 * k6g)
        qn = eval_program(code, arg, xn, stack)
        k7f = gn
        k7g = qn * fn
        ef = h * (_E1 * k1f + _E3 * k3f + _E4 * k4f + _E5 * k5f + _E6 * k6f + _E7 * k7f)
        eg = h * (_E1 * k1g + _E3 * k3g + _E4 * k4g + _E5 * k5g + _E6 * k6g + _E7 * k7g)
        sf = atol + rtol * max(abs(f), abs(fn))
        sg = atol + rtol * max(abs(g), abs(gn))
        err = math.sqrt(0.5 * ((ef / sf) ** 2 + (eg / sg) ** 2))
        if not math.isfinite(err):
            # shrink; a q that stays non-finite as h -> 0 is fatal
            h *= 0.2
            if abs(h) < 1e-15 * max(1.0, abs(x)):
                status = STATUS_NONFINITE
                break
            continue
        if err <= 1.0:
            x = xn
            f = fn
            g = gn
            q = qn
            k1f = k7f
            k1g = k7g
            m = abs(f) + abs(g)
            if m > RENORM_HIGH or m < RENORM_LOW:
                if m == 0.0:
                    status = STATUS_NONFINITE
                    break
                f /= m
                g /= m
                k1f /= m
                k1g /= m
                L += math.log(m)
            if n == xs.shape[0]:
                xs = _grow(xs, n)
                fs = _grow(fs, n)
                gs = _grow(gs, n)
                qs = _grow(qs, n)
                ls = _grow(ls, n)
            xs[n] = x
            fs[n] = f
            gs[n] = g
            qs[n] = q
            ls[n] = L
            n += 1
            steps += 1
            if last:
                break
            fac = 0.9 * err ** -0.2 if err > 0.0 else 5.0
            if fac > 5.0:
                fac = 5.0
            h *= fac
        else:
            fac = 0.9 * err ** -0.2
            if fac < 0.2:
                fac = 0.2
            h *= fac
        if steps >= max_steps:
            status = STATUS_MAX_STEPS
            break
        if abs(h) < 1e-15 * max(1.0, abs(x)):
            status = STATUS_STEP_UNDERFLOW
            break
    return xs[:n], fs[:n], gs[:n], qs[:n], ls[:n], n, status


@njit
def sturm_count(diag, off, sigma):
    """Number of eigenvalues ``< sigma`` of the symmetric tridiagonal matrix."""
    count = 0
    d = diag[0] - sigma
    if d < 0.0:
        count += 1
    for i in range(1, diag.shape[0]):
        if d == 0.0:
            d = 1e-300
        d = diag[i] - sigma - off[i - 1] * off[i - 1] / d
        if d < 0.0:
            count += 1
    return count


@njit
def bisect_lowest(diag, off, count, lo, hi, rtol):
    """Lowest ``count`` eigenvalues by Sturm-sequence bisection."""
    out = np.empty(count)
    for k in range(count):
        a = lo
        b = hi
        while b - a > rtol * max(abs(a), abs(b), 1e-300):
            mid = 0.5 * (a + b)
            if mid <= a or mid >= b:
                break
            if sturm_count(diag, off, mid) > k:
                b = mid
            else:
                a = mid
        out[k] = 0.5 * (a + b)
        lo = a
    return out

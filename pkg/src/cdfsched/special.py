"""Exponential integrals and the two integral families behind the closed-form rate.

    I2(alpha, beta, gamma) = int_0^inf exp(-alpha x) / (beta + x)^gamma dx
    I1(alpha, beta, gamma) = int_0^inf exp(-alpha x) / ((1 + x) (beta + x)^gamma) dx

I2 is a rescaled generalized exponential integral,
I2 = beta^(1-gamma) * exp(z) E_gamma(z) with z = alpha*beta, and the scaled
E_n are produced for a whole range of orders at once by recurrences that
are always run in their stable direction.  I1 reduces to I2 by partial
fractions in 1/(1+x).

The routines take an arithmetic context so the same code serves plain
floats and MPFR numbers (via gmpy2) at any working precision.
"""

from __future__ import annotations

import contextlib
import math
from types import SimpleNamespace

import gmpy2


class _FloatContext:
    exp = staticmethod(math.exp)
    log = staticmethod(math.log)
    mpf = float
    euler = 0.57721566490153286061
    eps = 2.220446049250313e-16


FLOAT = _FloatContext()


@contextlib.contextmanager
def mpfr_context(bits: int):
    """Arithmetic context with ``bits`` of binary precision, active inside the block."""
    bits = int(bits)
    with gmpy2.context(gmpy2.get_context(), precision=bits):
        yield SimpleNamespace(
            bits=bits,
            exp=gmpy2.exp,
            log=gmpy2.log,
            mpf=gmpy2.mpfr,
            euler=gmpy2.const_euler(),
            eps=gmpy2.mpfr(2) ** (1 - bits),
            raised=lambda extra: mpfr_context(bits + int(extra)),
        )

_LENTZ_TINY = 1e-300
_MAX_ITER = 100000


def _e1_series(x, ctx=FLOAT):
    """E1(x) = -gamma - ln x + sum_{k>=1} (-1)^(k+1) x^k / (k k!); use for x <= 1."""
    term = ctx.mpf(1)
    total = ctx.mpf(0)
    for k in range(1, _MAX_ITER):
        term = -term * x / k
        contrib = -term / k
        total += contrib
        if abs(contrib) <= abs(total) * ctx.eps * 0.25:
            break
    return -ctx.euler - ctx.log(x) + total


def _scaled_expn_cf(n: int, x, ctx=FLOAT):
    """exp(x) E_n(x) by modified Lentz on the continued fraction (x > 1, or n large)."""
    tiny = ctx.mpf(_LENTZ_TINY)
    b = x + n
    c = 1 / tiny
    d = 1 / b
    h = d
    for i in range(1, _MAX_ITER):
        an = -i * (n - 1 + i)
        b += 2
        d = an * d + b
        if d == 0:
            d = tiny
        c = b + an / c
        if c == 0:
            c = tiny
        d = 1 / d
        delta = c * d
        h *= delta
        if abs(delta - 1) <= ctx.eps:
            return h
    raise ArithmeticError("continued fraction for E_n did not converge")


def exp_int_E1(x: float) -> float:
    """Exponential integral E1(x) = int_x^inf exp(-t)/t dt for x > 0."""
    x = float(x)
    if not x > 0:
        raise ValueError("E1 requires x > 0")
    if x <= 1.0:
        return _e1_series(x)
    return _scaled_expn_cf(1, x) * math.exp(-x)


def scaled_expn_seq(z, nmax: int, ctx=FLOAT) -> list:
    """[exp(z) E_n(z) for n = 1..nmax].

    The pivot order sits at n ~ z: below it the backward recurrence
    s_n = (1 - n s_{n+1}) / z is stable, above it the forward recurrence
    s_{n+1} = (1 - z s_n) / n is.
    """
    if nmax < 1:
        return []
    if not z > 0:
        raise ValueError("E_n requires z > 0")
    s = [None] * (nmax + 1)
    bits = getattr(ctx, "bits", None)
    if z <= 1:
        n0 = 1
        s[1] = ctx.exp(z) * _e1_series(z, ctx)
    elif bits is not None and z < bits / 8:
        # continued fraction needs ~bits^2/(50 z) steps here; the series and the
        # forward climb to n ~ z both lose ~z*log2(e) bits, paid for up front
        n0 = min(nmax, int(math.ceil(float(z))))
        with ctx.raised(1.5 * float(z) + 32) as hi:
            zz = hi.mpf(z)
            s[1] = hi.exp(zz) * _e1_series(zz, hi)
            for n in range(1, n0):
                s[n + 1] = (1 - zz * s[n]) / n
        for n in range(1, n0 + 1):
            s[n] = +s[n]
    else:
        n0 = min(nmax, int(math.ceil(float(z))))
        s[n0] = _scaled_expn_cf(n0, z, ctx)
        for n in range(n0 - 1, 0, -1):
            s[n] = (1 - n * s[n + 1]) / z
    for n in range(n0, nmax):
        s[n + 1] = (1 - z * s[n]) / n
    return s[1:]


def _check_args(alpha, beta, gamma):
    if not (alpha > 0 and beta > 0):
        raise ValueError("alpha and beta must be positive")
    if int(gamma) != gamma or gamma < 1:
        raise ValueError("gamma must be a positive integer")


def integral_I2_seq(alpha, beta, nmax: int, ctx=FLOAT) -> list:
    """[I2(alpha, beta, g) for g = 1..nmax]."""
    s = scaled_expn_seq(alpha * beta, nmax, ctx)
    out = []
    scale = ctx.mpf(1)
    for sg in s:
        out.append(scale * sg)
        scale = scale / beta
    return out


def integral_I2(alpha, beta, gamma: int, ctx=FLOAT):
    _check_args(alpha, beta, gamma)
    return integral_I2_seq(alpha, beta, int(gamma), ctx)[-1]


def _i1_forward(alpha, beta, nmax, ctx):
    d = beta - 1
    i2 = integral_I2_seq(alpha, beta, nmax, ctx)
    prev = integral_I2_seq(alpha, ctx.mpf(1), 1, ctx)[0]
    out = []
    for g in range(1, nmax + 1):
        prev = (prev - i2[g - 1]) / d
        out.append(prev)
    return out


def integral_I1_seq(alpha, beta, nmax: int, ctx=FLOAT) -> list:
    """[I1(alpha, beta, g) for g = 1..nmax].

    With q = |beta-1|/beta: for q >= 0.8 the forward recurrence
    I1(g) = (I1(g-1) - I2(g)) / (beta - 1) grows relative error by at most
    1/q per order.  Otherwise the top order is summed from
    1/(1+x) = sum_k (beta-1)^k / (beta+x)^(k+1), ratio q, and the backward
    recurrence I1(g-1) = (beta-1) I1(g) + I2(g) damps errors by q per step.
    In an MPFR context the forward recurrence is used whenever its loss of
    about nmax*log2(1/q) bits is smaller than the working precision, with the
    loss added as guard bits.
    """
    if nmax < 1:
        return []
    one = ctx.mpf(1)
    d = beta - 1
    q = abs(d) / beta
    bits = getattr(ctx, "bits", None)
    if q >= 0.8:
        return _i1_forward(alpha, beta, nmax, ctx)
    if bits is not None and q > 0:
        # with spare precision the forward recurrence is far cheaper than the
        # series, which needs ~bits/log2(1/q) extra orders
        loss = nmax * math.log2(1 / float(q))
        if loss < bits:
            with ctx.raised(loss + 32) as hi:
                vals = _i1_forward(hi.mpf(alpha), hi.mpf(beta), nmax, hi)
            return [+v for v in vals]

    if q == 0:
        extra = 1
    else:
        log_eps = float(ctx.log(ctx.eps)) - 7.0
        extra = int(math.ceil(log_eps / float(ctx.log(q)))) + 8
    i2 = integral_I2_seq(alpha, beta, nmax + extra + 1, ctx)
    top = ctx.mpf(0)
    dk = one
    for k in range(extra + 1):
        term = dk * i2[nmax + k]
        top += term
        if abs(term) <= abs(top) * ctx.eps * 0.25:
            break
        dk = dk * d
    out = [None] * nmax
    out[-1] = top
    for g in range(nmax, 1, -1):
        out[g - 2] = d * out[g - 1] + i2[g - 1]
    return out


def integral_I1(alpha, beta, gamma: int, ctx=FLOAT):
    _check_args(alpha, beta, gamma)
    return integral_I1_seq(alpha, beta, int(gamma), ctx)[-1]

"""Directed-rounding helpers for irrational quantities.

Everything returns exact `Fraction` bounds.  Rational roots go through
integer roots (`math.isqrt`, `gmpy2.iroot`); logarithms and irrational
exponents go through mpmath interval arithmetic.
"""
from __future__ import annotations

import math
import threading
from fractions import Fraction
from typing import Callable, Union

import gmpy2
import mpmath
from mpmath import iv

Number = Union[int, Fraction]

_IV_LOCK = threading.Lock()


def as_fraction(x) -> Fraction:
    """Exact rational from int, Fraction, Dyadic, decimal string or ``"p/q"``."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("bool is not a number")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        # floats are taken at their decimal face value ("0.3" means 3/10)
        return Fraction(repr(x))
    if isinstance(x, str):
        return Fraction(x.strip())
    to_fraction = getattr(x, "to_fraction", None)
    if to_fraction is not None:
        return to_fraction()
    raise TypeError(f"cannot interpret {type(x).__name__} as a rational")


def _mpf_to_fraction(x) -> Fraction:
    man, exp = mpmath.mpf(x).man_exp
    man = int(man)
    return Fraction(man << exp) if exp >= 0 else Fraction(man, 1 << -exp)


def iv_enclose(expr: Callable, prec: int) -> tuple[Fraction, Fraction]:
    """Evaluate ``expr(iv)`` in mpmath interval arithmetic; return exact endpoints."""
    with _IV_LOCK:
        old_iv, old_mp = iv.prec, mpmath.mp.prec
        iv.prec = prec + 24
        mpmath.mp.prec = prec + 64
        try:
            v = expr(iv)
            v = v if hasattr(v, "a") else iv.mpf(v)
            return _mpf_to_fraction(v.a), _mpf_to_fraction(v.b)
        finally:
            iv.prec = old_iv
            mpmath.mp.prec = old_mp


def iv_rational(ctx, q: Fraction):
    q = Fraction(q)
    return ctx.mpf(q.numerator) / ctx.mpf(q.denominator)


def _iroot_floor(m: int, n: int) -> tuple[int, bool]:
    r, exact = gmpy2.iroot(gmpy2.mpz(m), n)
    return int(r), bool(exact)


def root_bounds(x: Number, n: int, prec: int) -> tuple[Fraction, Fraction]:
    """``lo <= x**(1/n) <= hi`` on the ``2**-prec`` grid; tight when the root is on it."""
    x = Fraction(x)
    if x < 0:
        raise ValueError("root of a negative number")
    if n == 1:
        return x, x
    scale = n * prec
    num = x.numerator << scale
    m_floor = num // x.denominator
    r, exact = _iroot_floor(m_floor, n)
    lo = Fraction(r, 1 << prec)
    if exact and m_floor * x.denominator == num:
        return lo, lo
    return lo, Fraction(r + 1, 1 << prec)


def sqrt_upper(x: Number, prec: int) -> Fraction:
    return root_bounds(x, 2, prec)[1]


def sqrt_lower(x: Number, prec: int) -> Fraction:
    return root_bounds(x, 2, prec)[0]


def pow_bounds(x: Number, alpha: Number, prec: int) -> tuple[Fraction, Fraction]:
    """Bounds on ``x**alpha`` for ``x >= 0`` and rational ``alpha > 0``."""
    x = Fraction(x)
    alpha = Fraction(alpha)
    if alpha <= 0:
        raise ValueError("exponent must be positive")
    if x == 0:
        return Fraction(0), Fraction(0)
    p, q = alpha.numerator, alpha.denominator
    base = x ** p
    if q == 1:
        return base, base
    lo, hi = root_bounds(base, q, prec)
    return lo, hi


def pow_upper(x: Number, alpha: Number, prec: int) -> Fraction:
    return pow_bounds(x, alpha, prec)[1]


def neg_sqrt_power_bounds(N: Number, L: int, prec: int) -> tuple[Fraction, Fraction]:
    """Bounds on ``N ** -sqrt(L)``; exact whenever ``L`` is a perfect square."""
    N = Fraction(N)
    if N <= 0:
        raise ValueError("N must be positive")
    s = math.isqrt(L)
    if s * s == L:
        v = N ** -s
        return v, v
    return iv_enclose(lambda c: c.exp(-c.sqrt(L) * c.log(iv_rational(c, N))), prec)


def neg_sqrt_power_upper(N: Number, L: int, prec: int) -> Fraction:
    return neg_sqrt_power_bounds(N, L, prec)[1]


def ceil_to_grid(x: Fraction, prec: int) -> Fraction:
    """Smallest multiple of ``2**-prec`` that is ``>= x``; keeps bound sizes in check."""
    x = Fraction(x)
    k = -((-x.numerator << prec) // x.denominator)
    return Fraction(k, 1 << prec)

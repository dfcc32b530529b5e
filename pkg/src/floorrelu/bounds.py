"""Closed-form approximation-rate calculators.

Each calculator returns a `Dyadic` that is a certified upper bound of the
rate formula: irrational pieces (square roots, ``N**-sqrt(L)``, fractional
powers, logarithms) are bracketed and rounded toward the larger side, and
the final sum is rounded up to ``guard_bits`` fractional bits.  The
constructor uses these same functions when it fills in certificates.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .certified import as_fraction, neg_sqrt_power_upper, pow_upper, sqrt_upper
from .dyadic import DEFAULT_GUARD_BITS, Dyadic, round_up_dyadic
from .modulus import ModulusSpec

__all__ = [
    "bound_theorem1",
    "bound_theorem2",
    "bound_corollary1",
    "bound_holder",
    "bound_parameter_budget",
    "corollary1_sizes",
    "modulus_examples",
    "theorem1_size",
    "theorem2_size",
    "RateValue",
    "BudgetBound",
]


def _positive(name: str, v: int) -> None:
    if isinstance(v, bool) or not isinstance(v, int) or v < 1:
        raise ValueError(f"{name} must be a positive integer, got {v!r}")


def _prec(guard_bits: int) -> int:
    return guard_bits + 16


def _rate(modulus: ModulusSpec, d: int, u: Fraction, guard_bits: int,
          omega_sqrt_d: Optional[Fraction], tail: Fraction, slack: Fraction) -> Dyadic:
    """``omega(sqrt(d) * u) + 2 * omega(sqrt(d)) * tail + slack``, rounded up."""
    prec = _prec(guard_bits)
    root_d = sqrt_upper(d, prec)
    first = modulus.upper(root_d * u, prec)
    om = modulus.upper(root_d, prec) if omega_sqrt_d is None else as_fraction(omega_sqrt_d)
    return round_up_dyadic(first + 2 * om * tail + as_fraction(slack), guard_bits)


def bound_theorem2(modulus: ModulusSpec, d: int, N: int, L: int,
                   guard_bits: int = DEFAULT_GUARD_BITS,
                   omega_sqrt_d=None, slack=0) -> Dyadic:
    """Upper bound of ``omega(sqrt(d) N^-L) + 2 omega(sqrt(d)) 2^-(NL)``.

    ``omega_sqrt_d`` replaces ``omega(sqrt(d))`` by a caller-chosen upper
    bound and ``slack`` is added verbatim; certificates use both.
    """
    _positive("d", d), _positive("N", N), _positive("L", L)
    return _rate(modulus, d, Fraction(1, N ** L), guard_bits, omega_sqrt_d,
                 Fraction(1, 1 << (N * L)), as_fraction(slack))


def bound_theorem1(modulus: ModulusSpec, d: int, N: int, L: int,
                   guard_bits: int = DEFAULT_GUARD_BITS,
                   omega_sqrt_d=None, slack=0) -> Dyadic:
    """Upper bound of ``omega(sqrt(d) N^-sqrt(L)) + 2 omega(sqrt(d)) N^-sqrt(L)``."""
    _positive("d", d), _positive("N", N), _positive("L", L)
    u = neg_sqrt_power_upper(N, L, _prec(guard_bits))
    return _rate(modulus, d, u, guard_bits, omega_sqrt_d, u, as_fraction(slack))


def corollary1_sizes(d: int, N_bar: int, L_bar: int) -> tuple[int, int]:
    """Width/depth budgets mapped back to ``(N, L)`` for the Theorem 1 rate."""
    _positive("d", d)
    if N_bar < max(d, 18):
        raise ValueError(f"need N_bar >= max(d, 18) = {max(d, 18)}, got {N_bar}")
    if L_bar < 64 * d + 3:
        raise ValueError(f"need L_bar >= 64 d + 3 = {64 * d + 3}, got {L_bar}")
    return (N_bar - 13) // 5, (L_bar - 3) // (64 * d)


def bound_corollary1(modulus: ModulusSpec, d: int, N_bar: int, L_bar: int,
                     guard_bits: int = DEFAULT_GUARD_BITS) -> Dyadic:
    N, L = corollary1_sizes(d, N_bar, L_bar)
    return bound_theorem1(modulus, d, N, L, guard_bits)


def bound_holder(lam, alpha, d: int, N: int, L: int,
                 guard_bits: int = DEFAULT_GUARD_BITS) -> Dyadic:
    """Upper bound of ``3 lam d^(alpha/2) N^(-alpha sqrt(L))``."""
    lam, alpha = as_fraction(lam), as_fraction(alpha)
    if not 0 < alpha <= 1:
        raise ValueError("alpha must lie in (0, 1]")
    if lam <= 0:
        raise ValueError("lam must be positive")
    _positive("d", d), _positive("N", N), _positive("L", L)
    prec = _prec(guard_bits)
    d_part = pow_upper(d, alpha / 2, prec)
    # N^(-alpha sqrt L) = (N^-sqrt(L))^alpha and x -> x^alpha is increasing
    decay = pow_upper(neg_sqrt_power_upper(N, L, prec + 8), alpha, prec)
    return round_up_dyadic(3 * lam * d_part * decay, guard_bits)


def theorem1_size(d: int, N: int, L: int) -> tuple[int, int]:
    return max(d, 5 * N + 13), 64 * d * L + 3


def theorem2_size(d: int, N: int, L: int) -> tuple[int, int]:
    return max(d, 2 * N * N + 5 * N), 7 * d * L * L + 3


@dataclass(frozen=True)
class BudgetBound:
    bound: Dyadic
    width: int
    depth: int


def bound_parameter_budget(modulus: ModulusSpec, d: int, W: int,
                           guard_bits: int = DEFAULT_GUARD_BITS) -> BudgetBound:
    """Rate for the ``N = 2, L = W`` specialization: width ``max(d, 23)``, depth ``64 d W + 3``."""
    _positive("W", W)
    width, depth = theorem1_size(d, 2, W)
    return BudgetBound(bound_theorem1(modulus, d, 2, W, guard_bits), width, depth)


@dataclass(frozen=True)
class RateValue:
    value: float
    asymptotic: bool = True
    note: str = "formula is an asymptotic rate, valid for large N and L"


def modulus_examples(kind: str, d: int, N: float, L: float, alpha: float = 1.0) -> RateValue:
    """Floating-point value of the three illustrative rates for immoderate moduli.

    ``log``            ``3 (sqrt(L) ln N - ln(d)/2)^-1``
    ``log_power``      ``3 (sqrt(L) ln N - ln(d)/2)^(-1/d)``
    ``holder_over_d``  ``3 d^(alpha/(2d)) N^(-(alpha/d) sqrt(L))``
    """
    if d < 1 or N <= 0 or L <= 0:
        raise ValueError("d, N, L must be positive")
    if kind in ("log", "log_power"):
        denom = math.sqrt(L) * math.log(N) - 0.5 * math.log(d)
        if denom <= 0:
            raise ValueError("sqrt(L) ln N must exceed ln(d)/2 for the log rates")
        return RateValue(3.0 / denom if kind == "log" else 3.0 * denom ** (-1.0 / d))
    if kind == "holder_over_d":
        if not 0 < alpha <= 1:
            raise ValueError("alpha must lie in (0, 1]")
        return RateValue(3.0 * d ** (alpha / (2 * d)) * N ** (-(alpha / d) * math.sqrt(L)))
    raise ValueError(f"unknown example kind {kind!r}")

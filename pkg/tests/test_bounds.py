from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, strategies as st

from floorrelu.bounds import (
    bound_corollary1,
    bound_holder,
    bound_parameter_budget,
    bound_theorem1,
    bound_theorem2,
    corollary1_sizes,
    modulus_examples,
)
from floorrelu.dyadic import Dyadic
from floorrelu.modulus import ModulusSpec
from oracles import frac

LIP1 = ModulusSpec.lipschitz(1)
TOL = mpmath.mpf(2) ** -60


def hp(x):
    with mpmath.workdps(100):
        return mpmath.mpf(x.numerator) / x.denominator


def gap(bound: Dyadic, ref) -> mpmath.mpf:
    """``bound - ref`` at 100 digits; ``ref`` is a zero-argument callable."""
    with mpmath.workdps(100):
        return hp(frac(bound)) - ref()


def ref_theorem1(lam, alpha, d, N, L):
    with mpmath.workdps(100):
        u = mpmath.mpf(N) ** (-mpmath.sqrt(L))
        om = lambda r: lam * r ** alpha
        return om(mpmath.sqrt(d) * u) + 2 * om(mpmath.sqrt(d)) * u


def ref_theorem2(lam, alpha, d, N, L):
    with mpmath.workdps(100):
        om = lambda r: lam * r ** alpha
        return om(mpmath.sqrt(d) / mpmath.mpf(N) ** L) + 2 * om(mpmath.sqrt(d)) * mpmath.mpf(2) ** (-N * L)


def test_acceptance_values():
    assert bound_holder(1, 1, 1, 2, 4) == Dyadic(3, -2)
    assert bound_theorem2(LIP1, 1, 2, 2) == Dyadic(3, -3)
    assert bound_parameter_budget(LIP1, 1, 1).depth == 67


def test_theorem1_examples():
    assert bound_theorem1(LIP1, 1, 2, 4) == Dyadic(3, -2)
    assert bound_theorem1(ModulusSpec.zero(), 3, 5, 7) == Dyadic(0)
    v = bound_theorem1(ModulusSpec.holder(1, Fraction(1, 2)), 4, 2, 1)
    assert v <= Dyadic(3)
    assert 0 <= gap(v, lambda: ref_theorem1(1, mpmath.mpf(1) / 2, 4, 2, 1)) < TOL


def test_theorem2_examples():
    v = bound_theorem2(LIP1, 1, 3, 1)
    assert Fraction(1, 3) + Fraction(1, 4) <= frac(v) <= Fraction(1, 3) + Fraction(1, 4) + Fraction(1, 2 ** 64)
    vals = [bound_theorem2(LIP1, 1, 2, L) for L in range(1, 12)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_holder_examples():
    assert bound_holder(1, 1, 4, 2, 1) == Dyadic(3)
    assert bound_holder(1, 1, 4, 1, 5) == Dyadic(6)  # N = 1: no decay
    v = bound_holder(2, Fraction(1, 2), 9, 1, 3)
    assert 0 <= gap(v, lambda: 6 * mpmath.sqrt(3)) < TOL
    with pytest.raises(ValueError):
        bound_holder(1, 0, 1, 2, 2)
    with pytest.raises(ValueError):
        bound_holder(1, Fraction(3, 2), 1, 2, 2)


def test_budget_examples():
    b = bound_parameter_budget(LIP1, 1, 4)
    assert b.bound == Dyadic(3, -2)
    assert bound_parameter_budget(LIP1, 30, 1).width == 30


def test_corollary1_sizes():
    assert corollary1_sizes(1, 18, 67) == (1, 1)
    assert corollary1_sizes(1, 23, 67)[0] == 2
    with pytest.raises(ValueError):
        corollary1_sizes(1, 17, 67)
    with pytest.raises(ValueError):
        corollary1_sizes(2, 18, 130)
    assert bound_corollary1(LIP1, 1, 18, 67) == bound_theorem1(LIP1, 1, 1, 1)
    scan = [bound_corollary1(LIP1, 1, nb, 67 * 4) for nb in range(18, 49)]
    assert all(a >= b for a, b in zip(scan, scan[1:]))


@given(st.sampled_from([Fraction(1), Fraction(1, 2), Fraction(1, 3), Fraction(2, 3)]),
       st.integers(1, 6), st.integers(1, 7), st.integers(1, 9))
def test_bounds_are_tight_upper_bounds(alpha, d, N, L):
    mod = ModulusSpec.holder(1, alpha)
    for fn, ref in ((bound_theorem1, ref_theorem1), (bound_theorem2, ref_theorem2)):
        g = gap(fn(mod, d, N, L), lambda: ref(1, mpmath.mpf(alpha.numerator) / alpha.denominator, d, N, L))
        assert 0 <= g < TOL


@given(st.integers(1, 5), st.integers(2, 6), st.integers(1, 8))
def test_theorem1_nonincreasing_in_L(d, N, L):
    mod = ModulusSpec.holder(1, Fraction(1, 2))
    assert bound_theorem1(mod, d, N, L + 1) <= bound_theorem1(mod, d, N, L)


@given(st.integers(1, 5), st.integers(1, 6), st.integers(1, 8))
def test_holder_rate_vs_theorem1(d, N, L):
    # equal for alpha = 1; for alpha < 1 the three-lambda form dominates
    assert abs(frac(bound_theorem1(LIP1, d, N, L)) - frac(bound_holder(1, 1, d, N, L))) < Fraction(1, 2 ** 60)
    h = ModulusSpec.holder(1, Fraction(1, 2))
    assert bound_theorem1(h, d, N, L) <= bound_holder(1, Fraction(1, 2), d, N, L) + Dyadic(1, -60)


def test_guard_bits_refinement():
    mod = ModulusSpec.holder(1, Fraction(1, 3))
    coarse = bound_theorem1(mod, 3, 5, 7, guard_bits=20)
    fine = bound_theorem1(mod, 3, 5, 7, guard_bits=80)
    assert fine <= coarse
    assert coarse - fine < Dyadic(1, -18)


def test_modulus_examples():
    v = modulus_examples("log", 1, float(mpmath.e), 4)
    assert v.asymptotic and abs(v.value - 1.5) < 1e-12
    assert modulus_examples("log_power", 1, 3.0, 5).value == pytest.approx(modulus_examples("log", 1, 3.0, 5).value)
    assert modulus_examples("holder_over_d", 1, 3.0, 4, alpha=0.5).value == pytest.approx(
        float(bound_holder(1, Fraction(1, 2), 1, 3, 4)), rel=1e-12)
    with pytest.raises(ValueError):
        modulus_examples("log", 4, 1.0, 1)

"""Exact dyadic-rational scalars (``mantissa * 2**exponent``) and bit strings.

Every value a Floor-ReLU network touches lives here, so floor, ReLU and the
affine maps evaluate with no rounding at all.  General division is
deliberately missing: only shifts by powers of two are exact in this ring.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence, Union

__all__ = [
    "Dyadic",
    "BitString",
    "ZERO",
    "ONE",
    "as_dyadic",
    "bitstring_value",
    "round_up_dyadic",
    "round_down_dyadic",
    "round_nearest_dyadic",
    "sqrt_enclosure",
]

DEFAULT_GUARD_BITS = 64

_DYADIC_STR = re.compile(r"^\s*(-?\d+)\s*(?:/\s*2\s*\^\s*(-?\d+)\s*)?$")


class Dyadic:
    """Immutable binary rational in canonical form.

    The mantissa is odd, or the value is zero with exponent zero, so two
    Dyadics are equal exactly when their fields are equal.
    """

    __slots__ = ("mantissa", "exponent")

    mantissa: int
    exponent: int

    def __init__(self, mantissa: int = 0, exponent: int = 0):
        mantissa = int(mantissa)
        exponent = int(exponent)
        if mantissa == 0:
            exponent = 0
        elif not mantissa & 1:
            tz = (mantissa & -mantissa).bit_length() - 1
            mantissa >>= tz
            exponent += tz
        object.__setattr__(self, "mantissa", mantissa)
        object.__setattr__(self, "exponent", exponent)

    @classmethod
    def _raw(cls, mantissa: int, exponent: int) -> "Dyadic":
        # caller guarantees canonical form
        obj = object.__new__(cls)
        object.__setattr__(obj, "mantissa", mantissa)
        object.__setattr__(obj, "exponent", exponent)
        return obj

    def __setattr__(self, name, value):
        raise AttributeError("Dyadic is immutable")

    def __reduce__(self):
        return (Dyadic, (self.mantissa, self.exponent))

    # -- constructors -------------------------------------------------

    @classmethod
    def from_int(cls, n: int) -> "Dyadic":
        return cls(n, 0)

    @classmethod
    def from_fraction(cls, q: Fraction) -> "Dyadic":
        q = Fraction(q)
        den = q.denominator
        if den & (den - 1):
            raise ValueError(f"{q} is not a dyadic rational")
        return cls(q.numerator, -(den.bit_length() - 1))

    @classmethod
    def from_float(cls, x: float) -> "Dyadic":
        if not math.isfinite(x):
            raise ValueError(f"cannot convert {x!r} to Dyadic")
        return cls.from_fraction(Fraction(x))

    @classmethod
    def parse(cls, text: str) -> "Dyadic":
        """Parse ``"p"``, ``"p/2^q"`` or a finite decimal such as ``"0.375"``."""
        m = _DYADIC_STR.match(text)
        if m:
            p = int(m.group(1))
            q = int(m.group(2)) if m.group(2) is not None else 0
            return cls(p, -q)
        try:
            return cls.from_fraction(Fraction(text.strip()))
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"not a dyadic literal: {text!r}") from exc

    # -- conversions --------------------------------------------------

    def to_fraction(self) -> Fraction:
        if self.exponent >= 0:
            return Fraction(self.mantissa << self.exponent)
        return Fraction(self.mantissa, 1 << -self.exponent)

    def __float__(self) -> float:
        if self.exponent >= 0:
            return float(self.mantissa << self.exponent)
        # Fraction division rounds correctly even for huge mantissas
        return float(self.to_fraction())

    def __int__(self) -> int:
        if self.exponent >= 0:
            return self.mantissa << self.exponent
        m = self.mantissa
        return -((-m) >> -self.exponent) if m < 0 else m >> -self.exponent

    def is_integer(self) -> bool:
        return self.exponent >= 0

    @property
    def frac_bits(self) -> int:
        """Number of fractional binary digits needed to write the value."""
        return max(0, -self.exponent)

    def to_json(self) -> dict:
        return {"m": str(self.mantissa), "e": self.exponent}

    @classmethod
    def from_json(cls, obj: dict) -> "Dyadic":
        m = obj["m"]
        e = obj["e"]
        if not isinstance(m, str) or not re.fullmatch(r"-?\d+", m):
            raise ValueError(f"malformed Dyadic mantissa {m!r}")
        if isinstance(e, bool) or not isinstance(e, int):
            raise ValueError(f"malformed Dyadic exponent {e!r}")
        return cls(int(m), e)

    # -- arithmetic ---------------------------------------------------

    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        if not other.mantissa:
            return self
        if not self.mantissa:
            return other
        e1, e2 = self.exponent, other.exponent
        if e1 == e2:
            return Dyadic(self.mantissa + other.mantissa, e1)
        if e1 < e2:
            return Dyadic(self.mantissa + (other.mantissa << (e2 - e1)), e1)
        return Dyadic((self.mantissa << (e1 - e2)) + other.mantissa, e2)

    __radd__ = __add__

    def __neg__(self) -> "Dyadic":
        return Dyadic._raw(-self.mantissa, self.exponent)

    def __pos__(self) -> "Dyadic":
        return self

    def __abs__(self) -> "Dyadic":
        return self if self.mantissa >= 0 else -self

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        if not self.mantissa or not other.mantissa:
            return ZERO
        # odd * odd is odd, so the product is already canonical
        return Dyadic._raw(self.mantissa * other.mantissa, self.exponent + other.exponent)

    __rmul__ = __mul__

    def shift(self, k: int) -> "Dyadic":
        """Multiply by ``2**k`` (``k`` may be negative)."""
        if not self.mantissa:
            return self
        return Dyadic._raw(self.mantissa, self.exponent + k)

    def __lshift__(self, k: int) -> "Dyadic":
        return self.shift(k)

    def __rshift__(self, k: int) -> "Dyadic":
        return self.shift(-k)

    def floor(self) -> "Dyadic":
        if self.exponent >= 0:
            return self
        return Dyadic(self.mantissa >> -self.exponent, 0)

    def __floor__(self) -> int:
        return int(self.floor())

    def relu(self) -> "Dyadic":
        return self if self.mantissa > 0 else ZERO

    # -- comparison ---------------------------------------------------

    def _cmp(self, other: "Dyadic") -> int:
        a, b = self.mantissa, other.mantissa
        e1, e2 = self.exponent, other.exponent
        if e1 < e2:
            b <<= e2 - e1
        elif e2 < e1:
            a <<= e1 - e2
        return (a > b) - (a < b)

    def __eq__(self, other):
        if isinstance(other, Dyadic):
            return self.mantissa == other.mantissa and self.exponent == other.exponent
        if isinstance(other, (int, Fraction)):
            return self.to_fraction() == other
        return NotImplemented

    def __hash__(self):
        return hash(self.to_fraction())

    def __lt__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return self._cmp(other) < 0

    def __le__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return self._cmp(other) <= 0

    def __gt__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return self._cmp(other) > 0

    def __ge__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return self._cmp(other) >= 0

    def __bool__(self) -> bool:
        return self.mantissa != 0

    def sign(self) -> int:
        return (self.mantissa > 0) - (self.mantissa < 0)

    def __repr__(self) -> str:
        return f"Dyadic({self.mantissa}, {self.exponent})"

    def __str__(self) -> str:
        if self.exponent >= 0:
            return str(self.mantissa << self.exponent)
        return f"{self.mantissa}/2^{-self.exponent}"


ZERO = Dyadic._raw(0, 0)
ONE = Dyadic._raw(1, 0)


def _coerce(x):
    if isinstance(x, Dyadic):
        return x
    if isinstance(x, bool):
        return NotImplemented
    if isinstance(x, int):
        return Dyadic(x, 0)
    if isinstance(x, Fraction):
        return Dyadic.from_fraction(x)
    return NotImplemented


def as_dyadic(x: Union[Dyadic, int, Fraction, str, float]) -> Dyadic:
    """Coerce a dyadic-valued literal; raises ``ValueError`` for anything inexact."""
    if isinstance(x, Dyadic):
        return x
    if isinstance(x, bool):
        raise TypeError("bool is not a Dyadic")
    if isinstance(x, int):
        return Dyadic(x, 0)
    if isinstance(x, Fraction):
        return Dyadic.from_fraction(x)
    if isinstance(x, float):
        return Dyadic.from_float(x)
    if isinstance(x, str):
        return Dyadic.parse(x)
    raise TypeError(f"cannot interpret {type(x).__name__} as Dyadic")


@dataclass(frozen=True)
class BitString:
    """Finite binary expansion ``bin 0.b1 b2 ... bl``."""

    bits: tuple[int, ...]

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if not bits:
            raise ValueError("BitString needs at least one bit")
        if any(b not in (0, 1) for b in bits):
            raise ValueError("bits must be 0 or 1")
        object.__setattr__(self, "bits", bits)

    @classmethod
    def from_str(cls, text: str) -> "BitString":
        text = text.strip()
        if not text or set(text) - {"0", "1"}:
            raise ValueError(f"not a bit string: {text!r}")
        return cls(tuple(int(c) for c in text))

    @classmethod
    def from_int(cls, value: int, length: int) -> "BitString":
        """Bits of ``value`` written MSB-first on exactly ``length`` digits."""
        if value < 0 or value >= 1 << length:
            raise ValueError(f"{value} does not fit in {length} bits")
        return cls(tuple((value >> (length - 1 - k)) & 1 for k in range(length)))

    def __len__(self) -> int:
        return len(self.bits)

    def __iter__(self):
        return iter(self.bits)

    def __getitem__(self, k):
        return self.bits[k]

    def __str__(self) -> str:
        return "".join(map(str, self.bits))

    def to_int(self) -> int:
        return int(str(self), 2)

    def value(self) -> Dyadic:
        return Dyadic(self.to_int(), -len(self.bits))


def bitstring_value(b: Union[BitString, str, Sequence[int]]) -> Dyadic:
    """Exact value of ``sum(b_k * 2**-k)``."""
    if isinstance(b, str):
        b = BitString.from_str(b)
    elif not isinstance(b, BitString):
        b = BitString(tuple(b))
    return b.value()


# An enclosure maps a requested precision p to rationals lo <= x <= hi with
# hi - lo <= 2**-p.
Enclosure = Callable[[int], "tuple[Fraction, Fraction]"]
RealLike = Union[Dyadic, int, Fraction, float, Enclosure]


def _exact_fraction(x) -> Union[Fraction, None]:
    if isinstance(x, Dyadic):
        return x.to_fraction()
    if isinstance(x, bool):
        raise TypeError("bool is not a real number")
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValueError(f"non-finite value {x!r}")
        return Fraction(x)
    return None


def _ceil_scaled(q: Fraction, frac_bits: int) -> int:
    return -((-q.numerator << frac_bits) // q.denominator)


def _floor_scaled(q: Fraction, frac_bits: int) -> int:
    return (q.numerator << frac_bits) // q.denominator


def round_up_dyadic(x: RealLike, frac_bits: int = DEFAULT_GUARD_BITS, max_refine: int = 8) -> Dyadic:
    """Smallest dyadic with at most ``frac_bits`` fractional bits that is ``>= x``.

    ``x`` is either an exact number or an enclosure callable.  For an
    enclosure the precision is raised until the ceiling is decided; if it
    never is (the real sits on the grid), the upper candidate is returned,
    which is still a valid upper bound.
    """
    if frac_bits < 0:
        raise ValueError("frac_bits must be nonnegative")
    q = _exact_fraction(x)
    if q is not None:
        if q < 0:
            raise ValueError("round_up_dyadic expects x >= 0")
        return Dyadic(_ceil_scaled(q, frac_bits), -frac_bits)
    prec = frac_bits + 8
    for _ in range(max_refine):
        lo, hi = x(prec)
        if hi < 0:
            raise ValueError("round_up_dyadic expects x >= 0")
        k_lo, k_hi = _ceil_scaled(lo, frac_bits), _ceil_scaled(hi, frac_bits)
        if k_lo == k_hi:
            break
        prec *= 2
    if k_hi < 0:
        raise ValueError("round_up_dyadic expects x >= 0")
    return Dyadic(k_hi, -frac_bits)


def round_down_dyadic(x: Union[Dyadic, int, Fraction, float], frac_bits: int = DEFAULT_GUARD_BITS) -> Dyadic:
    q = _exact_fraction(x)
    if q is None:
        raise TypeError("round_down_dyadic needs an exact value")
    return Dyadic(_floor_scaled(q, frac_bits), -frac_bits)


def round_nearest_dyadic(x: Union[Dyadic, int, Fraction, float], frac_bits: int = DEFAULT_GUARD_BITS) -> Dyadic:
    """Nearest dyadic on the ``2**-frac_bits`` grid (ties go up)."""
    q = _exact_fraction(x)
    if q is None:
        raise TypeError("round_nearest_dyadic needs an exact value")
    return Dyadic(_floor_scaled(q + Fraction(1, 1 << (frac_bits + 1)), frac_bits), -frac_bits)


def sqrt_enclosure(x: Union[int, Fraction]) -> Enclosure:
    """Enclosure of ``sqrt(x)`` for a nonnegative rational, by integer square roots."""
    x = Fraction(x)
    if x < 0:
        raise ValueError("sqrt of a negative number")

    def enclose(prec: int) -> tuple[Fraction, Fraction]:
        scaled = (x.numerator << (2 * prec)) // x.denominator
        r = math.isqrt(scaled)
        lo = Fraction(r, 1 << prec)
        hi = lo if r * r * x.denominator == x.numerator << (2 * prec) else Fraction(r + 1, 1 << prec)
        return lo, hi

    return enclose


def dot(weights: Iterable[Dyadic], values: Iterable[Dyadic]) -> Dyadic:
    acc = ZERO
    for w, v in zip(weights, values):
        if w.mantissa and v.mantissa:
            acc = acc + w * v
    return acc

"""Declared moduli of continuity.

A `ModulusSpec` is trusted input: it claims ``|f(x) - f(y)| <= omega(|x - y|)``.
`upper` returns a certified rational upper bound of ``omega(r)`` so that
error bounds built from it never understate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .certified import as_fraction, ceil_to_grid, iv_enclose, iv_rational, pow_bounds

__all__ = ["ModulusSpec", "ModulusError"]

KINDS = ("holder", "lipschitz", "log", "log_power", "holder_over_d", "table")

# saturation point for the logarithmic moduli; 1/ln(1/r) blows up at r = 1
DEFAULT_LOG_CAP = Fraction(1, 4)


class ModulusError(ValueError):
    pass


@dataclass(frozen=True)
class ModulusSpec:
    """One of the supported modulus families.

    ``holder``          ``lam * r**alpha``
    ``lipschitz``       ``lam * r``
    ``log``             ``1 / ln(1/min(r, cap))``
    ``log_power``       ``ln(1/min(r, cap)) ** -power``  (power = 1/d in the usual example)
    ``holder_over_d``   ``r ** (alpha / d)``
    ``table``           piecewise linear through ``points``, constant after the last one

    ``scale`` multiplies the radius first: ``omega(r) = base(scale * r)``,
    which is how a modulus on ``[-M, M]^d`` transfers to the unit cube.
    """

    kind: str
    lam: Fraction = Fraction(1)
    alpha: Fraction = Fraction(1)
    power: Fraction = Fraction(1)
    cap: Fraction = DEFAULT_LOG_CAP
    points: tuple[tuple[Fraction, Fraction], ...] = ()
    scale: Fraction = Fraction(1)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ModulusError(f"unknown modulus kind {self.kind!r}")
        for name in ("lam", "alpha", "power", "cap", "scale"):
            object.__setattr__(self, name, as_fraction(getattr(self, name)))
        pts = tuple((as_fraction(r), as_fraction(w)) for r, w in self.points)
        object.__setattr__(self, "points", pts)
        if self.lam < 0:
            raise ModulusError("lam must be nonnegative")
        if self.scale <= 0:
            raise ModulusError("scale must be positive")
        if self.kind in ("holder", "holder_over_d") and not 0 < self.alpha <= 1:
            raise ModulusError("Hölder order must lie in (0, 1]")
        if self.kind == "lipschitz" and self.alpha != 1:
            raise ModulusError("lipschitz modulus has alpha = 1")
        if self.kind in ("log", "log_power"):
            if not 0 < self.cap < 1:
                raise ModulusError("log cap must lie in (0, 1)")
            if self.power <= 0:
                raise ModulusError("log power must be positive")
        if self.kind == "table":
            self._check_table(pts)

    # -- constructors -------------------------------------------------

    @classmethod
    def holder(cls, lam, alpha) -> "ModulusSpec":
        return cls("holder", lam=lam, alpha=alpha)

    @classmethod
    def lipschitz(cls, lam) -> "ModulusSpec":
        return cls("lipschitz", lam=lam)

    @classmethod
    def zero(cls) -> "ModulusSpec":
        return cls("lipschitz", lam=0)

    @classmethod
    def log_type(cls, cap=DEFAULT_LOG_CAP) -> "ModulusSpec":
        return cls("log", cap=cap)

    @classmethod
    def log_power_type(cls, d: int, cap=DEFAULT_LOG_CAP) -> "ModulusSpec":
        return cls("log_power", power=Fraction(1, d), cap=cap)

    @classmethod
    def holder_over_d(cls, alpha, d: int) -> "ModulusSpec":
        return cls("holder_over_d", alpha=Fraction(as_fraction(alpha), d))

    @classmethod
    def table(cls, points: Iterable[tuple]) -> "ModulusSpec":
        return cls("table", points=tuple(points))

    def scaled(self, factor) -> "ModulusSpec":
        """``r -> omega(factor * r)``."""
        return ModulusSpec(self.kind, self.lam, self.alpha, self.power, self.cap, self.points,
                           self.scale * as_fraction(factor))

    @staticmethod
    def _check_table(pts):
        if not pts:
            raise ModulusError("table modulus needs at least one point")
        if pts[0] != (0, 0):
            raise ModulusError("table modulus must start at (0, 0)")
        for (r0, w0), (r1, w1) in zip(pts, pts[1:]):
            if r1 <= r0:
                raise ModulusError("table radii must increase")
            if w1 < w0:
                raise ModulusError("table values must be nondecreasing")

    # -- evaluation ---------------------------------------------------

    @property
    def exponent(self) -> Fraction:
        return Fraction(1) if self.kind == "lipschitz" else self.alpha

    def is_zero(self) -> bool:
        if self.kind in ("holder", "lipschitz"):
            return self.lam == 0
        if self.kind == "table":
            return all(w == 0 for _, w in self.points)
        return False

    def upper(self, r, prec: int = 80) -> Fraction:
        """Certified upper bound of ``omega(r)`` for a rational ``r >= 0``."""
        r = as_fraction(r) * self.scale
        if r < 0:
            raise ModulusError("radius must be nonnegative")
        if r == 0 or self.is_zero():
            return Fraction(0)
        if self.kind in ("holder", "lipschitz", "holder_over_d"):
            return ceil_to_grid(self.lam * pow_bounds(r, self.exponent, prec + 8)[1], prec)
        if self.kind in ("log", "log_power"):
            rr = min(r, self.cap)
            power = self.power

            def expr(c):
                base = 1 / c.log(1 / iv_rational(c, rr))
                return base if power == 1 else base ** iv_rational(c, power)

            return ceil_to_grid(iv_enclose(expr, prec + 8)[1], prec)
        return self._table_value(r)

    def _table_value(self, r: Fraction) -> Fraction:
        pts = self.points
        if r >= pts[-1][0]:
            return pts[-1][1]
        for (r0, w0), (r1, w1) in zip(pts, pts[1:]):
            if r0 <= r <= r1:
                return w0 + (w1 - w0) * (r - r0) / (r1 - r0)
        raise AssertionError("unreachable")

    def __call__(self, r: float) -> float:
        """Floating-point value of ``omega(r)``, for diagnostics and plots."""
        if r < 0:
            raise ModulusError("radius must be nonnegative")
        r = float(self.scale) * r
        if r == 0 or self.is_zero():
            return 0.0
        if self.kind in ("holder", "lipschitz", "holder_over_d"):
            return float(self.lam) * r ** float(self.exponent)
        if self.kind in ("log", "log_power"):
            rr = min(r, float(self.cap))
            return (1.0 / math.log(1.0 / rr)) ** float(self.power)
        return float(self._table_value(as_fraction(r)))

    def validate(self, radii: Optional[Sequence[float]] = None) -> None:
        """Check ``omega(0) = 0``, nonnegativity and monotonicity on sample radii."""
        if radii is None:
            radii = [0.0] + [2.0 ** k for k in range(-40, 6)]
        radii = sorted(radii)
        vals = [self(r) for r in radii]
        if vals[0] != 0 and radii[0] == 0:
            raise ModulusError("omega(0) must be 0")
        for r, v in zip(radii, vals):
            if v < 0 or math.isnan(v):
                raise ModulusError(f"omega({r}) = {v} is not a nonnegative number")
        for (r0, v0), (r1, v1) in zip(zip(radii, vals), zip(radii[1:], vals[1:])):
            if v1 < v0:
                raise ModulusError(f"omega decreases between {r0} and {r1}")

    # -- serialization ------------------------------------------------

    def to_json(self) -> dict:
        out = {"kind": self.kind}
        if self.kind in ("holder", "lipschitz"):
            out["lam"] = str(self.lam)
        if self.kind in ("holder", "holder_over_d"):
            out["alpha"] = str(self.alpha)
        if self.kind in ("log", "log_power"):
            out["power"] = str(self.power)
            out["cap"] = str(self.cap)
        if self.kind == "table":
            out["points"] = [[str(r), str(w)] for r, w in self.points]
        if self.scale != 1:
            out["scale"] = str(self.scale)
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "ModulusSpec":
        kw = {k: obj[k] for k in ("lam", "alpha", "power", "cap", "scale") if k in obj}
        if "points" in obj:
            kw["points"] = tuple(tuple(p) for p in obj["points"])
        return cls(obj["kind"], **kw)

    def describe(self) -> str:
        if self.kind == "lipschitz":
            base = f"lipschitz(lam={self.lam})"
        elif self.kind == "holder":
            base = f"holder(lam={self.lam}, alpha={self.alpha})"
        elif self.kind == "holder_over_d":
            base = f"r^{self.alpha}"
        elif self.kind == "log":
            base = "1/ln(1/r)"
        elif self.kind == "log_power":
            base = f"ln(1/r)^-{self.power}"
        else:
            base = f"table({len(self.points)} points)"
        return base if self.scale == 1 else f"{base} at {self.scale}*r"

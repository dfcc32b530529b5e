"""Builtin target functions with declared moduli of continuity.

Modulus derivations (Euclidean norm; the domain is ``[0, 1]^d``, or
``[-M, M]^d`` when a box half-width ``M`` is given):

``mean``     gradient ``(1/d, ..., 1/d)`` has norm ``1/sqrt(d)``
``product``  each partial derivative is at most ``max(M, 1)^(d-1)``, so the
             gradient norm is at most ``sqrt(d) max(M, 1)^(d-1)``
``min``      ``|min x - min y| <= max_j |x_j - y_j| <= ||x - y||``
``spike``    reverse triangle inequality plus subadditivity of ``t -> t**alpha``
``const``    no variation

Irrational Lipschitz constants are rounded up to 64 fractional bits.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from functools import reduce
from typing import Callable, Mapping

from .certified import as_fraction, pow_bounds, root_bounds, sqrt_upper
from .constructor import TargetFunction
from .modulus import ModulusSpec

__all__ = ["TargetSpec", "registry", "lookup", "from_identifier", "UnknownTargetError"]

_LAM_BITS = 64


class UnknownTargetError(KeyError):
    pass


@dataclass(frozen=True)
class TargetSpec:
    name: str
    description: str
    modulus_note: str
    factory: Callable[..., TargetFunction]
    params: tuple[str, ...] = ()


def _mean(d: int, M=None) -> TargetFunction:
    lam = Fraction(1, 1) / root_bounds(d, 2, _LAM_BITS)[0] if d > 1 else Fraction(1)
    return TargetFunction.exact(d, ModulusSpec.lipschitz(lam), lambda x: sum(x) / d, "mean")


def _product(d: int, M=None) -> TargetFunction:
    grow = max(as_fraction(M), Fraction(1)) ** (d - 1) if M is not None else Fraction(1)
    lam = sqrt_upper(d, _LAM_BITS) * grow
    return TargetFunction.exact(d, ModulusSpec.lipschitz(lam),
                                lambda x: reduce(lambda a, b: a * b, x, Fraction(1)), "product")


def _min(d: int, M=None) -> TargetFunction:
    return TargetFunction.exact(d, ModulusSpec.lipschitz(1), lambda x: min(x), "min")


def _const(d: int, M=None, value="1/2") -> TargetFunction:
    v = as_fraction(value)
    return TargetFunction.exact(d, ModulusSpec.zero(), lambda x: v, "const", {"value": v})


def _spike(d: int, M=None, alpha="1/2", center="1/2") -> TargetFunction:
    alpha, c = as_fraction(alpha), as_fraction(center)
    if not 0 < alpha <= 1:
        raise ValueError("alpha must lie in (0, 1]")

    def enclose(x, prec):
        sq = sum((v - c) ** 2 for v in x)
        # ||x - c||^alpha = (sq)^(alpha / 2)
        return pow_bounds(sq, alpha / 2, prec + 2)

    return TargetFunction(d, ModulusSpec.holder(1, alpha), enclose, "spike",
                          {"alpha": alpha, "center": c})


_REGISTRY = {
    "mean": TargetSpec("mean", "sum(x) / d", "lipschitz 1/sqrt(d)", _mean),
    "product": TargetSpec("product", "prod(x)", "lipschitz sqrt(d)", _product),
    "min": TargetSpec("min", "min_j x_j", "lipschitz 1", _min),
    "spike": TargetSpec("spike", "||x - c||^alpha, c = (center, ..., center)", "holder(1, alpha)",
                        _spike, ("alpha", "center")),
    "const": TargetSpec("const", "constant value", "zero", _const, ("value",)),
}


def registry() -> list[TargetSpec]:
    return [_REGISTRY[k] for k in sorted(_REGISTRY)]


def lookup(name: str, d: int = 1, M=None, **params) -> TargetFunction:
    """Instantiate a builtin target; ``M`` selects the domain ``[-M, M]^d``."""
    try:
        spec = _REGISTRY[name]
    except KeyError:
        raise UnknownTargetError(f"unknown target {name!r}; known: {', '.join(sorted(_REGISTRY))}") from None
    if isinstance(d, bool) or not isinstance(d, int) or d < 1:
        raise ValueError("d must be a positive integer")
    extra = set(params) - set(spec.params)
    if extra:
        raise ValueError(f"target {name!r} takes no parameter(s) {sorted(extra)}")
    f = spec.factory(d, M, **params)
    if M is not None:
        f = replace(f, params={**f.params, "M": as_fraction(M)})
    return f


def from_identifier(ident: Mapping) -> TargetFunction:
    """Rebuild a registered target from a certificate's target identifier."""
    params = dict(ident.get("params", {}))
    M = params.pop("M", None)
    return lookup(ident["name"], int(ident["d"]), M, **params)

"""Build Floor-ReLU approximants of continuous functions on cubes.

Pipeline for `build_theorem2` (fixed N, L):

1. normalize ``f`` to ``(f - f(0) + Omega) / (2 Omega)`` with ``Omega`` a
   dyadic upper bound of ``omega_f(sqrt(d))``; cut ``[0, 1]^d`` into
   ``K^d`` cells with ``K = N^L``
2. ``Phi1``: d parallel step functions mapping a cell to its index vector
3. ``psi1`` flattens the index, ``psi2`` looks up the quantized sample
   (NL point fitters, one per bit, run N at a time)
4. rescale by ``2 Omega`` and shift by ``f(0) - Omega``

`build_theorem1` reparameterizes (N, L) and delegates.  Every network
weight is dyadic, so the result evaluates exactly.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from fractions import Fraction
from typing import Callable, Iterator, Mapping, Optional, Sequence

from .bitextract import build_point_fitter
from .bounds import bound_theorem1, bound_theorem2, theorem1_size, theorem2_size
from .certified import as_fraction, sqrt_upper
from .dyadic import (
    DEFAULT_GUARD_BITS,
    ONE,
    ZERO,
    BitString,
    Dyadic,
    round_down_dyadic,
    round_nearest_dyadic,
    round_up_dyadic,
)
from .modulus import ModulusSpec
from .network import (
    ActivationKind,
    Affine,
    Layer,
    Network,
    affine_wrap,
    audit,
    compose_serial,
    identity_affine,
    stack_parallel,
    with_passthrough,
)

__all__ = [
    "TargetFunction",
    "GridSpec",
    "SampleTable",
    "Certificate",
    "PrecisionError",
    "UnsupportedSizeError",
    "build_quantizer_phi1",
    "build_projector_Phi1",
    "build_indexer_psi1",
    "sample_and_quantize",
    "build_psi2",
    "build_theorem2",
    "build_theorem1",
    "reparameterize",
    "wrap_domain",
    "omega_upper",
]

Point = tuple[Fraction, ...]
EncloseFn = Callable[[Point, int], "tuple[Fraction, Fraction]"]


class PrecisionError(RuntimeError):
    """The target could not be evaluated as precisely as the build needs."""


class UnsupportedSizeError(ValueError):
    pass


@dataclass(frozen=True)
class TargetFunction:
    """Function to approximate, queried at exact rational points.

    ``enclose(x, prec)`` returns ``(lo, hi)`` with ``lo <= f(x) <= hi`` and
    ``hi - lo <= 2**-prec``.  The declared modulus is trusted.
    """

    dim: int
    modulus: ModulusSpec
    enclose: EncloseFn
    name: str = "f"
    params: Mapping = field(default_factory=dict)

    @classmethod
    def exact(cls, dim: int, modulus: ModulusSpec, fn: Callable[[Point], Fraction],
              name: str = "f", params: Optional[Mapping] = None) -> "TargetFunction":
        """Wrap a function that returns exact rationals at rational points."""

        def enclose(x, prec):
            v = Fraction(fn(x))
            return v, v

        return cls(dim, modulus, enclose, name, dict(params or {}))

    def __call__(self, *x) -> float:
        lo, hi = self.enclose(tuple(as_fraction(v) for v in x), 60)
        return float((lo + hi) / 2)

    def identifier(self) -> dict:
        return {"name": self.name, "d": self.dim, "params": {k: str(v) for k, v in self.params.items()}}


@dataclass(frozen=True)
class GridSpec:
    """Cells ``Q_beta`` of side ``1/K``; the last interval per axis is closed at 1."""

    K: int
    d: int

    def __post_init__(self):
        if self.K < 1 or self.d < 1:
            raise ValueError("K and d must be positive")

    def indices(self) -> Iterator[tuple[int, ...]]:
        """All beta, ordered so that the n-th item has flat index ``psi1(beta) = n``."""
        for rev in itertools.product(range(self.K), repeat=self.d):
            yield tuple(reversed(rev))

    def corner(self, beta: Sequence[int]) -> Point:
        return tuple(Fraction(b, self.K) for b in beta)

    def flat_index(self, beta: Sequence[int]) -> int:
        return 1 + sum(b * self.K ** j for j, b in enumerate(beta))

    def cell_of(self, x: Sequence) -> tuple[int, ...]:
        """Reference cell lookup by comparison, independent of any network."""
        out = []
        for v in x:
            v = as_fraction(v)
            if not 0 <= v <= 1:
                raise ValueError(f"coordinate {v} outside [0, 1]")
            k = math.floor(v * self.K)
            out.append(min(k, self.K - 1))
        return tuple(out)


@dataclass(frozen=True)
class SampleTable:
    """Quantized normalized samples, one NL-bit string per cell (flat order)."""

    K: int
    d: int
    nbits: int
    entries: tuple[BitString, ...]
    lower: tuple[Dyadic, ...]
    upper: tuple[Dyadic, ...]
    omega: Dyadic
    anchor: Dyadic

    def value(self, i: int) -> Dyadic:
        return self.entries[i - 1].value()

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class Certificate:
    theorem: int
    d: int
    N: int
    L: int
    K: int
    omega: Dyadic
    guard_bits: int
    eps_guard: Dyadic
    anchor: Dyadic
    width: int
    depth: int
    nonzero_params: int
    error_bound: Dyadic
    target: Mapping
    N_tilde: Optional[int] = None
    L_tilde: Optional[int] = None
    inner_error_bound: Optional[Dyadic] = None
    domain_M: Optional[Dyadic] = None
    modulus: Optional[ModulusSpec] = None
    created: str = ""

    @property
    def build_N(self) -> int:
        return self.N_tilde if self.N_tilde is not None else self.N

    @property
    def build_L(self) -> int:
        return self.L_tilde if self.L_tilde is not None else self.L


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


# -- step 2: cell projector ------------------------------------------


def build_quantizer_phi1(K: int) -> Network:
    """``x -> floor(-relu(-K x + K - 1) + K - 1)``: equals k on ``E_k``, and K-1 at x = 1."""
    if K < 1:
        raise ValueError("K must be positive")
    k = Dyadic(K)
    l1 = Layer(((-k,),), (k - ONE,), (ActivationKind.RELU,))
    l2 = Layer(((-ONE,),), (k - ONE,), (ActivationKind.FLOOR,))
    return Network(1, (l1, l2), identity_affine(1))


def build_projector_Phi1(d: int, K: int) -> Network:
    return stack_parallel([build_quantizer_phi1(K)] * d)


def build_indexer_psi1(d: int, K: int) -> Affine:
    """``beta -> 1 + sum_j beta_j K^(j-1)``, a bijection onto ``1..K^d``."""
    return Affine((tuple(Dyadic(K ** j) for j in range(d)),), (ONE,), d)


# -- step 1 + 3: sampling and quantization ---------------------------


def omega_upper(modulus: ModulusSpec, d: int, guard_bits: int) -> Dyadic:
    """Dyadic ``Omega >= omega(sqrt(d))``; a zero modulus gets ``2**-guard_bits``."""
    prec = guard_bits + 16
    om = round_up_dyadic(modulus.upper(sqrt_upper(d, prec), prec), guard_bits)
    # any positive Omega works for constant targets; a tiny one keeps the bound tight
    return om if om else Dyadic(1, -guard_bits)


def _anchor(f: TargetFunction, guard_bits: int) -> Dyadic:
    lo, hi = f.enclose((Fraction(0),) * f.dim, guard_bits + 2)
    if hi - lo > Fraction(1, 1 << (guard_bits + 2)):
        raise PrecisionError("f(0) enclosure is wider than requested")
    return round_nearest_dyadic((lo + hi) / 2, guard_bits)


def sample_and_quantize(f: TargetFunction, grid: GridSpec, nbits: int,
                        omega: Optional[Dyadic] = None, anchor: Optional[Dyadic] = None,
                        guard_bits: int = DEFAULT_GUARD_BITS) -> SampleTable:
    """Quantize ``(f(x_beta) - anchor + omega) / (2 omega)`` to ``nbits`` bits per cell.

    The stored string ``xi`` satisfies ``|value(xi) - normalized| <= 2**-nbits``
    whenever the normalized value lies in ``[0, 1]``.  ``omega`` and
    ``anchor`` default to the values `build_theorem2` would use.
    """
    if omega is None:
        omega = omega_upper(f.modulus, f.dim, guard_bits)
    if anchor is None:
        anchor = _anchor(f, guard_bits)
    if omega <= 0:
        raise ValueError("omega must be positive")
    om = omega.to_fraction()
    a = anchor.to_fraction()
    scale = 1 << nbits
    # enough bits of f so the normalized enclosure is narrower than 2^-nbits
    extra = max(0, 1 - (omega.exponent + omega.mantissa.bit_length())) + 2
    prec = nbits + extra + 8
    entries, lowers, uppers = [], [], []
    for beta in grid.indices():
        lo, hi = f.enclose(grid.corner(beta), prec)
        t_lo = (lo - a + om) / (2 * om)
        t_hi = (hi - a + om) / (2 * om)
        if t_hi - t_lo > Fraction(1, scale):
            raise PrecisionError(f"target enclosure at {beta} too wide for {nbits} bits")
        # floor of the upper end: error <= 2^-nbits whether or not the
        # enclosure straddles a grid point
        k = (t_hi.numerator * scale) // t_hi.denominator
        k = min(max(k, 0), scale - 1)
        entries.append(BitString.from_int(k, nbits))
        lowers.append(round_down_dyadic(t_lo, nbits + guard_bits))
        uppers.append(round_up_dyadic(max(t_hi, Fraction(0)), nbits + guard_bits) if t_hi >= 0
                      else round_down_dyadic(t_hi, nbits + guard_bits))
    return SampleTable(grid.K, grid.d, nbits, tuple(entries), tuple(lowers), tuple(uppers),
                       omega, anchor)


def build_psi2(N: int, L: int, d: int, table: SampleTable) -> Network:
    """One-input network with ``psi2(i) = value(table entry i)`` for ``i = 1..K^d``.

    NL point fitters (one per bit position) run in L serial blocks of N,
    with two carried channels: the index ``i`` and the running partial sum.
    """
    K = N ** L
    if len(table) != K ** d or table.nbits != N * L:
        raise ValueError(f"table must have {K ** d} entries of {N * L} bits")
    nbits = N * L
    fitters = [build_point_fitter(N, d * L, [e.bits[j] for e in table.entries]) for j in range(nbits)]
    blocks = []
    for b in range(L):
        js = range(b * N, (b + 1) * N)
        stacked = with_passthrough(stack_parallel([fitters[j] for j in js]), 2)
        # (i, acc) -> (i, ..., i, i, acc)
        pre_rows = [(ONE, ZERO)] * N + [(ONE, ZERO), (ZERO, ONE)]
        pre = Affine(tuple(pre_rows), (ZERO,) * (N + 2), 2)
        # (bits..., i, acc) -> (i, acc + sum 2^-j bit_j)
        post_acc = tuple(Dyadic(1, -(j + 1)) for j in js) + (ZERO, ONE)
        post_i = (ZERO,) * N + (ONE, ZERO)
        post = Affine((post_i, post_acc), (ZERO, ZERO), N + 2)
        blocks.append(affine_wrap(stacked, pre=pre, post=post))
    net = compose_serial(*blocks) if len(blocks) > 1 else blocks[0]
    start = Affine(((ONE,), (ZERO,)), (ZERO, ZERO), 1)
    finish = Affine(((ZERO, ONE),), (ZERO,), 2)
    return affine_wrap(net, pre=start, post=finish)


# -- theorem builders -------------------------------------------------


def _check_sizes(N: int, L: int) -> None:
    for name, v in (("N", N), ("L", L)):
        if isinstance(v, bool) or not isinstance(v, int) or v < 1:
            raise ValueError(f"{name} must be a positive integer")
    if N < 2:
        raise UnsupportedSizeError("the direct construction needs N >= 2 (use build_theorem1 for N = 1)")


def build_theorem2(f: TargetFunction, N: int, L: int,
                   guard_bits: int = DEFAULT_GUARD_BITS) -> tuple[Network, Certificate]:
    """Width ``<= max(d, 2N^2 + 5N)``, depth ``<= 7 d L^2 + 3`` approximant of ``f``."""
    _check_sizes(N, L)
    d = f.dim
    K = N ** L
    omega = omega_upper(f.modulus, d, guard_bits)
    anchor = _anchor(f, guard_bits)
    eps = Dyadic(1, -guard_bits)
    table = sample_and_quantize(f, GridSpec(K, d), N * L, omega, anchor, guard_bits)

    front = affine_wrap(build_projector_Phi1(d, K), post=build_indexer_psi1(d, K))
    tilde = compose_serial(front, build_psi2(N, L, d, table))
    rescale = Affine(((omega.shift(1),),), (anchor - omega,), 1)
    net = affine_wrap(tilde, post=rescale)

    rep = audit(net)
    max_w, max_d = theorem2_size(d, N, L)
    if rep.width > max_w or rep.depth > max_d:
        raise AssertionError(f"size {rep.width}x{rep.depth} exceeds budget {max_w}x{max_d}")
    bound = bound_theorem2(f.modulus, d, N, L, guard_bits, omega_sqrt_d=omega.to_fraction(),
                           slack=eps.to_fraction())
    cert = Certificate(2, d, N, L, K, omega, guard_bits, eps, anchor, rep.width, rep.depth,
                       rep.nonzero_params, bound, f.identifier(), modulus=f.modulus, created=_now())
    return net, cert


def reparameterize(N: int, L: int) -> tuple[int, int]:
    """Smallest ``Nt >= 2``, ``Lt >= 3`` with ``(Nt-1)^2 <= N < Nt^2`` and ``(Lt-1)^2 <= 4L < Lt^2``."""
    if N < 1 or L < 1:
        raise ValueError("N and L must be positive")
    Nt = math.isqrt(N) + 1
    Lt = math.isqrt(4 * L) + 1
    assert Nt >= 2 and Lt >= 3
    assert (Nt - 1) ** 2 <= N < Nt ** 2 and (Lt - 1) ** 2 <= 4 * L < Lt ** 2
    assert 2 * Nt ** 2 + 5 * Nt <= 5 * (Nt - 1) ** 2 + 13 <= 5 * N + 13
    assert 7 * Lt ** 2 <= 16 * (Lt - 1) ** 2 <= 64 * L
    return Nt, Lt


def build_theorem1(f: TargetFunction, N: int, L: int,
                   guard_bits: int = DEFAULT_GUARD_BITS) -> tuple[Network, Certificate]:
    """Width ``<= max(d, 5N + 13)``, depth ``<= 64 d L + 3`` approximant of ``f``."""
    if N < 1 or L < 1:
        raise ValueError("N and L must be positive")
    Nt, Lt = reparameterize(N, L)
    net, inner = build_theorem2(f, Nt, Lt, guard_bits)
    max_w, max_d = theorem1_size(f.dim, N, L)
    if inner.width > max_w or inner.depth > max_d:
        raise AssertionError(f"size {inner.width}x{inner.depth} exceeds budget {max_w}x{max_d}")
    bound = bound_theorem1(f.modulus, f.dim, N, L, guard_bits,
                           omega_sqrt_d=inner.omega.to_fraction(), slack=inner.eps_guard.to_fraction())
    cert = replace(inner, theorem=1, N=N, L=L, N_tilde=Nt, L_tilde=Lt, error_bound=bound,
                   inner_error_bound=inner.error_bound)
    return net, cert


def _power_of_two_exponent(M: Dyadic) -> int:
    if M <= 0 or M.mantissa != 1:
        raise ValueError(f"M = {M} must be a power of two so that 1/(2M) stays dyadic")
    return M.exponent


def wrap_domain(f: TargetFunction, M, N: int, L: int, theorem: int = 1,
                guard_bits: int = DEFAULT_GUARD_BITS) -> tuple[Network, Certificate]:
    """Approximate ``f`` on ``[-M, M]^d`` through the unit-cube build.

    ``f.enclose`` takes points of ``[-M, M]^d`` and ``f.modulus`` is the
    modulus there.  The returned network takes ``y`` in ``[-M, M]^d``.
    """
    from .dyadic import as_dyadic

    M = as_dyadic(M)
    e = _power_of_two_exponent(M)
    Mq = M.to_fraction()
    d = f.dim

    def enclose(x, prec):
        return f.enclose(tuple(2 * Mq * (v - Fraction(1, 2)) for v in x), prec)

    pulled = TargetFunction(d, f.modulus.scaled(2 * Mq), enclose, f.name, f.params)
    builder = build_theorem1 if theorem == 1 else build_theorem2
    net, cert = builder(pulled, N, L, guard_bits)
    half = Dyadic(1, -1)
    inv = Dyadic(1, -(e + 1))
    pre = Affine(tuple(tuple(inv if i == j else ZERO for j in range(d)) for i in range(d)),
                 (half,) * d, d)
    wrapped = affine_wrap(net, pre=pre)
    return wrapped, replace(cert, domain_M=M, modulus=f.modulus)

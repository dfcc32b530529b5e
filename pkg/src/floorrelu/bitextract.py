"""Bit-extraction gadgets built from Floor and ReLU neurons.

Four builders, each returning a plain `Network`:

* `build_gate` -- the clamp ``g(x) = relu(relu(x) - relu((x + delta - 1) / delta))``
* `build_block_extractor` -- reads the n-th J-bit block of ``bin 0.b1...b_{NJ}``
* `build_bit_locator` -- reads bit m of ``bin 0.b1...b_{N^L}`` (returns ``b_m / 2``)
* `build_point_fitter` -- memorizes N^L bits at the integer inputs 1..N^L

All weights except the single data constant of the point fitter are
independent of the bits being extracted.
"""
from __future__ import annotations

import math
from functools import lru_cache
from typing import Sequence, Union

from .dyadic import ONE, ZERO, BitString, Dyadic, as_dyadic
from .network import (
    ActivationKind,
    Affine,
    Layer,
    Network,
    compose_serial,
    affine_wrap,
    identity_affine,
    with_passthrough,
)

__all__ = [
    "build_gate",
    "build_block_extractor",
    "build_bit_locator",
    "build_point_fitter",
    "oracle_extract",
    "index_split_weight",
    "extract_block",
    "locate_bit",
]

RELU = ActivationKind.RELU
FLOOR = ActivationKind.FLOOR


def _d(x) -> Dyadic:
    return as_dyadic(x)


def _pow2(k: int) -> Dyadic:
    return Dyadic(1, k)


def build_gate(J: int) -> Network:
    """Width-2, depth-2 ReLU network for the clamp gate with ``delta = 2**-J``.

    ``g`` is the identity on ``[0, 1 - delta]``, zero outside ``(0, 1)`` and
    linear in between.
    """
    if J < 1:
        raise ValueError("J must be >= 1")
    inv_delta = _pow2(J)
    first = Layer(((ONE,), (inv_delta,)), (ZERO, ONE - inv_delta), (RELU, RELU))
    second = Layer(((ONE, -ONE),), (ZERO,), (RELU,))
    return Network(1, (first, second), identity_affine(1))


@lru_cache(maxsize=None)
def build_block_extractor(N: int, J: int) -> Network:
    """Network ``(s, n) -> s_n`` with width 2N and depth 4.

    For ``s = bin 0.b1...b_{NJ}`` and ``n`` in ``1..N`` the output is the
    block ``bin 0.b_{(n-1)J+1}...b_{nJ}``, using
    ``s_k = floor(2^{kJ} s) / 2^J - floor(2^{(k-1)J} s)`` and the selection
    ``s_n = sum_k g(s_k + k - n)``.  Inputs outside that domain give
    unspecified results.
    """
    if N < 1 or J < 1:
        raise ValueError("N and J must be >= 1")
    # layer 1: condition both inputs (both are nonnegative on the domain)
    l1 = Layer(((ONE, ZERO), (ZERO, ONE)), (ZERO, ZERO), (RELU, RELU), (True, True))
    # layer 2: t_k = floor(2^{kJ} s), k = 1..N, plus the carried index n
    rows = [(_pow2(k * J), ZERO) for k in range(1, N + 1)] + [(ZERO, ONE)]
    l2 = Layer(tuple(rows), (ZERO,) * (N + 1), (FLOOR,) * N + (RELU,), (False,) * N + (True,))
    # layer 3: both gate halves applied to y_k = t_k / 2^J - t_{k-1} + k - n
    # (t_0 = floor(s) = 0 because s < 1)
    inv_delta = _pow2(J)
    w3, b3 = [], []
    for k in range(1, N + 1):
        y = [ZERO] * (N + 1)
        y[k - 1] = _pow2(-J)
        if k >= 2:
            y[k - 2] = -ONE
        y[N] = -ONE
        bias = Dyadic(k)
        w3.append(tuple(y))
        b3.append(bias)
        w3.append(tuple(inv_delta * v for v in y))
        b3.append(inv_delta * bias + ONE - inv_delta)
    l3 = Layer(tuple(w3), tuple(b3), (RELU,) * (2 * N))
    # layer 4: g_k = relu(a_k - c_k)
    w4 = []
    for k in range(N):
        row = [ZERO] * (2 * N)
        row[2 * k] = ONE
        row[2 * k + 1] = -ONE
        w4.append(tuple(row))
    l4 = Layer(tuple(w4), (ZERO,) * N, (RELU,) * N)
    out = Affine(((ONE,) * N,), (ZERO,), N)
    return Network(2, (l1, l2, l3, l4), out)


def index_split_weight(N: int, k: int) -> Dyadic:
    """Dyadic stand-in for ``1 / N**k`` when splitting ``m - 1`` by ``N**k``.

    For integers ``0 <= t < N**(k+1)`` we need ``floor(t * w) == t // N**k``.
    With ``w >= 1/N^k`` and ``w - 1/N^k < 1/N^(2k+1)`` this holds, because
    ``t / N^k`` sits at least ``1/N^k`` below the next integer and the
    overshoot is ``t * (w - 1/N^k) < 1/N^k``.
    """
    base = N ** k
    if base & (base - 1) == 0:
        return Dyadic(1, -(base.bit_length() - 1))
    bits = math.ceil((2 * k + 1) * math.log2(N)) + 2
    return Dyadic(-((-(1 << bits)) // base), -bits)


def _locator_step_prep(N: int, k: int) -> Network:
    """(s, m) -> (s, n, m, n) with ``n = floor((m - 1) / N^k) + 1``; depth 2."""
    l1 = Layer(((ONE, ZERO), (ZERO, ONE)), (ZERO, ZERO), (RELU, RELU), (True, True))
    w = index_split_weight(N, k)
    l2 = Layer(((ONE, ZERO), (ZERO, w), (ZERO, ONE)),
               (ZERO, -w, ZERO),
               (RELU, FLOOR, RELU),
               (True, False, True))
    out = Affine(((ONE, ZERO, ZERO), (ZERO, ONE, ZERO), (ZERO, ZERO, ONE), (ZERO, ONE, ZERO)),
                 (ZERO, ONE, ZERO, ONE), 3)
    return Network(2, (l1, l2), out)


def _locator_step_join(N: int, k: int) -> Network:
    """(s', m, n) -> (s', j) with ``j = m - (n - 1) N^k``; depth 1."""
    base = Dyadic(N ** k)
    l1 = Layer(((ONE, ZERO, ZERO), (ZERO, ONE, -base)), (ZERO, base), (RELU, RELU), (True, True))
    return Network(3, (l1,), identity_affine(2))


@lru_cache(maxsize=None)
def build_bit_locator(N: int, L: int) -> Network:
    """Network ``(s, m) -> b_m / 2`` for ``s = bin 0.b1...b_{N^L}``.

    Width at most 2N+2, depth exactly 7L-3.  Level ``k+1`` splits
    ``m = (n-1) N^k + j``, extracts block ``n`` (of ``N^k`` bits) with the
    block extractor while carrying ``m`` and ``n``, forms ``j`` and hands
    ``(block, j)`` to level ``k``.
    """
    if N < 1 or L < 1:
        raise ValueError("N and L must be >= 1")
    if L == 1:
        return build_block_extractor(N, 1)
    k = L - 1
    return compose_serial(
        _locator_step_prep(N, k),
        with_passthrough(build_block_extractor(N, N ** k), 2),
        _locator_step_join(N, k),
        build_bit_locator(N, k),
    )


def build_point_fitter(N: int, L: int, bits: Union[BitString, str, Sequence[int]]) -> Network:
    """One-input network with ``phi(m) = bits[m-1]`` for ``m = 1..N^L``.

    Width at most 2N+2, depth exactly 7L-2.  The bits enter only through
    one bias, the dyadic ``bin 0.b1...b_{N^L}``.
    """
    if not isinstance(bits, BitString):
        bits = BitString.from_str(bits) if isinstance(bits, str) else BitString(tuple(bits))
    if len(bits) != N ** L:
        raise ValueError(f"expected {N ** L} bits, got {len(bits)}")
    head = Layer(((ZERO,), (ONE,)), (bits.value(), ZERO), (RELU, RELU), (True, True))
    head_net = Network(1, (head,), identity_affine(2))
    net = compose_serial(head_net, build_bit_locator(N, L))
    return affine_wrap(net, post=Affine(((Dyadic(2),),), (ZERO,), 1))


def oracle_extract(bits: Union[BitString, str], a: int, b: int) -> BitString:
    """Bits ``a..b`` (1-based, inclusive), by plain slicing."""
    if isinstance(bits, str):
        bits = BitString.from_str(bits)
    if not 1 <= a <= b <= len(bits):
        raise IndexError(f"slice {a}..{b} out of range for {len(bits)} bits")
    return BitString(bits.bits[a - 1:b])


# -- validated entry points -------------------------------------------


def extract_block(bits: Union[BitString, str], n: int, N: int, J: int) -> Dyadic:
    """Evaluate the block extractor after checking the input domain."""
    if isinstance(bits, str):
        bits = BitString.from_str(bits)
    if len(bits) != N * J:
        raise ValueError(f"need exactly {N * J} bits, got {len(bits)}")
    if not 1 <= n <= N:
        raise ValueError(f"block index {n} outside 1..{N}")
    net = build_block_extractor(N, J)
    return net(bits.value(), n)[0]


def locate_bit(bits: Union[BitString, str], m: int, N: int, L: int) -> Dyadic:
    """Evaluate the bit locator (returns ``b_m / 2``) after checking the domain."""
    if isinstance(bits, str):
        bits = BitString.from_str(bits)
    if len(bits) != N ** L:
        raise ValueError(f"need exactly {N ** L} bits, got {len(bits)}")
    if not 1 <= m <= N ** L:
        raise ValueError(f"bit index {m} outside 1..{N ** L}")
    net = build_bit_locator(N, L)
    return net(bits.value(), m)[0]

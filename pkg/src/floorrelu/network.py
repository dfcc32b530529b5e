"""Floor-ReLU network IR: layers, exact/float evaluation and combinators.

A network is a list of hidden layers followed by an affine output map.
Each hidden neuron applies ReLU or Floor, nothing else.  Identity
"passthrough" channels are ReLU neurons whose pre-activation is asserted
nonnegative; `eval_exact` checks that obligation on every call.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence

from .dyadic import ONE, ZERO, Dyadic, as_dyadic

__all__ = [
    "ActivationKind",
    "Layer",
    "Network",
    "AuditReport",
    "DimensionError",
    "ObligationError",
    "Affine",
    "eval_exact",
    "eval_float",
    "trace_exact",
    "trace_float",
    "compose_serial",
    "stack_parallel",
    "with_passthrough",
    "pad_depth",
    "audit",
    "affine_wrap",
    "identity_affine",
    "identity_network",
]


class DimensionError(ValueError):
    pass


class ObligationError(RuntimeError):
    """A passthrough neuron saw a negative pre-activation (builder bug)."""

    def __init__(self, layer: int, neuron: int, value: Dyadic):
        super().__init__(f"nonneg obligation violated at layer {layer}, neuron {neuron}: {value}")
        self.layer = layer
        self.neuron = neuron
        self.value = value


class ActivationKind(str, enum.Enum):
    RELU = "relu"
    FLOOR = "floor"


Matrix = tuple[tuple[Dyadic, ...], ...]
Vector = tuple[Dyadic, ...]


def _matrix(rows) -> Matrix:
    return tuple(tuple(as_dyadic(w) for w in row) for row in rows)


def _vector(vals) -> Vector:
    return tuple(as_dyadic(v) for v in vals)


@dataclass(frozen=True)
class Affine:
    """``x -> weights @ x + bias``."""

    weights: Matrix
    bias: Vector
    in_dim: int = field(default=-1)

    def __post_init__(self):
        w = _matrix(self.weights)
        b = _vector(self.bias)
        if len(w) != len(b):
            raise DimensionError(f"affine map has {len(w)} rows but {len(b)} biases")
        widths = {len(r) for r in w}
        if len(widths) > 1:
            raise DimensionError("ragged weight matrix")
        in_dim = widths.pop() if widths else self.in_dim
        if self.in_dim >= 0 and in_dim != self.in_dim:
            raise DimensionError(f"declared in_dim {self.in_dim} but rows have {in_dim}")
        if in_dim < 0:
            raise DimensionError("cannot infer in_dim of an affine map with no rows")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", b)
        object.__setattr__(self, "in_dim", in_dim)

    @property
    def out_dim(self) -> int:
        return len(self.bias)

    def apply(self, x: Sequence[Dyadic]) -> list[Dyadic]:
        if len(x) != self.in_dim:
            raise DimensionError(f"affine map expects {self.in_dim} inputs, got {len(x)}")
        out = []
        for row, b in zip(self.weights, self.bias):
            acc = b
            for w, v in zip(row, x):
                if w.mantissa and v.mantissa:
                    acc = acc + w * v
            out.append(acc)
        return out

    def then(self, other: "Affine") -> "Affine":
        """The map ``other(self(x))``."""
        if other.in_dim != self.out_dim:
            raise DimensionError(f"cannot chain {self.out_dim} outputs into {other.in_dim} inputs")
        return Affine(_matmul(other.weights, self.weights, self.in_dim),
                      _matvec_add(other.weights, self.bias, other.bias),
                      self.in_dim)


def identity_affine(n: int) -> Affine:
    return Affine(tuple(tuple(ONE if i == j else ZERO for j in range(n)) for i in range(n)),
                  (ZERO,) * n, n)


def _matmul(a: Matrix, b: Matrix, inner_in: int) -> Matrix:
    # (a @ b) where b has inner_in columns
    cols = list(zip(*b)) if b else [()] * inner_in
    out = []
    for row in a:
        new_row = []
        for col in cols:
            acc = ZERO
            for x, y in zip(row, col):
                if x.mantissa and y.mantissa:
                    acc = acc + x * y
            new_row.append(acc)
        out.append(tuple(new_row))
    return tuple(out)


def _matvec_add(a: Matrix, v: Vector, b: Vector) -> Vector:
    out = []
    for row, bias in zip(a, b):
        acc = bias
        for x, y in zip(row, v):
            if x.mantissa and y.mantissa:
                acc = acc + x * y
        out.append(acc)
    return tuple(out)


@dataclass(frozen=True)
class Layer:
    """One hidden layer: ``act(W @ x + b)`` with a per-neuron activation."""

    weights: Matrix
    bias: Vector
    activations: tuple[ActivationKind, ...]
    nonneg: tuple[bool, ...] = ()
    in_dim: int = -1

    def __post_init__(self):
        w = _matrix(self.weights)
        b = _vector(self.bias)
        acts = tuple(ActivationKind(a) for a in self.activations)
        nonneg = tuple(bool(x) for x in self.nonneg) if self.nonneg else (False,) * len(b)
        n = len(b)
        if not (len(w) == len(acts) == len(nonneg) == n):
            raise DimensionError("layer vectors must all have length out_dim")
        widths = {len(r) for r in w}
        if len(widths) > 1:
            raise DimensionError("ragged weight matrix")
        in_dim = widths.pop() if widths else self.in_dim
        if self.in_dim >= 0 and in_dim != self.in_dim:
            raise DimensionError(f"declared in_dim {self.in_dim} but rows have {in_dim}")
        if in_dim < 0:
            raise DimensionError("a layer needs at least one neuron or an explicit in_dim")
        for a, flag in zip(acts, nonneg):
            if flag and a is not ActivationKind.RELU:
                raise ValueError("nonneg obligations only apply to ReLU neurons")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", b)
        object.__setattr__(self, "activations", acts)
        object.__setattr__(self, "nonneg", nonneg)
        object.__setattr__(self, "in_dim", in_dim)

    @property
    def out_dim(self) -> int:
        return len(self.bias)

    @property
    def affine(self) -> Affine:
        return Affine(self.weights, self.bias, self.in_dim)

    @classmethod
    def from_affine(cls, aff: Affine, activations, nonneg=()) -> "Layer":
        return cls(aff.weights, aff.bias, tuple(activations), tuple(nonneg), aff.in_dim)

    @cached_property
    def _rows(self):
        # sparse view used by the evaluators: (bias, [(col, w)], act, nonneg)
        rows = []
        for row, b, a, nn in zip(self.weights, self.bias, self.activations, self.nonneg):
            terms = tuple((j, w) for j, w in enumerate(row) if w.mantissa)
            rows.append((b, terms, a is ActivationKind.FLOOR, nn))
        return tuple(rows)

    @cached_property
    def _float_rows(self):
        return tuple((float(b), tuple((j, float(w)) for j, w in terms), is_floor)
                     for b, terms, is_floor, _ in self._rows)


@dataclass(frozen=True)
class Network:
    input_dim: int
    hidden_layers: tuple[Layer, ...]
    output: Affine

    def __post_init__(self):
        layers = tuple(self.hidden_layers)
        object.__setattr__(self, "hidden_layers", layers)
        if self.input_dim < 1:
            raise DimensionError("input_dim must be positive")
        prev = self.input_dim
        for k, layer in enumerate(layers):
            if layer.in_dim != prev:
                raise DimensionError(f"layer {k} expects {layer.in_dim} inputs but receives {prev}")
            prev = layer.out_dim
        if self.output.in_dim != prev:
            raise DimensionError(f"output map expects {self.output.in_dim} inputs but receives {prev}")

    @property
    def output_dim(self) -> int:
        return self.output.out_dim

    def width(self) -> int:
        return max((l.out_dim for l in self.hidden_layers), default=0)

    def depth(self) -> int:
        return len(self.hidden_layers)

    def __call__(self, *x):
        return eval_exact(self, [as_dyadic(v) for v in x])


@dataclass(frozen=True)
class AuditReport:
    width: int
    depth: int
    nonzero_params: int

    def as_dict(self) -> dict:
        return {"width": self.width, "depth": self.depth, "nonzero_params": self.nonzero_params}


def identity_network(n: int) -> Network:
    return Network(n, (), identity_affine(n))


# -- evaluation -------------------------------------------------------


def _check_input(net: Network, x) -> None:
    if len(x) != net.input_dim:
        raise DimensionError(f"network expects {net.input_dim} inputs, got {len(x)}")


def _layer_exact(layer: Layer, x: Sequence[Dyadic], index: int) -> list[Dyadic]:
    out = []
    for n, (b, terms, is_floor, nn) in enumerate(layer._rows):
        acc = b
        for j, w in terms:
            v = x[j]
            if v.mantissa:
                acc = acc + w * v
        if is_floor:
            out.append(acc.floor())
        elif acc.mantissa >= 0:
            out.append(acc)
        else:
            if nn:
                raise ObligationError(index, n, acc)
            out.append(ZERO)
    return out


def trace_exact(net: Network, x: Sequence[Dyadic]) -> list[list[Dyadic]]:
    """Post-activation values of every hidden layer, then the output."""
    _check_input(net, x)
    h = list(x)
    trace = []
    for k, layer in enumerate(net.hidden_layers):
        h = _layer_exact(layer, h, k)
        trace.append(h)
    trace.append(net.output.apply(h))
    return trace


def eval_exact(net: Network, x: Sequence[Dyadic]) -> list[Dyadic]:
    _check_input(net, x)
    h = list(x)
    for k, layer in enumerate(net.hidden_layers):
        h = _layer_exact(layer, h, k)
    return net.output.apply(h)


def _layer_float(layer: Layer, x: Sequence[float]) -> list[float]:
    out = []
    for b, terms, is_floor in layer._float_rows:
        acc = b
        for j, w in terms:
            acc += w * x[j]
        if is_floor:
            out.append(float(math.floor(acc)) if math.isfinite(acc) else acc)
        else:
            out.append(acc if acc > 0 or math.isnan(acc) else 0.0)
    return out


def trace_float(net: Network, x: Sequence[float]) -> list[list[float]]:
    _check_input(net, x)
    h = [float(v) for v in x]
    trace = []
    for layer in net.hidden_layers:
        h = _layer_float(layer, h)
        trace.append(h)
    out = [sum((float(w) * v for w, v in zip(row, h)), float(b))
           for row, b in zip(net.output.weights, net.output.bias)]
    trace.append(out)
    return trace


def eval_float(net: Network, x: Sequence[float]) -> list[float]:
    """binary64 forward pass; diagnostic only, no exactness guarantee."""
    out = trace_float(net, x)[-1]
    if any(math.isnan(v) for v in out):
        warnings.warn("NaN in float evaluation output", RuntimeWarning, stacklevel=2)
    return out


# -- combinators ------------------------------------------------------


def audit(net: Network) -> AuditReport:
    count = 0
    for layer in net.hidden_layers:
        count += sum(1 for row in layer.weights for w in row if w)
        count += sum(1 for b in layer.bias if b)
    count += sum(1 for row in net.output.weights for w in row if w)
    count += sum(1 for b in net.output.bias if b)
    return AuditReport(net.width(), net.depth(), count)


def _fuse_into_first(net: Network, pre: Affine) -> tuple[tuple[Layer, ...], Affine]:
    """Precompose ``pre`` into the first layer (or output map when depth is 0)."""
    if net.hidden_layers:
        first = net.hidden_layers[0]
        fused = Layer.from_affine(pre.then(first.affine), first.activations, first.nonneg)
        return (fused,) + net.hidden_layers[1:], net.output
    return (), pre.then(net.output)


def compose_serial(first: Network, second: Network, *rest: Network) -> Network:
    """Network computing ``second(first(x))``; depths add, nothing is inserted."""
    if rest:
        return compose_serial(compose_serial(first, second), *rest)
    if first.output_dim != second.input_dim:
        raise DimensionError(f"cannot feed {first.output_dim} outputs into {second.input_dim} inputs")
    layers, out = _fuse_into_first(second, first.output)
    return Network(first.input_dim, first.hidden_layers + layers, out)


def affine_wrap(net: Network, pre: Optional[Affine] = None, post: Optional[Affine] = None) -> Network:
    """``post(net(pre(x)))`` with both maps fused; depth is unchanged."""
    input_dim = net.input_dim
    layers, out = net.hidden_layers, net.output
    if pre is not None:
        if pre.out_dim != net.input_dim:
            raise DimensionError(f"pre map yields {pre.out_dim} values, network takes {net.input_dim}")
        layers, out = _fuse_into_first(net, pre)
        input_dim = pre.in_dim
    if post is not None:
        if post.in_dim != out.out_dim:
            raise DimensionError(f"post map takes {post.in_dim} values, network yields {out.out_dim}")
        out = out.then(post)
    return Network(input_dim, layers, out)


def _passthrough_layer(n: int) -> Layer:
    ident = identity_affine(n)
    return Layer.from_affine(ident, (ActivationKind.RELU,) * n, (True,) * n)


def pad_depth(net: Network, depth: int) -> Network:
    """Append nonneg ReLU passthrough layers until ``net`` has ``depth`` layers.

    The carried values must be nonnegative at run time; if not, evaluation
    raises `ObligationError` instead of silently clamping.
    """
    missing = depth - net.depth()
    if missing < 0:
        raise ValueError(f"network already has depth {net.depth()} > {depth}")
    if missing == 0:
        return net
    if net.depth() == 0:
        # carry the affine output itself
        first = Layer.from_affine(net.output, (ActivationKind.RELU,) * net.output_dim,
                                  (True,) * net.output_dim)
        layers = (first,) + tuple(_passthrough_layer(net.output_dim) for _ in range(missing - 1))
        return Network(net.input_dim, layers, identity_affine(net.output_dim))
    last = net.hidden_layers[-1].out_dim
    layers = net.hidden_layers + tuple(_passthrough_layer(last) for _ in range(missing))
    return Network(net.input_dim, layers, net.output)


def _block_diag(blocks: Sequence[Matrix], dims: Sequence[tuple[int, int]]) -> Matrix:
    total_in = sum(i for _, i in dims)
    rows = []
    offset = 0
    for block, (out_d, in_d) in zip(blocks, dims):
        for r in block:
            rows.append((ZERO,) * offset + tuple(r) + (ZERO,) * (total_in - offset - in_d))
        offset += in_d
    return tuple(rows)


def stack_parallel(nets: Sequence[Network]) -> Network:
    """Block-diagonal stack: inputs and outputs are concatenated, widths add.

    Shallower members are padded with passthrough layers (see `pad_depth`).
    """
    nets = list(nets)
    if not nets:
        raise ValueError("stack_parallel needs at least one network")
    if len(nets) == 1:
        return nets[0]
    depth = max(n.depth() for n in nets)
    nets = [pad_depth(n, depth) for n in nets]
    layers = []
    for k in range(depth):
        parts = [n.hidden_layers[k] for n in nets]
        w = _block_diag([p.weights for p in parts], [(p.out_dim, p.in_dim) for p in parts])
        layers.append(Layer(w,
                            tuple(b for p in parts for b in p.bias),
                            tuple(a for p in parts for a in p.activations),
                            tuple(f for p in parts for f in p.nonneg),
                            sum(p.in_dim for p in parts)))
    outs = [n.output for n in nets]
    out_w = _block_diag([o.weights for o in outs], [(o.out_dim, o.in_dim) for o in outs])
    out = Affine(out_w, tuple(b for o in outs for b in o.bias), sum(o.in_dim for o in outs))
    return Network(sum(n.input_dim for n in nets), tuple(layers), out)


def with_passthrough(net: Network, carried: int) -> Network:
    """Append ``carried`` identity channels to the inputs and outputs of ``net``.

    Each channel is one ReLU neuron per hidden layer with a nonneg
    obligation, so the width grows by exactly ``carried``.
    """
    if carried < 0:
        raise ValueError("carried must be nonnegative")
    if carried == 0:
        return net
    carry = Network(carried, tuple(_passthrough_layer(carried) for _ in range(net.depth())),
                    identity_affine(carried))
    return stack_parallel([net, carry])


import pytest
from hypothesis import given, strategies as st

from floorrelu.dyadic import ONE, ZERO, Dyadic
from floorrelu.network import (
    ActivationKind,
    Affine,
    DimensionError,
    Layer,
    Network,
    ObligationError,
    affine_wrap,
    audit,
    compose_serial,
    eval_exact,
    eval_float,
    identity_affine,
    identity_network,
    stack_parallel,
    trace_exact,
    with_passthrough,
)
from oracles import frac, ref_eval

RELU, FLOOR = ActivationKind.RELU, ActivationKind.FLOOR

small = st.builds(Dyadic, st.integers(-64, 64), st.integers(-4, 1))


@st.composite
def networks(draw, input_dim=None):
    d = input_dim or draw(st.integers(1, 3))
    depth = draw(st.integers(0, 3))
    layers, prev = [], d
    for _ in range(depth):
        width = draw(st.integers(1, 4))
        w = tuple(tuple(draw(small) for _ in range(prev)) for _ in range(width))
        b = tuple(draw(small) for _ in range(width))
        acts = tuple(draw(st.sampled_from([RELU, FLOOR])) for _ in range(width))
        layers.append(Layer(w, b, acts))
        prev = width
    out_dim = draw(st.integers(1, 2))
    out = Affine(tuple(tuple(draw(small) for _ in range(prev)) for _ in range(out_dim)),
                 tuple(draw(small) for _ in range(out_dim)), prev)
    return Network(d, tuple(layers), out)


def inputs(d):
    return st.lists(st.builds(Dyadic, st.integers(-256, 256), st.integers(-6, 0)), min_size=d, max_size=d)


def test_single_neuron_examples():
    floor_net = Network(1, (Layer(((ONE,),), (ZERO,), (FLOOR,)),), identity_affine(1))
    assert floor_net(Dyadic(7, -2)) == [Dyadic(1)]
    relu_net = Network(1, (Layer(((-ONE,),), (ZERO,), (RELU,)),), identity_affine(1))
    assert relu_net(1) == [ZERO]
    affine_only = Network(1, (), Affine(((Dyadic(2),),), (Dyadic(3),)))
    assert affine_only(5) == [Dyadic(13)]
    assert audit(affine_only).depth == 0


def test_float_backend_examples():
    assert eval_float(identity_network(1), [0.5]) == [0.5]
    floor_net = Network(1, (Layer(((ONE,),), (ZERO,), (FLOOR,)),), identity_affine(1))
    x = ONE - Dyadic(1, -60)
    assert eval_exact(floor_net, [x]) == [ZERO]
    assert eval_float(floor_net, [float(x)]) == [1.0]  # 1 - 2^-60 rounds to 1.0


def test_nan_is_reported():
    with pytest.warns(RuntimeWarning):
        eval_float(identity_network(1), [float("nan")])


def test_audit_two_layer_example():
    # five neurons then three, both activations present
    w1 = tuple((Dyadic(k + 1), ZERO) for k in range(5))
    l1 = Layer(w1, (ZERO,) * 5, (RELU, FLOOR, RELU, FLOOR, RELU))
    l2 = Layer(tuple(tuple(ONE for _ in range(5)) for _ in range(3)), (ONE, ZERO, ZERO), (RELU,) * 3)
    net = Network(2, (l1, l2), Affine(((ONE, ONE, ONE),), (ZERO,)))
    rep = audit(net)
    assert (rep.width, rep.depth) == (5, 2)
    assert rep.nonzero_params == 5 + 15 + 1 + 3


def test_dimension_checks():
    with pytest.raises(DimensionError):
        Network(2, (Layer(((ONE,),), (ZERO,), (RELU,)),), identity_affine(1))
    with pytest.raises(DimensionError):
        eval_exact(identity_network(2), [ONE])
    with pytest.raises(DimensionError):
        compose_serial(identity_network(2), identity_network(3))
    with pytest.raises(ValueError):
        Layer(((ONE,),), (ZERO,), (FLOOR,), (True,))


def test_only_two_activation_kinds():
    assert {a.value for a in ActivationKind} == {"relu", "floor"}
    with pytest.raises(ValueError):
        Layer(((ONE,),), (ZERO,), ("tanh",))


@given(networks(), st.data())
def test_exact_evaluation_matches_reference(net, data):
    x = data.draw(inputs(net.input_dim))
    got = eval_exact(net, x)
    assert [frac(v) for v in got] == ref_eval(net, [frac(v) for v in x])
    assert eval_exact(net, x) == got


@given(networks(input_dim=2), st.data())
def test_compose_serial_is_staged_evaluation(a, data):
    b2 = data.draw(networks(input_dim=a.output_dim))
    net = compose_serial(a, b2)
    assert audit(net).depth == audit(a).depth + audit(b2).depth
    for _ in range(5):
        x = data.draw(inputs(2))
        assert eval_exact(net, x) == eval_exact(b2, eval_exact(a, x))


@given(st.lists(networks(), min_size=1, max_size=3), st.data())
def test_stack_parallel_concatenates(nets, data):
    # passthrough padding needs nonnegative carries; make outputs nonnegative via ReLU heads
    heads = [compose_serial(n, Network(n.output_dim, (Layer(identity_affine(n.output_dim).weights,
                                                             (ZERO,) * n.output_dim,
                                                             (RELU,) * n.output_dim),),
                                        identity_affine(n.output_dim))) for n in nets]
    net = stack_parallel(heads)
    assert max(audit(h).width for h in heads) <= audit(net).width <= sum(audit(h).width for h in heads)
    xs = [data.draw(inputs(h.input_dim)) for h in heads]
    flat = [v for x in xs for v in x]
    want = [v for h, x in zip(heads, xs) for v in eval_exact(h, x)]
    assert eval_exact(net, flat) == want


def test_stack_widths_add_at_equal_depth():
    a = Network(1, (Layer(((ONE,),) * 3, (ZERO,) * 3, (RELU,) * 3),), Affine(((ONE,) * 3,), (ZERO,)))
    b = Network(1, (Layer(((ONE,),) * 4, (ZERO,) * 4, (FLOOR,) * 4),), Affine(((ONE,) * 4,), (ZERO,)))
    s = stack_parallel([a, b])
    assert audit(s).width == 7
    assert stack_parallel([a]) is a


@given(networks(input_dim=2), st.data())
def test_affine_wrap_fuses(net, data):
    pre = Affine(((Dyadic(1, -1), ONE), (ZERO, Dyadic(-3))), (Dyadic(1, -2), ONE))
    post = Affine(tuple((Dyadic(3),) + (ZERO,) * (net.output_dim - 1) for _ in range(1)), (Dyadic(-1),))
    wrapped = affine_wrap(net, pre, post)
    assert audit(wrapped).depth == audit(net).depth
    x = data.draw(inputs(2))
    assert eval_exact(wrapped, x) == post.apply(eval_exact(net, pre.apply(x)))
    assert eval_exact(affine_wrap(net, identity_affine(2), identity_affine(net.output_dim)), x) == eval_exact(net, x)


def test_domain_pre_map_example():
    M = Dyadic(2)
    pre = Affine(((Dyadic(1, -2),),), (Dyadic(1, -1),))  # (y + M) / (2M)
    assert pre.apply([M]) == [ONE]


def test_passthrough_carries_values_and_checks_sign():
    base = Network(1, (Layer(((ONE,),), (ZERO,), (FLOOR,)),) * 1, identity_affine(1))
    deep = compose_serial(base, base, base)
    carried = with_passthrough(deep, 1)
    assert audit(carried).width == audit(deep).width + 1
    assert carried(Dyadic(5, -1), ZERO) == [Dyadic(2), ZERO]
    for m in range(1, 9):
        assert carried(ONE, m)[1] == Dyadic(m)
    with pytest.raises(ObligationError):
        carried(ONE, -1)


def test_trace_has_one_entry_per_layer_plus_output():
    net = Network(1, (Layer(((ONE,),), (ZERO,), (RELU,)),) * 2, identity_affine(1))
    assert len(trace_exact(net, [ONE])) == 3


def test_empty_width_layer_rejected_without_in_dim():
    with pytest.raises(DimensionError):
        Layer((), (), ())
    assert Layer((), (), (), in_dim=2).out_dim == 0

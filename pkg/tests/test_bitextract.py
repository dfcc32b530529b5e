import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from floorrelu.bitextract import (
    build_bit_locator,
    build_block_extractor,
    build_gate,
    build_point_fitter,
    extract_block,
    index_split_weight,
    locate_bit,
    oracle_extract,
)
from floorrelu.dyadic import BitString, Dyadic, ZERO
from floorrelu.network import audit, eval_exact
from oracles import bits_of, bits_value, frac


def gate_formula(x: Fraction, J: int) -> Fraction:
    delta = Fraction(1, 2 ** J)
    relu = lambda t: max(t, Fraction(0))
    return relu(relu(x) - relu((x + delta - 1) / delta))


@pytest.mark.parametrize("x,want", [(Fraction(1, 2), Fraction(1, 2)), (Fraction(-1), 0), (Fraction(1), 0),
                                    (Fraction(7, 8), Fraction(3, 8))])
def test_gate_examples(x, want):
    net = build_gate(2)
    assert frac(net(Dyadic.from_fraction(x))[0]) == want
    assert (audit(net).width, audit(net).depth) == (2, 2)


@given(st.integers(1, 8), st.integers(-2000, 2000))
def test_gate_matches_formula(J, k):
    x = Fraction(k, 512)
    assert frac(build_gate(J)(Dyadic.from_fraction(x))[0]) == gate_formula(x, J)


def test_block_extractor_examples():
    net = build_block_extractor(2, 2)
    s = Dyadic(13, -4)
    assert net(s, 1) == [Dyadic(3, -2)]
    assert net(s, 2) == [Dyadic(1, -2)]
    assert all(net(ZERO, n) == [ZERO] for n in (1, 2))


@pytest.mark.parametrize("N", [1, 2, 3])
@pytest.mark.parametrize("J", [1, 2, 3])
def test_block_extractor_exhaustive(N, J):
    net = build_block_extractor(N, J)
    rep = audit(net)
    assert rep.width <= 2 * N and rep.depth == 4
    for v in range(2 ** (N * J)):
        bits = bits_of(v, N * J)
        s = Dyadic.from_fraction(bits_value(bits))
        for n in range(1, N + 1):
            want = bits_value(bits[(n - 1) * J:n * J])
            assert frac(eval_exact(net, [s, Dyadic(n)])[0]) == want


@given(st.integers(2, 4), st.integers(1, 6), st.data())
def test_selection_identity_random(N, J, data):
    v = data.draw(st.integers(0, 2 ** (N * J) - 1))
    bits = BitString.from_int(v, N * J)
    for n in range(1, N + 1):
        assert extract_block(bits, n, N, J) == oracle_extract(bits, (n - 1) * J + 1, n * J).value()


def test_locator_examples():
    net = build_bit_locator(2, 2)
    s = BitString.from_str("1001").value()
    assert net(s, 1) == [Dyadic(1, -1)]
    assert net(s, 4) == [Dyadic(1, -1)]
    assert net(s, 2) == [ZERO]
    ones = BitString.from_str("1" * 9).value()
    assert all(build_bit_locator(3, 2)(ones, m) == [Dyadic(1, -1)] for m in range(1, 10))


def test_locator_base_case_is_block_extractor():
    assert build_bit_locator(3, 1) is build_block_extractor(3, 1)


@pytest.mark.parametrize("N,L", [(2, 1), (2, 2), (2, 3), (3, 2)])
def test_locator_exhaustive(N, L):
    net = build_bit_locator(N, L)
    rep = audit(net)
    assert rep.width <= 2 * N + 2 and rep.depth == 7 * L - 3
    n_bits = N ** L
    for v in range(2 ** n_bits):
        bits = bits_of(v, n_bits)
        s = Dyadic.from_fraction(bits_value(bits))
        for m in range(1, n_bits + 1):
            assert frac(eval_exact(net, [s, Dyadic(m)])[0]) == Fraction(bits[m - 1], 2)


@pytest.mark.parametrize("N,L", [(3, 3), (4, 2), (2, 4)])
def test_locator_random(N, L):
    rng = random.Random(N * 100 + L)
    net = build_bit_locator(N, L)
    n_bits = N ** L
    for _ in range(30):
        bits = bits_of(rng.getrandbits(n_bits), n_bits)
        s = Dyadic.from_fraction(bits_value(bits))
        for m in range(1, n_bits + 1):
            assert frac(eval_exact(net, [s, Dyadic(m)])[0]) == Fraction(bits[m - 1], 2)


def test_point_fitter_examples():
    net = build_point_fitter(2, 2, "1001")
    assert [net(m)[0] for m in range(1, 5)] == [Dyadic(1), ZERO, ZERO, Dyadic(1)]
    zero = build_point_fitter(2, 3, "0" * 8)
    assert all(zero(m) == [ZERO] for m in range(1, 9))
    rep = audit(build_point_fitter(2, 3, "10010110"))
    assert rep.width <= 6 and rep.depth == 19


def test_point_fitter_depends_on_bits_through_one_bias():
    a = build_point_fitter(2, 3, "10010110")
    b = build_point_fitter(2, 3, "01101011")
    diffs = []
    for k, (la, lb) in enumerate(zip(a.hidden_layers, b.hidden_layers)):
        for i, (ra, rb) in enumerate(zip(la.weights, lb.weights)):
            diffs += [("w", k, i, j) for j, (x, y) in enumerate(zip(ra, rb)) if x != y]
        diffs += [("b", k, i) for i, (x, y) in enumerate(zip(la.bias, lb.bias)) if x != y]
    assert a.output == b.output
    assert diffs == [("b", 0, 0)]
    assert a.hidden_layers[0].bias[0].frac_bits <= 8


def test_point_fitter_wrong_length():
    with pytest.raises(ValueError):
        build_point_fitter(2, 2, "101")


def test_wrappers_validate_domain():
    with pytest.raises(ValueError):
        extract_block("1101", 3, 2, 2)
    with pytest.raises(ValueError):
        locate_bit("1001", 5, 2, 2)
    assert locate_bit("1001", 4, 2, 2) == Dyadic(1, -1)


def test_oracle_extract_examples():
    assert str(oracle_extract("1101", 3, 4)) == "01"
    assert str(oracle_extract("1101", 1, 4)) == "1101"
    with pytest.raises(IndexError):
        oracle_extract("1101", 0, 2)


@given(st.integers(2, 7), st.integers(1, 4), st.data())
def test_index_split_weight(N, k, data):
    w = frac(index_split_weight(N, k))
    assert w >= Fraction(1, N ** k)
    t = data.draw(st.integers(0, N ** (k + 1) - 1))
    assert int(t * w) == t // N ** k

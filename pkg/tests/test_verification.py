from dataclasses import replace

import pytest
from hypothesis import given, settings, strategies as st

from floorrelu.bitextract import build_point_fitter
from floorrelu.constructor import build_theorem2
from floorrelu.dyadic import ONE, ZERO, BitString, Dyadic
from floorrelu.network import Affine, Layer, Network, identity_affine
from floorrelu.registry import lookup
from floorrelu.verification import (
    cell_points,
    check_certificate,
    exhaustive_bit_check,
    float_divergence_probe,
    grid_points,
    measure_sup_error,
    memorization_demo,
    merge_reports,
    random_points,
)
from oracles import frac


@pytest.fixture(scope="module")
def mean_build():
    f = lookup("mean", 1)
    net, cert = build_theorem2(f, 2, 2)
    return f, net, cert


def test_constant_network_has_zero_error():
    f = lookup("const", 2, value="3/8")
    net = Network(2, (), Affine(((ZERO, ZERO),), (Dyadic(3, -3),)))
    rep = measure_sup_error(net, f, grid=9, samples=20)
    assert rep.max_abs_error == ZERO


def test_grid_measurement_within_certificate(mean_build):
    f, net, cert = mean_build
    rep = measure_sup_error(net, f, grid=4096, bound=cert.error_bound)
    assert rep.passed and rep.max_abs_error <= Dyadic(3, -3)
    assert rep.sample_count == 4096


def test_random_sampling_is_reproducible(mean_build):
    f, net, _ = mean_build
    a = measure_sup_error(net, f, samples=300, seed=9)
    b = measure_sup_error(net, f, samples=300, seed=9)
    assert a == b and a.seed == 9
    assert random_points(2, 5, 1) == random_points(2, 5, 1)


@given(st.integers(0, 2 ** 16), st.integers(1, 40), st.integers(1, 40))
@settings(max_examples=20)
def test_merge_is_max_over_union(seed, n1, n2):
    f = lookup("min", 2)
    net = Network(2, (), Affine(((Dyadic(1, -1), Dyadic(1, -2)),), (ZERO,)))
    s1, s2 = random_points(2, n1, seed), random_points(2, n2, seed + 1)
    whole = measure_sup_error(net, f, points=s1 + s2)
    parts = merge_reports(measure_sup_error(net, f, points=s1), measure_sup_error(net, f, points=s2))
    assert parts.max_abs_error == whole.max_abs_error
    assert parts.sample_count == whole.sample_count


def test_cell_points_cover_each_cell():
    pts = cell_points(4, 2)
    cells = {tuple(min(int(frac(v) * 4), 3) for v in x) for x in pts}
    assert len(cells) == 16
    assert (ONE, ONE) in pts
    assert grid_points(1, 3) == [(ZERO,), (Dyadic(1, -1),), (ONE,)]


def test_check_certificate_passes_and_reports_residual(mean_build):
    f, net, cert = mean_build
    rep = check_certificate(net, f, cert)
    assert rep.passed
    assert rep.residual == Dyadic(1, -2)  # omega(1/4) for the identity


def test_inflated_bound_passes(mean_build):
    f, net, cert = mean_build
    assert check_certificate(net, f, replace(cert, error_bound=Dyadic(100))).passed


def test_corrupted_weight_fails(mean_build):
    f, net, cert = mean_build
    out = net.output
    bad_bias = (out.bias[0] + Dyadic(1, -1),)
    broken = Network(net.input_dim, net.hidden_layers, Affine(out.weights, bad_bias, out.in_dim))
    rep = check_certificate(broken, f, cert)
    assert not rep.passed


@pytest.mark.parametrize("level,N,param,patterns,evals", [("block", 2, 2, 16, 32), ("locator", 2, 2, 16, 64)])
def test_exhaustive_bit_check_examples(level, N, param, patterns, evals):
    s = exhaustive_bit_check(level, N, param)
    assert s.passed and s.exhaustive
    assert (s.patterns, s.evaluations) == (patterns, evals)


def test_randomized_fitter_check():
    s = exhaustive_bit_check("fitter", 3, 2, cap=256, random_count=200, seed=4)
    assert s.passed and not s.exhaustive and s.patterns == 200


def test_memorization_demo_small():
    r = memorization_demo(2, 1, seed=0)
    assert (r.points, r.depth) == (2, 5) and r.width <= 6 and r.all_exact
    r3, r6 = memorization_demo(2, 3), memorization_demo(2, 6)
    assert r6.points == r3.points ** 2 and r6.width == r3.width == 6
    assert (r3.depth, r6.depth) == (19, 40) and r6.all_exact


def test_probe_affine_only_is_clean():
    net = Network(1, (), Affine(((Dyadic(3),),), (Dyadic(1, -3),)))
    assert not float_divergence_probe(net, [(Dyadic(k, -2),) for k in range(-8, 9)]).diverged


def test_probe_floor_at_integers_agrees():
    net = Network(1, (Layer(((ONE,),), (ZERO,), ("floor",)),), identity_affine(1))
    assert not float_divergence_probe(net, [(Dyadic(k),) for k in range(-5, 6)]).diverged


def test_probe_finds_wide_constant():
    bits = BitString.from_str("1" + "0" * 52 + "1" * 11)
    net = build_point_fitter(2, 6, bits)
    rep = float_divergence_probe(net, [(Dyadic(m),) for m in range(1, 65)])
    assert rep.diverged
    assert all(1 <= d.first_layer <= 40 for d in rep.divergences)
    for d in rep.divergences:
        m = int(d.point[0])
        assert d.exact[0] == Dyadic(bits.bits[m - 1])

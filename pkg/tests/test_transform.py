import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kplane.errors import InvalidExponent, WrongArity, ZeroFunction, InvalidDims
from kplane.field import Field
from kplane.geometry import enumerate_planes, gaussian_binomial, num_planes
from kplane.transform import (
    GridFunction,
    PlaneFunction,
    endpoint_powers,
    endpoint_ratio,
    kplane_transform,
    load_function,
    lp_norm,
    lp_power,
    multilinear_norm,
)

import oracles

rationals = st.fractions(min_value=0, max_value=4, max_denominator=12)


def random_function(rng, q, d, signed=False):
    lo = -6 if signed else 0
    return GridFunction(q, d, [Fraction(int(a), int(b)) for a, b in
                               zip(rng.integers(lo, 7, q**d), rng.integers(1, 6, q**d))])


def test_constant_maps_to_constant():
    for q, d in [(2, 2), (3, 3)]:
        for k in range(d + 1):
            assert set(kplane_transform(GridFunction.constant(q, d), k).values) == {1}


def test_delta_q2_d2():
    T = kplane_transform(GridFunction.delta(2, 2), 1)
    planes = enumerate_planes(Field(2), 2, 1)
    for p, v in zip(planes, T.values):
        assert v == (Fraction(1, 2) if (0, 0) in set(p.points()) else 0)
    assert sorted(T.values) == [0, 0, 0, Fraction(1, 2), Fraction(1, 2), Fraction(1, 2)]


@pytest.mark.parametrize("q,d,k", [(2, 3, 1), (2, 3, 2), (3, 2, 1), (3, 3, 2)])
def test_transform_matches_direct_average(q, d, k):
    f = random_function(np.random.default_rng(q * 10 + d + k), q, d, signed=True)
    planes = [[int(x) for x in p.point_indices()] for p in enumerate_planes(Field(q), d, k)]
    assert kplane_transform(f, k).values == oracles.transform_direct(f.values, q, d, planes)


def test_linearity():
    rng = np.random.default_rng(1)
    for _ in range(10):
        f, g = random_function(rng, 2, 3, True), random_function(rng, 2, 3, True)
        a, b = Fraction(int(rng.integers(-5, 6)), 3), Fraction(int(rng.integers(-5, 6)), 7)
        for k in (1, 2):
            lhs = kplane_transform(f.scale(a) + g.scale(b), k).values
            tf, tg = kplane_transform(f, k).values, kplane_transform(g, k).values
            assert lhs == [a * x + b * y for x, y in zip(tf, tg)]


@pytest.mark.parametrize("q,d", [(2, 2), (2, 3), (2, 4), (3, 2), (3, 3), (3, 4)])
def test_mean_preservation_exact(q, d):
    f = random_function(np.random.default_rng(q + d), q, d, signed=True)
    for k in range(1, d):
        assert kplane_transform(f, k).mean() == f.mean()


def test_norm_examples():
    for p in [1, 2, Fraction(3, 2), 5, math.inf]:
        assert lp_norm(GridFunction.constant(3, 2), p) == 1
    for q, d in [(2, 3), (3, 2), (5, 2)]:
        for p in [1, 2, 3, Fraction(4, 3)]:
            assert lp_norm(GridFunction.delta(q, d), p) == pytest.approx(q ** (-d / float(p)), rel=1e-12)
        assert lp_norm(GridFunction.delta(q, d), math.inf) == 1
    with pytest.raises(InvalidExponent):
        lp_norm(GridFunction.delta(2, 2), Fraction(1, 2))


def test_lp_power_exactness():
    f = GridFunction(2, 2, [Fraction(1, 4), Fraction(9, 16), 0, 1])
    assert lp_power(f, 2) == (Fraction(1, 16) + Fraction(81, 256) + 1) / 4
    # 3/2 powers of perfect squares are rational
    assert lp_power(f, Fraction(3, 2)) == (Fraction(1, 8) + Fraction(27, 64) + 1) / 4
    g = GridFunction(2, 1, [Fraction(1, 2), 1])
    x = lp_power(g, Fraction(3, 2))
    assert isinstance(x, float) and x == pytest.approx((0.5**1.5 + 1) / 2)


def test_exactness_independent_of_order():
    rng = np.random.default_rng(5)
    f = random_function(rng, 3, 2, True)
    perm = rng.permutation(9)
    g = GridFunction(3, 2, [f.values[i] for i in perm])
    assert lp_power(f, 3) == lp_power(g, 3)
    vals = [abs(v) ** 3 for v in f.values]
    assert lp_power(f, 3) == sum(reversed(vals), Fraction(0)) / 9


@settings(max_examples=60, deadline=None)
@given(st.lists(rationals, min_size=8, max_size=8), st.sampled_from([1, 2]))
def test_contraction_positivity_monotonicity(vals, k):
    f = GridFunction(2, 3, vals)
    T = kplane_transform(f, k)
    assert T.abs_max() <= f.abs_max()
    assert all(v >= 0 for v in T.values)
    norms = [lp_norm(f, p) for p in (1, Fraction(3, 2), 2, 3, 4, math.inf)]
    assert all(a <= b * (1 + 1e-12) for a, b in zip(norms, norms[1:]))


@pytest.mark.parametrize("q,d", [(2, 2), (2, 3), (3, 3), (5, 2), (2, 4)])
def test_endpoint_ratio_delta_closed_form(q, d):
    for k in range(1, d):
        pw = endpoint_powers(GridFunction.delta(q, d), k)
        assert pw.exact
        assert pw.transform_power == Fraction(1, q ** ((d - k) + k * (d + 1)))
        assert pw.transform_power == pw.input_power
        assert pw.ratio == 1.0


def test_endpoint_ratio_constant_and_zero():
    assert endpoint_ratio(GridFunction.constant(3, 3), 1) == 1.0
    with pytest.raises(ZeroFunction):
        endpoint_ratio(GridFunction(2, 2, [0, 0, 0, 0]), 1)


def test_endpoint_ratio_line_indicator_oracle():
    q, d, k = 2, 2, 1
    pts = oracles.vectors(q, d)
    L = oracles.span_points([pts[0], pts[1]], q)
    idx = [oracles.encode(p, q) for p in L]
    f = GridFunction.indicator(q, d, idx)
    lines = oracles.affine_planes(q, d, 1)
    T = [Fraction(len(P & set(idx)), 2) for P in lines]
    tpow = sum(t**3 for t in T) / len(T)
    ipow = Fraction(2, 4) ** 2  # (mean |f|^(3/2))^(k+1) with f in {0,1}
    assert endpoint_powers(f, k).transform_power == tpow
    assert endpoint_powers(f, k).input_power == ipow
    assert endpoint_ratio(f, k) == pytest.approx(float(tpow / ipow) ** (1 / 3), rel=1e-14)


def test_multilinear_examples():
    q, d, k = 2, 2, 1
    ones = [GridFunction.constant(q, d)] * 3
    res = multilinear_norm(ones, k)
    assert res.product == 1 and res.majorant == pytest.approx(1.0)
    res = multilinear_norm([GridFunction.delta(q, d)] + ones[:2], k)
    assert res.product == Fraction(1, 4)
    T = kplane_transform(GridFunction.delta(q, d), k)
    assert res.majorant == pytest.approx(lp_norm(T, 3))
    assert res.holds
    with pytest.raises(WrongArity):
        multilinear_norm(ones[:2], k)


def test_multilinear_holder_random():
    rng = np.random.default_rng(7)
    for _ in range(40):
        fs = [random_function(rng, 2, 3, True) for _ in range(4)]
        for k in (1, 2):
            assert multilinear_norm(fs, k).holds


def test_json_roundtrip(tmp_path):
    f = GridFunction(2, 2, [Fraction(1, 3), 0, Fraction(-5, 2), 7])
    obj = f.to_json()
    assert obj["values"] == ["1/3", "0/1", "-5/2", "7/1"]
    path = tmp_path / "f.json"
    path.write_text(json.dumps(obj))
    assert load_function(path) == f
    T = kplane_transform(f, 1)
    path2 = tmp_path / "t.json"
    path2.write_text(json.dumps(T.to_json()))
    back = load_function(path2)
    assert isinstance(back, PlaneFunction) and back == T


def test_large_values_use_exact_big_integers():
    big = Fraction(3**50, 7)
    f = GridFunction(2, 2, [big, 1, 0, big])
    T = kplane_transform(f, 1)
    planes = [[int(x) for x in p.point_indices()] for p in enumerate_planes(Field(2), 2, 1)]
    assert T.values == oracles.transform_direct(f.values, 2, 2, planes)


def test_transform_invalid_k():
    with pytest.raises(InvalidDims):
        kplane_transform(GridFunction.delta(2, 2), 3)

import itertools
import json
import io

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kplane.errors import EmptyInput, IndexOutOfRange, InvalidDims, MixedDimensions
from kplane.field import Field
from kplane.geometry import (
    affine_span,
    canonical_plane,
    contains,
    enumerate_planes,
    export_planes,
    gaussian_binomial,
    num_planes,
    plane_from_rank,
    plane_members,
    plane_rank,
    planes_through,
    planes_through_count,
    point_codec,
    point_encode,
    point_planes,
)

import oracles


def test_point_codec_examples():
    F = Field(3)
    assert point_codec(0, F, 2) == (0, 0)
    assert point_codec(5, F, 2) == (2, 1)
    with pytest.raises(IndexOutOfRange):
        point_codec(9, F, 2)


def test_point_codec_roundtrip():
    F = Field(3)
    for i in range(27):
        assert point_encode(point_codec(i, F, 3), F) == i


def test_gaussian_binomial_examples():
    assert gaussian_binomial(5, 0, 3) == 1
    assert gaussian_binomial(2, 1, 2) == 3
    assert gaussian_binomial(4, 2, 3) == 130
    with pytest.raises(InvalidDims):
        gaussian_binomial(2, 3, 2)


@pytest.mark.parametrize("q,d", [(2, 2), (2, 3), (3, 3), (2, 4), (3, 4)])
def test_gaussian_binomial_vs_subspace_count(q, d):
    subs = oracles.linear_subspaces(q, d)
    for k in range(d + 1):
        assert gaussian_binomial(d, k, q) == len(subs[k])


@pytest.mark.parametrize("q,d,k,n", [(2, 2, 1, 6), (3, 3, 1, 117), (2, 3, 3, 1)])
def test_enumerate_planes_counts(q, d, k, n):
    assert len(enumerate_planes(Field(q), d, k)) == n


def test_enumerate_planes_small_vs_pair_spans():
    # brute force: every pair of distinct points spans a line
    q, d = 2, 2
    pts = oracles.vectors(q, d)
    lines = {frozenset(oracles.encode(p, q) for p in oracles.span_points([a, b], q))
             for a, b in itertools.combinations(pts, 2)}
    got = {frozenset(int(x) for x in p.point_indices()) for p in enumerate_planes(Field(q), d, 1)}
    assert got == lines and len(lines) == 6


def test_enumerate_planes_q3_d3_lines_vs_pair_spans():
    q, d = 3, 3
    pts = oracles.vectors(q, d)
    lines = {frozenset(oracles.encode(p, q) for p in oracles.span_points([a, b], q))
             for a, b in itertools.combinations(pts, 2)}
    assert len(lines) == 117 == num_planes(q, d, 1)


@pytest.mark.parametrize("q,d", [(2, 2), (2, 3), (3, 2), (3, 3), (2, 4), (5, 2)])
def test_enumeration_matches_oracle_and_is_canonical(q, d):
    F = Field(q)
    subs = oracles.linear_subspaces(q, d)
    for k in range(d + 1):
        planes = enumerate_planes(F, d, k)
        sets = [frozenset(int(x) for x in p.point_indices()) for p in planes]
        assert len(set(planes)) == len(planes) == num_planes(q, d, k)
        assert set(sets) == oracles.affine_planes(q, d, k, subs)
        members = plane_members(q, d, k)
        for rank, p in enumerate(planes):
            assert frozenset(int(x) for x in members[rank]) == sets[rank]
            assert plane_rank(p) == rank
            assert plane_from_rank(rank, F, d, k) == p
            # recomputing the canonical form from the point set is bit-identical
            pts = list(p.points())
            assert affine_span(pts, F) == p


def test_canonical_order_keys_are_sorted():
    q, d, k = 3, 3, 1
    planes = enumerate_planes(Field(q), d, k)
    keys = []
    for p in planes:
        piv = p.pivots
        free = [p.basis[i][j] for i, pv in enumerate(piv) for j in range(pv + 1, d) if j not in piv]
        base = [p.base[j] for j in range(d) if j not in piv]
        little = lambda xs: sum(x * q**i for i, x in enumerate(xs))
        keys.append((piv, little(free), little(base)))
    assert keys == sorted(keys)


@pytest.mark.parametrize("q,d,k", [(2, 3, 1), (2, 3, 2), (3, 3, 1), (3, 2, 1), (2, 4, 2), (5, 2, 1)])
def test_incidence_regularity(q, d, k):
    members = plane_members(q, d, k)
    per_point = np.bincount(members.ravel(), minlength=q**d)
    assert np.all(per_point == gaussian_binomial(d, k, q))
    assert q**k * num_planes(q, d, k) == q**d * gaussian_binomial(d, k, q)
    inc = point_planes(q, d, k)
    for x in range(q**d):
        assert all(x in members[r] for r in inc[x])


def test_affine_span_examples():
    F = Field(2)
    x = (1, 0)
    sp = affine_span([x], F)
    assert sp.dim == 0 and sp.base == x
    assert affine_span([(0, 0), (1, 1)], F).dim == 1
    assert affine_span([(0, 0), (1, 0), (0, 1)], F).dim == 2
    with pytest.raises(EmptyInput):
        affine_span([], F)
    with pytest.raises(MixedDimensions):
        affine_span([(0, 0), (0, 0, 0)], F)


def test_contains_examples():
    F = Field(2)
    line = affine_span([(0, 0), (1, 0)], F)
    assert contains(line, line.base)
    assert contains(line, tuple((a + b) % 2 for a, b in zip(line.base, line.basis[0])))
    assert not contains(line, (0, 1))
    with pytest.raises(MixedDimensions):
        contains(line, (0, 1, 0))


points_q5_d3 = st.lists(st.tuples(*[st.integers(0, 4)] * 3), min_size=1, max_size=5)


@settings(max_examples=200, deadline=None)
@given(points_q5_d3, points_q5_d3)
def test_span_matches_oracle_and_is_monotone(S, extra):
    F = Field(5)
    sp = affine_span(S, F)
    pts = frozenset(sp.points())
    assert pts == oracles.span_points(S, 5)
    assert sp.dim <= len(S) - 1
    assert len(pts) == 5**sp.dim
    big = affine_span(S + extra, F)
    assert all(contains(big, x) for x in pts)
    assert all(contains(sp, x) for x in S)


@pytest.mark.parametrize("d,k,s,q,n", [(3, 2, 2, 2, 1), (3, 2, 1, 2, 3), (2, 1, 0, 2, 3)])
def test_planes_through_count_examples(d, k, s, q, n):
    assert planes_through_count(d, k, s, q) == n
    F = Field(q)
    sub = enumerate_planes(F, d, s)[0]
    sset = set(sub.points())
    filtered = [p for p in enumerate_planes(F, d, k) if sset <= set(p.points())]
    assert len(filtered) == n
    assert sorted(map(plane_rank, planes_through(sub, k))) == sorted(map(plane_rank, filtered))


@pytest.mark.parametrize("q,d", [(2, 3), (3, 3), (2, 4)])
def test_planes_through_iterator(q, d):
    F = Field(q)
    rng = np.random.default_rng(0)
    for k in range(d + 1):
        for s in range(k + 1):
            planes = enumerate_planes(F, d, s)
            sub = planes[int(rng.integers(len(planes)))]
            got = list(planes_through(sub, k))
            assert len(set(got)) == len(got) == planes_through_count(d, k, s, q)
            assert all(p.dim == k and all(contains(p, x) for x in sub.points()) for p in got)


def test_invalid_dims():
    with pytest.raises(InvalidDims):
        enumerate_planes(Field(2), 2, 3)
    with pytest.raises(InvalidDims):
        planes_through_count(2, 1, 2, 2)


def test_export_planes_jsonl():
    buf = io.StringIO()
    n = export_planes(Field(2), 2, 1, buf)
    lines = [json.loads(s) for s in buf.getvalue().splitlines()]
    assert n == len(lines) == 6
    assert [o["rank"] for o in lines] == list(range(6))
    assert set(lines[0]) == {"rank", "pivots", "basis", "base"}
    p = canonical_plane(lines[3]["base"], lines[3]["basis"], 2)
    assert plane_rank(p) == 3 and list(p.pivots) == lines[3]["pivots"]

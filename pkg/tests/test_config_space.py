import math

import pytest
from hypothesis import given, strategies as st

from rpflab.config_space import AnnulusSequence, Configuration, Window, count, restrict

ANN = AnnulusSequence.default(8)


def cfg(*reals):
    return Configuration.from_reals(reals)


class TestRestrict:
    def test_empty(self):
        assert restrict(Configuration(), Window.ball(1, ANN)).points == ()

    def test_ball_membership(self):
        got = restrict(cfg(-1.0, 0.5, 3.0), Window.ball(1, ANN))
        assert got.points == (complex(0.5),)

    def test_annulus_membership(self):
        got = restrict(cfg(0.5, 1.5, 3.0), Window.annulus(1, 2, ANN))
        assert got.points == (complex(1.5),)

    def test_boundary_point_belongs_to_annulus(self):
        c = cfg(1.0)
        assert count(c, Window.ball(1, ANN)) == 0
        assert count(c, Window.annulus(1, 2, ANN)) == 1

    def test_negative_boundary(self):
        c = cfg(-1.0)
        assert count(c, Window.ball(1, ANN)) == 0
        assert count(c, Window.complement(1, ANN)) == 1


class TestCount:
    def test_empty(self):
        assert count(Configuration(), Window.ball(1, ANN)) == 0

    def test_multiset(self):
        assert count(cfg(0.2, 0.2), Window.ball(1, ANN)) == 2

    def test_complement(self):
        assert count(cfg(3.0), Window.complement(1, ANN)) == 1


points_strategy = st.lists(
    st.floats(min_value=-10, max_value=10, allow_nan=False), max_size=12)


@given(points_strategy, st.integers(1, 7))
def test_ball_complement_reconstruct(xs, r):
    c = Configuration.from_reals(xs)
    inside = restrict(c, Window.ball(r, ANN))
    outside = restrict(c, Window.complement(r, ANN))
    merged = Configuration(inside.points + outside.points)
    assert merged == c


@given(points_strategy, st.integers(1, 7))
def test_restrict_idempotent(xs, r):
    c = Configuration.from_reals(xs)
    w = Window.ball(r, ANN)
    assert restrict(restrict(c, w), w) == restrict(c, w)


@given(points_strategy, st.integers(1, 6), st.integers(2, 8))
def test_count_additive(xs, r, s):
    if r >= s:
        r, s = s, r + s
    if s > 8:
        s = 8
    if r >= s:
        return
    c = Configuration.from_reals(xs)
    assert count(c, Window.annulus(r, s, ANN)) + count(c, Window.ball(r, ANN)) \
        == count(c, Window.ball(s, ANN))


class TestSerialization:
    def test_json_roundtrip(self):
        c = Configuration([complex(1, 2), complex(-0.5, 0)])
        assert Configuration.from_json(c.to_json()) == c

    def test_csv_roundtrip(self):
        c = cfg(0.25, -3.5, 1.125)
        assert Configuration.from_csv(c.to_csv()) == c

    def test_csv_shape(self):
        assert cfg(1.0).to_csv() == "1.0,0.0\n"


class TestInvariants:
    def test_sorted_construction(self):
        c = Configuration([complex(2, 0), complex(-1, 0), complex(2, -1)])
        assert c.points == (complex(-1, 0), complex(2, -1), complex(2, 0))

    def test_annulus_requires_order(self):
        with pytest.raises(ValueError):
            Window.annulus(3, 2, ANN)

    def test_cutoffs_validated(self):
        with pytest.raises(ValueError):
            AnnulusSequence([0.5, 2.0])
        with pytest.raises(ValueError):
            AnnulusSequence([1.0, 1.0])

    def test_radius_indexing(self):
        assert ANN.radius(0) == 0.0
        assert ANN.radius(3) == 3.0
        assert ANN.radius(math.inf) == math.inf
        with pytest.raises(IndexError):
            ANN.radius(9)

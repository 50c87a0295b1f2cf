import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize

from hplab import geometry as geo

E1, E2 = np.array([1.0, 0.0]), np.array([0.0, 1.0])
SQ = geo.Box([0, 0], [1, 1])


def test_projection_examples():
    assert geo.projection_interval(SQ, E1) == pytest.approx((0.0, 1.0))
    assert geo.projection_interval(geo.Ball([0, 0], 1), geo.unit([0.3, -0.7])) == pytest.approx((-1.0, 1.0))
    a, b = geo.projection_interval(SQ, geo.unit([1, 1]))
    assert a == pytest.approx(0.0, abs=1e-15)
    assert b == pytest.approx(math.sqrt(2), rel=1e-15)


def test_directional_constant_examples():
    assert geo.directional_constant(SQ, E1) == 0.5
    strip = geo.Strip(E2, 0.0, 3.0)
    assert geo.directional_constant(strip, E2) == 1.5
    assert math.isinf(geo.directional_constant(strip, E1))
    assert math.isinf(geo.directional_constant(strip, geo.unit([1, 1])))


def test_directional_constant_union_matches_brute_force_minimax():
    dom = geo.Union([geo.Box([0], [1]), geo.Box([2], [3])])
    pts = np.concatenate([np.linspace(0, 1, 401), np.linspace(2, 3, 401)])
    centers = np.linspace(-1, 4, 5001)
    brute = min(np.max(np.abs(pts - c)) for c in centers)
    assert brute == pytest.approx(1.5, abs=1e-3)
    assert geo.directional_constant(dom, [1.0]) == 1.5


def test_circumradius_examples():
    assert geo.circumradius(SQ) == pytest.approx(math.sqrt(2) / 2, rel=1e-15)
    assert geo.circumradius(geo.Ball([4, 5, 6], 1.0)) == 1.0


def _enclosing_radius_oracle(pts):
    """Minimise the max distance over boundary samples with a derivative-free search."""
    def worst(c):
        return np.max(np.linalg.norm(pts - c, axis=1))

    best = minimize(worst, pts.mean(axis=0), method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 4000})
    return best.fun


def test_circumradius_union_matches_enclosing_ball_oracle():
    dom = geo.Union([geo.Ball([0, 0], 1), geo.Ball([3, 0], 1)])
    t = np.linspace(0, 2 * np.pi, 2001)
    circle = np.stack([np.cos(t), np.sin(t)], axis=1)
    pts = np.concatenate([circle, circle + [3, 0]])
    oracle = _enclosing_radius_oracle(pts)
    lo, hi, _ = geo.circumradius_bracket(dom)
    assert lo <= 2.5 + 1e-9 and hi >= 2.5 - 1e-9
    assert geo.circumradius(dom) == pytest.approx(oracle, rel=1e-6)
    assert geo.circumradius(dom) == pytest.approx(2.5, rel=1e-9)


def test_circumradius_box_union_oracle():
    dom = geo.Union([geo.Box([0, 0], [1, 1]), geo.Box([2, 0.5], [2.5, 3])])
    corners = np.array([[0, 0], [1, 0], [0, 1], [1, 1], [2, 0.5], [2.5, 0.5], [2, 3], [2.5, 3]], dtype=float)
    oracle = _enclosing_radius_oracle(corners)
    lo, hi, _ = geo.circumradius_bracket(dom)
    assert lo - 1e-8 <= oracle <= hi + 1e-8


def test_diameter_examples():
    assert geo.diameter(SQ) == pytest.approx(math.sqrt(2))
    assert geo.diameter(geo.Ball([0, 0], 1)) == 2.0
    assert geo.diameter(geo.Annulus([0, 0], 0.5, 1.0)) == 2.0
    assert math.isinf(geo.diameter(geo.Strip(E2, 0, 1)))


def test_best_direction_examples():
    idx, d, c = geo.best_direction(geo.Box([0, 0], [2, 1]), [E1, E2])
    assert idx == 1 and np.array_equal(d, E2) and c == 0.5
    idx, d, c = geo.best_direction(SQ, [E1, E2])
    assert (idx, c) == (0, 0.5)
    idx, _, c = geo.best_direction(geo.Strip(E2, 0, 1), [E1, E2])
    assert idx == 1 and math.isfinite(c)


def test_best_direction_tie_break_is_deterministic():
    basis = [E1, E2, geo.unit([1, 1])]
    runs = {geo.best_direction(geo.Ball([0, 0], 2), basis)[0] for _ in range(5)}
    assert runs == {0}


def test_direction_must_be_unit():
    with pytest.raises(ValueError):
        geo.directional_constant(SQ, [1.0, 1.0])


def test_invalid_primitives_rejected():
    with pytest.raises(ValueError):
        geo.Box([0, 1], [1, 1])
    with pytest.raises(ValueError):
        geo.Ball([0, 0], 0.0)
    with pytest.raises(ValueError):
        geo.Annulus([0, 0], 1.0, 0.5)


def test_indicator_open_and_closed():
    pts = np.array([[0.0, 0.5], [0.5, 0.5], [1.0, 1.0]])
    assert SQ.indicator(pts).tolist() == [False, True, False]
    assert SQ.indicator(pts, closed=True).tolist() == [True, True, True]
    ann = geo.Annulus([0, 0], 0.5, 1.0)
    assert ann.indicator(np.array([[0.1, 0], [0.75, 0], [1.1, 0]])).tolist() == [False, True, False]


def test_bounded_flag():
    assert SQ.bounded()
    assert not geo.Strip(E2, 0, 1).bounded()
    assert not geo.whole_space(2).bounded()


def test_domain_dict_round_trip():
    doms = [SQ, geo.Ball([1, 2, 3], 0.5), geo.Annulus([0, 0], 0.2, 1), geo.Strip(E2, -1, 1), geo.Union([SQ, geo.Ball([3, 0], 1)])]
    for d in doms:
        back = geo.domain_from_dict(d.to_dict())
        assert back.to_dict() == d.to_dict()
    with pytest.raises(ValueError):
        geo.domain_from_dict({"kind": "ball", "center": [0], "radius": 1, "colour": "red"})


# -- properties ---------------------------------------------------------------

coord = st.floats(-5, 5, allow_nan=False)
positive = st.floats(0.05, 5, allow_nan=False)


@st.composite
def primitives(draw):
    dim = draw(st.integers(1, 3))
    kind = draw(st.sampled_from(["box", "ball", "annulus"]))
    c = [draw(coord) for _ in range(dim)]
    if kind == "box":
        w = [draw(positive) for _ in range(dim)]
        return geo.Box(c, [a + b for a, b in zip(c, w)])
    if kind == "ball":
        return geo.Ball(c, draw(positive))
    r = draw(positive)
    return geo.Annulus(c, r, r + draw(positive))


@st.composite
def directions(draw, dim):
    v = np.array([draw(st.floats(-1, 1)) for _ in range(dim)])
    if np.linalg.norm(v) < 1e-3:
        v = np.eye(dim)[0]
    return geo.unit(v)


@given(data=st.data())
@settings(max_examples=200, deadline=None)
def test_translation_invariance(data):
    dom = data.draw(primitives())
    sigma = data.draw(directions(dom.dim))
    t = np.array([data.draw(coord) for _ in range(dom.dim)])
    a = geo.directional_constant(dom, sigma)
    b = geo.directional_constant(dom.translate(t), sigma)
    assert b == pytest.approx(a, rel=1e-12, abs=1e-12)


@given(data=st.data(), s=st.floats(0.1, 10))
@settings(max_examples=200, deadline=None)
def test_dilation_covariance(data, s):
    dom = data.draw(primitives())
    sigma = data.draw(directions(dom.dim))
    assert geo.directional_constant(dom.scale(s), sigma) == pytest.approx(s * geo.directional_constant(dom, sigma), rel=1e-12)
    assert geo.circumradius(dom.scale(s)) == pytest.approx(s * geo.circumradius(dom), rel=1e-12)


@given(data=st.data())
@settings(max_examples=200, deadline=None)
def test_bound_chain(data):
    dom = data.draw(primitives())
    sigma = data.draw(directions(dom.dim))
    diam = geo.diameter(dom)
    assert geo.directional_constant(dom, sigma) <= diam / 2 + 1e-12
    assert geo.circumradius(dom) <= diam + 1e-12

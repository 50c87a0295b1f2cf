import math

import numpy as np
import pytest
from scipy.integrate import quad, simpson

from hplab import geometry as geo
from hplab.functions import TestFunction, _bump_1d, bump
from hplab.quadrature import Grid, gradient_modular_integral, integrate, modular_integral, radial_integrate

DISK = geo.Ball([0, 0], 1)
B3 = geo.Ball([0, 0, 0], 1)


def ones(pts):
    return np.ones(len(pts))


def inv_power(gamma, center=None):
    def f(pts):
        c = 0 if center is None else np.asarray(center)
        return np.linalg.norm(pts - c, axis=1) ** -gamma

    return f


def test_unit_square_exact():
    sq = geo.Box([0, 0], [1, 1])
    assert integrate(ones, sq, Grid([0, 0], [1, 1], 64)).value == 1.0


def test_disk_area():
    res = integrate(ones, DISK, Grid([-1, -1], [1, 1], 512))
    assert abs(res.value - math.pi) <= 1e-3
    assert abs(res.value - math.pi) <= 3 * res.error_estimate


def test_singular_integral_3d():
    grid = Grid([-1] * 3, [1] * 3, 128).with_singularity([0, 0, 0], 2.0)
    res = integrate(inv_power(2.0), B3, grid)
    assert abs(res.value - 4 * math.pi) <= 3 * res.error_estimate
    assert res.exclusion_bound > 0


@pytest.mark.parametrize("gamma", [1.0, 2.0])
def test_exclusion_interval_contains_radial_oracle(gamma):
    exact = 4 * math.pi / (3 - gamma)
    for n in (32, 64):
        grid = Grid([-1] * 3, [1] * 3, n).with_singularity([0, 0, 0], gamma)
        res = integrate(inv_power(gamma), B3, grid, regular_bound=1.0)
        lo = res.value - (res.error_estimate - res.exclusion_bound)
        hi = res.value + res.error_estimate
        assert lo <= exact <= hi


def test_non_integrable_singularity_rejected():
    from hplab.errors import HypothesisError

    with pytest.raises(HypothesisError):
        integrate(inv_power(3.0), B3, Grid([-1] * 3, [1] * 3, 16).with_singularity([0, 0, 0], 3.0))


def test_grid_validation():
    with pytest.raises(ValueError):
        Grid([0], [1], 4)
    with pytest.raises(ValueError):
        Grid([0], [math.inf], 16)


SMOOTH_CASES = [
    ("x^2", geo.Box([0], [1]), lambda p: p[:, 0] ** 2, 1 / 3),
    ("exp", geo.Box([0], [1]), lambda p: np.exp(p[:, 0]), math.e - 1),
    ("cos cos", geo.Box([0, 0], [1, 1]), lambda p: np.cos(p[:, 0]) * np.cos(p[:, 1]), math.sin(1) ** 2),
]


@pytest.mark.parametrize("name,dom,f,exact", SMOOTH_CASES, ids=[c[0] for c in SMOOTH_CASES])
def test_second_order_convergence(name, dom, f, exact):
    lo, hi = dom.bounding_box()
    diffs = []
    for n in (16, 32, 64):
        res = integrate(f, dom, Grid(lo, hi, n))
        diffs.append(abs(res.value - res.coarse_value))
    for a, b in zip(diffs, diffs[1:]):
        assert 3.5 <= a / b <= 4.5


@pytest.mark.parametrize("name,dom,f,exact", SMOOTH_CASES, ids=[c[0] for c in SMOOTH_CASES])
def test_error_estimate_honest(name, dom, f, exact):
    lo, hi = dom.bounding_box()
    res = integrate(f, dom, Grid(lo, hi, 32))
    assert abs(res.value - exact) <= 3 * res.error_estimate


def test_modular_of_zero_is_zero():
    u = bump([0, 0], 0.5).scaled(0.0)
    res = modular_integral(u, 2.0, None, DISK, Grid([-1, -1], [1, 1], 32))
    assert res.value == 0.0 and res.error_estimate == 0.0


def test_modular_1d_against_simpson_oracle():
    u = bump([0.0], 1.0)
    x = np.linspace(-1, 1, 1_000_001)
    oracle = simpson(u.value(x[:, None]) ** 2, x=x)
    res = modular_integral(u, 2.0, None, geo.Box([-1], [1]), Grid([-1], [1], 256))
    assert abs(res.value - oracle) <= 3 * res.error_estimate + 1e-12


def test_weighted_modular_3d_against_radial_oracle():
    u = bump([0, 0, 0], 1.0)

    def weight(pts):
        return 1.0 / (1.0 + np.sum(pts**2, axis=1))

    oracle = 4 * math.pi * quad(lambda r: math.exp(-2 / (1 - r * r)) / (1 + r * r) * r * r, 0, 1, epsabs=1e-14)[0]
    res = modular_integral(u, 2.0, weight, B3, Grid([-1] * 3, [1] * 3, 64))
    assert abs(res.value - oracle) <= 3 * res.error_estimate
    assert res.relative_error < 1e-3


def ridge():
    """Depends on x1 only; its derivative along e2 vanishes identically."""
    def value(x):
        return _bump_1d(x[:, 0] / 0.5)[0]

    def gradient(x):
        g = np.zeros_like(x)
        g[:, 0] = _bump_1d(x[:, 0] / 0.5)[1] / 0.5
        return g

    return TestFunction("ridge", {}, geo.Strip([1.0, 0.0], -0.5, 0.5), math.exp(-1), value, gradient)


def test_directional_derivative_orthogonal_to_variation_vanishes():
    res = gradient_modular_integral(ridge(), 2.0, DISK, Grid([-1, -1], [1, 1], 64), sigma=[0.0, 1.0])
    assert res.value == 0.0
    other = gradient_modular_integral(ridge(), 2.0, DISK, Grid([-1, -1], [1, 1], 64), sigma=[1.0, 0.0])
    assert other.value > 0


def test_hardy_rhs_self_convergence():
    u = bump([0.5, 0, 0], 0.25)
    vals = []
    for n in (32, 64):
        vals.append(gradient_modular_integral(u, 2.0, B3, Grid.covering(u.support, B3, n)))
    a, b = vals
    assert 0 < b.value < math.inf
    assert abs(a.value - b.value) <= 3 * (a.error_estimate + b.error_estimate)


def test_gradient_conventions_against_polar_oracle():
    # radial u: |grad u| = |f'(r)|, and the coordinate sum picks up |cos|^3 + |sin|^3,
    # whose integral over the circle is 16/3 instead of 2 pi
    rad = 0.7
    u = bump([0.1, -0.2], rad)
    grid = Grid.covering(u.support, DISK, 128)
    lp = gradient_modular_integral(u, 3.0, DISK, grid, norm="lp")
    eu = gradient_modular_integral(u, 3.0, DISK, grid, norm="euclidean")
    radial = quad(lambda r: abs(float(u.radial.df(np.array([r]))[0])) ** 3 * r, 0, rad, epsabs=1e-14, limit=200)[0]
    assert abs(lp.value - 16 / 3 * radial) <= 3 * lp.error_estimate
    assert abs(eu.value - 2 * math.pi * radial) <= 3 * eu.error_estimate
    assert lp.value < eu.value
    same = gradient_modular_integral(u, 2.0, DISK, grid, norm="lp").value
    assert same == pytest.approx(gradient_modular_integral(u, 2.0, DISK, grid, norm="euclidean").value, rel=1e-13)


def test_radial_power_needs_center():
    with pytest.raises(ValueError):
        gradient_modular_integral(bump([0, 0], 0.5), 2.0, DISK, Grid([-1, -1], [1, 1], 16), radial_power=2.0)


def test_radial_examples():
    assert radial_integrate(lambda r: np.ones_like(r), 3, 0, 1, 64).value == pytest.approx(4 * math.pi / 3, rel=1e-13)
    assert radial_integrate(lambda r: r**-2.0, 3, 0, 1, 64).value == pytest.approx(4 * math.pi, rel=1e-12)
    assert radial_integrate(lambda r: np.ones_like(r), 2, 0, 1, 64).value == pytest.approx(math.pi, rel=1e-13)


def test_radial_log_mapping():
    res = radial_integrate(lambda r: r**-2.5, 3, 1e-6, 1, 512, mapping="log")
    exact = 4 * math.pi * (1 - 1e-3) / 0.5
    assert abs(res.value - exact) <= 3 * res.error_estimate + 1e-12 * exact


def test_translation_equivariance():
    t = np.array([0.3, -0.7, 0.45])
    u = bump([0.1, 0, 0], 0.6)
    grid = Grid.covering(u.support, B3, 32).with_singularity([0, 0, 0], 1.0)
    base = modular_integral(u, 2.0, inv_power(1.0), B3, grid, regular_bound=1.0)
    moved = modular_integral(u.translated(t), 2.0, inv_power(1.0, t), B3.translate(t), grid.translate(t), regular_bound=1.0)
    assert moved.value == pytest.approx(base.value, rel=1e-12)


def test_workers_do_not_change_results():
    # the fine 128^3 grid spans several slabs, so threads really split the work
    u = bump([0, 0, 0], 0.9)
    grid = Grid([-1] * 3, [1] * 3, 64)
    a = modular_integral(u, 1.5, None, B3, grid, workers=1)
    b = modular_integral(u, 1.5, None, B3, grid, workers=4)
    assert a.value == b.value and a.error_estimate == b.error_estimate


def test_boundary_term_only_where_the_integrand_meets_the_boundary():
    inner = modular_integral(bump([0, 0], 0.5), 2.0, None, DISK, Grid([-1, -1], [1, 1], 64))
    assert inner.boundary_bound == 0.0
    area = integrate(ones, DISK, Grid([-1, -1], [1, 1], 64))
    assert area.boundary_bound > 0

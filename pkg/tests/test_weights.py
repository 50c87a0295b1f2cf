import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hplab import geometry as geo
from hplab.errors import HypothesisError
from hplab.weights import (
    LimitWeightParams,
    WeightParams,
    certified_constant,
    divergence_identity,
    evaluate_weight,
    kappa_plus,
)

ORIGIN3 = [0.0, 0.0, 0.0]


def test_evaluate_weight_examples():
    w = WeightParams(1, 2, 1, ORIGIN3)
    assert evaluate_weight(w, np.zeros((1, 3)))[0] == 1.0
    assert evaluate_weight(w, np.array([[1.0, 0, 0]]))[0] == 0.5
    assert evaluate_weight(WeightParams(1, 2, -1, ORIGIN3), np.array([[1.0, 0, 0]]))[0] == 2.0


def test_divergence_identity_examples():
    w = WeightParams(1, 2, 1, ORIGIN3)
    assert divergence_identity(w, np.zeros((1, 3)))[0] == 3.0
    assert divergence_identity(w, np.array([[1.0, 0, 0]]))[0] == 1.0


def _div_fd(params, x, h=1e-5):
    """Central differences of omega(x) (x - x0), an oracle independent of the closed form."""
    x0 = np.array(params.x0)
    total = 0.0
    for k in range(len(x)):
        e = np.zeros(len(x))
        e[k] = h
        fp = evaluate_weight(params, (x + e)[None])[0] * (x + e - x0)[k]
        fm = evaluate_weight(params, (x - e)[None])[0] * (x - e - x0)[k]
        total += (fp - fm) / (2 * h)
    return total


@pytest.mark.parametrize(
    "lam,alpha,beta,x",
    [(1, 2, 1, [0.3, -0.4, 0.5]), (0.5, 1.5, -2, [1.0, 2.0]), (2, 3, 0.2, [0.7]), (0.1, 1, 1.5, [0.2, 0.1, -0.3])],
)
def test_divergence_identity_matches_finite_differences(lam, alpha, beta, x):
    x = np.array(x, dtype=float)
    p = WeightParams(lam, alpha, beta, np.zeros(len(x)) + 0.05)
    assert divergence_identity(p, x[None])[0] == pytest.approx(_div_fd(p, x), rel=1e-7)


def test_negative_beta_lower_bound():
    rng = np.random.default_rng(1)
    p = WeightParams(0.7, 1.3, -0.8, [0, 0])
    x = rng.normal(size=(500, 2)) * 3
    assert np.all(divergence_identity(p, x) >= 2 * evaluate_weight(p, x) * (1 - 1e-14))


def test_kappa_plus_examples():
    assert kappa_plus(WeightParams(1, 2, 1, ORIGIN3)) == 1
    assert kappa_plus(WeightParams(1, 2, -1, ORIGIN3)) == 3
    ann = geo.Annulus(ORIGIN3, 1.0, 2.0)
    assert kappa_plus(WeightParams(1, 2, -1, ORIGIN3), refined_over=ann) == pytest.approx(4.0)


def test_refined_kappa_equals_plain_when_domain_touches_center():
    p = WeightParams(1, 2, -1, ORIGIN3)
    assert kappa_plus(p, refined_over=geo.Ball(ORIGIN3, 1)) == 3


def test_certified_constant_examples():
    assert certified_constant("sharp_hardy", 2, 3) == 4
    assert certified_constant("general", 2, 3, params=WeightParams(1, 2, 1, ORIGIN3)) == 4
    assert certified_constant("dual", 1, 3) == pytest.approx(1 / 3)
    assert certified_constant("gamma_hardy", 2, 3, gamma=1) == 1
    assert certified_constant("classical_poincare", 2, 2, c_omega=np.sqrt(2) / 2) == pytest.approx(0.5)


@pytest.mark.parametrize(
    "args",
    [
        dict(lam=0, alpha=1, beta=1),
        dict(lam=1, alpha=0, beta=1),
        dict(lam=1, alpha=1, beta=0),
        dict(lam=1, alpha=2, beta=1.5),
    ],
)
def test_invalid_weights_rejected_at_construction(args):
    with pytest.raises(HypothesisError):
        WeightParams(args["lam"], args["alpha"], args["beta"], ORIGIN3)


def test_alpha_beta_message_names_hypothesis():
    with pytest.raises(HypothesisError, match="alpha\\*beta < N"):
        WeightParams(1, 2, 2, ORIGIN3)


def test_constant_hypotheses():
    with pytest.raises(HypothesisError):
        certified_constant("sharp_hardy", 3, 3)
    with pytest.raises(HypothesisError):
        certified_constant("gamma_hardy", 2, 2, gamma=2)
    with pytest.raises(HypothesisError):
        certified_constant("dual", 0.5, 2)


def test_limit_weights():
    lw = LimitWeightParams(1.5, "singular", 3)
    assert lw.evaluate(np.array([[2.0, 0, 0]]), ORIGIN3)[0] == pytest.approx(2**-1.5)
    with pytest.raises(HypothesisError):
        LimitWeightParams(3, "singular", 3)


@pytest.mark.parametrize("lam", [1e-2, 1e-4, 1e-6])
def test_lambda_to_zero_limit(lam):
    x = np.array([[0.5, 0.2, 0.0], [2.0, 1.0, 1.0]])
    r = np.linalg.norm(x, axis=1)
    got = evaluate_weight(WeightParams(lam, 1.5, 1.2, ORIGIN3), x)
    limit = r ** (-1.5 * 1.2)
    assert np.allclose(got, limit, rtol=10 * lam / r.min() ** 1.5)


# -- properties ---------------------------------------------------------------


@st.composite
def weight_and_point(draw):
    dim = draw(st.integers(1, 3))
    alpha = draw(st.floats(0.1, 4))
    beta = draw(st.floats(-3, 3).filter(lambda b: abs(b) > 1e-3))
    if alpha * beta >= dim:
        beta = (dim - 0.01) / alpha * draw(st.floats(0, 0.99))
        if beta == 0:
            beta = -0.5
    lam = draw(st.floats(1e-3, 10))
    x0 = [draw(st.floats(-2, 2)) for _ in range(dim)]
    x = [draw(st.floats(-10, 10)) for _ in range(dim)]
    return WeightParams(lam, alpha, beta, x0), np.array(x)


@given(weight_and_point())
@settings(max_examples=500, deadline=None)
def test_pointwise_certificate(wp):
    params, x = wp
    val = divergence_identity(params, x[None])[0]
    assert val >= kappa_plus(params) * evaluate_weight(params, x[None])[0] - 1e-12 * abs(val)
    assert kappa_plus(params) > 0


@given(weight_and_point(), st.floats(0, 3))
@settings(max_examples=200, deadline=None)
def test_refined_kappa_never_smaller(wp, inner):
    params, _ = wp
    if params.beta > 0 or params.dim == 1:
        return
    ann = geo.Annulus(params.x0, inner + 0.01, inner + 1.0)
    assert kappa_plus(params, refined_over=ann) >= kappa_plus(params)

"""The weight family (lam + |x - x0|^alpha)^(-beta) and the certified constants built on it."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import HypothesisError
from .geometry import Domain


def _radius(x, x0):
    x = np.asarray(x, dtype=float)
    if x.ndim == 1 and len(x0) == 1 and x.shape[0] != 1:
        x = x[:, None]
    return np.linalg.norm(x - x0, axis=-1)


@dataclass(frozen=True)
class WeightParams:
    """Parameters of omega(x) = (lam + |x - x0|^alpha)^(-beta).

    Validation happens here: lam > 0, alpha > 0, beta != 0 and alpha*beta < N.
    """

    lam: float
    alpha: float
    beta: float
    x0: tuple

    def __post_init__(self):
        object.__setattr__(self, "x0", tuple(float(v) for v in np.atleast_1d(self.x0)))
        if not self.lam > 0:
            raise HypothesisError(f"weighted Hardy-Poincare hypothesis: lambda must be > 0, got {self.lam}")
        if not self.alpha > 0:
            raise HypothesisError(f"weighted Hardy-Poincare hypothesis: alpha must be > 0, got {self.alpha}")
        if self.beta == 0:
            raise HypothesisError("weighted Hardy-Poincare hypothesis: beta must be nonzero")
        if not self.alpha * self.beta < self.dim:
            raise HypothesisError(
                "weighted Hardy-Poincare hypothesis alpha*beta < N violated: "
                f"alpha*beta = {self.alpha * self.beta} >= N = {self.dim}"
            )

    @property
    def dim(self) -> int:
        return len(self.x0)

    @classmethod
    def from_dict(cls, spec: dict) -> "WeightParams":
        extra = set(spec) - {"lambda", "alpha", "beta", "x0"}
        if extra:
            raise ValueError(f"unknown weight keys: {sorted(extra)}")
        return cls(float(spec["lambda"]), float(spec["alpha"]), float(spec["beta"]), spec["x0"])

    def to_dict(self) -> dict:
        return {"lambda": self.lam, "alpha": self.alpha, "beta": self.beta, "x0": list(self.x0)}

    def translate(self, t) -> "WeightParams":
        return WeightParams(self.lam, self.alpha, self.beta, np.array(self.x0) + np.asarray(t, dtype=float))


@dataclass(frozen=True)
class LimitWeightParams:
    """Pure power weights reached as lam -> 0: |x - x0|^(-gamma) (singular) or |x - x0|^gamma (dual)."""

    gamma: float
    mode: str
    dim: int

    def __post_init__(self):
        if self.mode not in ("singular", "dual", "none"):
            raise ValueError(f"mode must be singular, dual or none, got {self.mode!r}")
        if self.mode == "singular" and not 0 < self.gamma < self.dim:
            raise HypothesisError(f"Hardy-type hypothesis 0 < gamma < N violated: gamma = {self.gamma}, N = {self.dim}")
        if self.mode == "dual" and not self.gamma > 0:
            raise HypothesisError(f"dual Hardy hypothesis gamma > 0 violated: gamma = {self.gamma}")
        if self.mode == "none" and self.gamma != 0:
            raise ValueError("mode 'none' requires gamma = 0")

    @property
    def exponent(self) -> float:
        """Power s in |x - x0|^s."""
        return -self.gamma if self.mode == "singular" else self.gamma

    def evaluate(self, x, x0) -> np.ndarray:
        r = _radius(x, np.asarray(x0, dtype=float))
        with np.errstate(divide="ignore"):
            return r**self.exponent


def evaluate_weight(params: WeightParams, x) -> np.ndarray:
    r = _radius(x, np.array(params.x0))
    return (params.lam + r**params.alpha) ** (-params.beta)


def divergence_identity(params: WeightParams, x) -> np.ndarray:
    """div[omega(x) (x - x0)] in closed form: (N - alpha*beta*t/(lam + t)) omega, t = |x - x0|^alpha."""
    r = _radius(x, np.array(params.x0))
    t = r**params.alpha
    base = params.lam + t
    return (params.dim - params.alpha * params.beta * t / base) * base ** (-params.beta)


def kappa_plus(params: WeightParams, refined_over: Domain | None = None) -> float:
    """Lower bound of div(omega tau)/omega.

    For beta < 0 and a domain, t/(lam + t) is increasing in r = |x - x0|, so
    its infimum over the domain is attained at the infimal distance (the
    domain is open, so this is an infimum, not necessarily a minimum).
    """
    n, ab = params.dim, params.alpha * params.beta
    if not ab < n:
        raise HypothesisError(f"weighted Hardy-Poincare hypothesis alpha*beta < N violated: {ab} >= {n}")
    if params.beta > 0:
        return n - ab
    if refined_over is None:
        return float(n)
    r_min, _ = refined_over.distance_range(params.x0)
    t = r_min**params.alpha
    return n + params.alpha * abs(params.beta) * t / (params.lam + t)


CONSTANT_KINDS = ("general", "gamma_hardy", "sharp_hardy", "dual", "classical_poincare")


def certified_constant(
    kind: str,
    p: float,
    dim: int,
    params: WeightParams | None = None,
    gamma: float | None = None,
    c_omega: float | None = None,
    refined_over: Domain | None = None,
) -> float:
    """Multiplier of the gradient-side modular, as certified for each inequality.

    general            (p / kappa_plus)^p
    gamma_hardy        (p / (N - gamma))^p
    sharp_hardy        (p / (N - p))^p
    dual               (p / N)^p
    classical_poincare ((p / N) * c_omega)^p
    """
    if not p >= 1:
        raise HypothesisError(f"exponent p must be >= 1, got {p}")
    if kind == "general":
        if params is None:
            raise ValueError("kind 'general' needs WeightParams")
        if params.dim != dim:
            raise ValueError("weight center dimension does not match N")
        return (p / kappa_plus(params, refined_over)) ** p
    if kind == "gamma_hardy":
        if gamma is None or not 0 < gamma < dim:
            raise HypothesisError(f"Hardy-type hypothesis 0 < gamma < N violated: gamma = {gamma}, N = {dim}")
        return (p / (dim - gamma)) ** p
    if kind == "sharp_hardy":
        if not p < dim:
            raise HypothesisError(f"sharp Hardy hypothesis 1 <= p < N violated: p = {p}, N = {dim}")
        return (p / (dim - p)) ** p
    if kind == "dual":
        return (p / dim) ** p
    if kind == "classical_poincare":
        if c_omega is None or not math.isfinite(c_omega):
            raise HypothesisError("classical Poincare needs a bounded domain (finite circumradius)")
        return (p / dim * c_omega) ** p
    raise ValueError(f"unknown constant kind {kind!r}; expected one of {CONSTANT_KINDS}")

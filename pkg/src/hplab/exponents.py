"""Variable exponents p(x) and the modular constants kappa(p) and kappa_{Omega,sigma}(p).

Fields are closed forms: a constant, a profile of the distance to a line
(constant along that line's direction), or a profile of the distance to a
point.  Profiles are affine and clipped to [1, p_max].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import HypothesisError
from .geometry import Annulus, Ball, Box, Domain, Strip, Union, as_direction, projection_interval
from .quadrature import Grid, IntegralResult, integrate

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
# f(p) = 2^p (p-1)^(p-1) has its only critical point (a minimum) here
F_ARGMIN = 1.0 + math.exp(-1.0) / 2.0


def f_kappa(p):
    """2^p (p - 1)^(p - 1), equal to 2 at p = 1."""
    p = np.asarray(p, dtype=float)
    q = p - 1.0
    with np.errstate(divide="ignore", invalid="ignore"):
        core = np.where(q > 0, q ** np.where(q > 0, q, 1.0), 1.0)
    out = 2.0**p * core
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class AffineProfile:
    """pi(r) = clip(a + b r, 1, p_max)."""

    a: float
    b: float
    p_max: float | None = None

    def __post_init__(self):
        pm = self.p_max
        if pm is None:
            if self.b > 0:
                raise ValueError("an increasing profile needs an explicit p_max")
            pm = max(1.0, self.a)
        if not (math.isfinite(pm) and pm >= 1.0):
            raise ValueError("p_max must be finite and >= 1")
        object.__setattr__(self, "p_max", float(pm))

    @property
    def monotonicity(self) -> str:
        if self.b < 0:
            return "decreasing"
        if self.b > 0:
            return "increasing"
        return "none"

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        if self.b == 0:
            raw = np.full(r.shape, float(self.a))
        else:
            raw = self.a + self.b * r
        out = np.clip(raw, 1.0, self.p_max)
        return float(out) if out.ndim == 0 else out

    def derivative(self, r):
        r = np.asarray(r, dtype=float)
        raw = self.a + self.b * r
        return np.where((raw > 1.0) & (raw < self.p_max), self.b, 0.0)

    def to_dict(self):
        return {"a": self.a, "b": self.b, "p_max": self.p_max}


class ExponentField:
    p_max: float

    def __call__(self, x) -> np.ndarray:
        raise NotImplementedError

    def range_on(self, domain: Domain) -> tuple[float, float]:
        """Interval containing p(x) for x in the domain (exact for the common shapes)."""
        raise NotImplementedError

    def is_constant_along(self, sigma) -> bool:
        raise NotImplementedError

    @property
    def is_constant(self) -> bool:
        return False

    def translate(self, t) -> "ExponentField":
        raise NotImplementedError


def _pts(x, dim):
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[None, :] if x.shape[0] == dim else x[:, None]
    return x


@dataclass(frozen=True)
class ConstantExponent(ExponentField):
    p: float

    def __post_init__(self):
        if not (math.isfinite(self.p) and self.p >= 1.0):
            raise HypothesisError(f"exponent must satisfy 1 <= p < inf, got {self.p}")

    @property
    def p_max(self):
        return self.p

    @property
    def is_constant(self):
        return True

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        n = 1 if x.ndim <= 1 else x.shape[0]
        return np.full(n, self.p)

    def range_on(self, domain):
        return self.p, self.p

    def is_constant_along(self, sigma):
        return True

    def translate(self, t):
        return self

    def describe(self):
        return f"p={self.p:g}"

    def to_dict(self):
        return {"kind": "constant", "p": self.p}


@dataclass(frozen=True)
class AlongExponent(ExponentField):
    """p(x) = profile(|P(x - center)|), P the projection orthogonal to ``direction``."""

    direction: tuple
    profile: AffineProfile
    center: tuple

    def __post_init__(self):
        object.__setattr__(self, "direction", tuple(float(v) for v in as_direction(self.direction)))
        object.__setattr__(self, "center", tuple(float(v) for v in np.atleast_1d(self.center)))
        if len(self.center) != len(self.direction):
            raise ValueError("center and direction dimensions differ")

    @property
    def dim(self):
        return len(self.direction)

    @property
    def p_max(self):
        return self.profile.p_max

    def transverse_distance(self, x):
        d = _pts(x, self.dim) - np.array(self.center)
        s = np.array(self.direction)
        return np.linalg.norm(d - np.outer(d @ s, s), axis=-1)

    def __call__(self, x):
        return np.atleast_1d(self.profile(self.transverse_distance(x)))

    def is_constant_along(self, sigma):
        s = as_direction(sigma, self.dim)
        return abs(abs(float(np.dot(s, self.direction))) - 1.0) <= 1e-12 or self.profile.b == 0

    def _transverse_range(self, domain: Domain):
        sig = np.array(self.direction)
        c = np.array(self.center)
        if self.dim == 1:
            return 0.0, 0.0
        if isinstance(domain, Union):
            rs = [self._transverse_range(m) for m in domain.members]
            return min(r[0] for r in rs), max(r[1] for r in rs)
        if isinstance(domain, (Ball, Annulus)):
            r = domain.radius if isinstance(domain, Ball) else domain.outer
            dc = np.array(domain.center) - c
            d = float(np.linalg.norm(dc - np.dot(dc, sig) * sig))
            return max(0.0, d - r), d + r
        if isinstance(domain, Box):
            k = int(np.argmax(np.abs(sig)))
            if abs(abs(sig[k]) - 1.0) <= 1e-12:
                keep = [i for i in range(self.dim) if i != k]
                sub = Box(np.array(domain.lo)[keep], np.array(domain.hi)[keep])
                return sub.distance_range(c[keep])
            return 0.0, domain.distance_range(c)[1]
        if isinstance(domain, Strip):
            n = np.array(domain.direction)
            if self.dim == 2 and abs(float(np.dot(n, sig))) <= 1e-12:
                t = float(np.dot(c, n))
                near = max(0.0, domain.a - t, t - domain.b)
                return near, max(abs(domain.a - t), abs(domain.b - t))
            return 0.0, math.inf
        return 0.0, math.inf

    def range_on(self, domain):
        s_lo, s_hi = self._transverse_range(domain)
        ends = [self.profile(s_lo), self.profile(s_hi) if math.isfinite(s_hi) else _profile_at_infinity(self.profile)]
        return min(ends), max(ends)

    def translate(self, t):
        return AlongExponent(self.direction, self.profile, np.array(self.center) + np.asarray(t, dtype=float))

    def describe(self):
        return f"along{_vec(self.direction)}:{self.profile.a:g}{self.profile.b:+g}s"

    def to_dict(self):
        return {"kind": "along", "direction": list(self.direction), "center": list(self.center), **self.profile.to_dict()}


@dataclass(frozen=True)
class RadialExponent(ExponentField):
    """p(x) = profile(|x - center|)."""

    center: tuple
    profile: AffineProfile

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(v) for v in np.atleast_1d(self.center)))

    @property
    def dim(self):
        return len(self.center)

    @property
    def p_max(self):
        return self.profile.p_max

    @property
    def monotonicity(self):
        return self.profile.monotonicity

    def radius(self, x):
        return np.linalg.norm(_pts(x, self.dim) - np.array(self.center), axis=-1)

    def __call__(self, x):
        return np.atleast_1d(self.profile(self.radius(x)))

    def is_constant_along(self, sigma):
        return self.profile.b == 0

    def range_on(self, domain):
        r_lo, r_hi = domain.distance_range(self.center)
        ends = [self.profile(r_lo), self.profile(r_hi) if math.isfinite(r_hi) else _profile_at_infinity(self.profile)]
        return min(ends), max(ends)

    def translate(self, t):
        return RadialExponent(np.array(self.center) + np.asarray(t, dtype=float), self.profile)

    def describe(self):
        return f"radial{_vec(self.center)}:{self.profile.a:g}{self.profile.b:+g}r"

    def to_dict(self):
        return {"kind": "radial", "center": list(self.center), **self.profile.to_dict()}


def _vec(v):
    return "(" + ",".join(f"{x:g}" for x in v) + ")"


def _profile_at_infinity(profile: AffineProfile) -> float:
    if profile.b > 0:
        return profile.p_max
    if profile.b < 0:
        return 1.0
    return profile(0.0)


def field_from_dict(spec: dict, dim: int | None = None) -> ExponentField:
    spec = dict(spec)
    kind = spec.pop("kind", None)
    if kind == "constant":
        _keys(kind, spec, {"p"})
        return ConstantExponent(float(spec["p"]))
    if kind == "along":
        _keys(kind, spec, {"direction", "a", "b"}, {"p_max", "center"})
        direction = np.asarray(spec["direction"], dtype=float)
        center = spec.get("center", np.zeros(len(direction)))
        return AlongExponent(direction / np.linalg.norm(direction), AffineProfile(spec["a"], spec["b"], spec.get("p_max")), center)
    if kind == "radial":
        _keys(kind, spec, {"center", "a", "b"}, {"p_max"})
        return RadialExponent(spec["center"], AffineProfile(spec["a"], spec["b"], spec.get("p_max")))
    raise ValueError(f"exponent.kind must be constant, along or radial, got {kind!r}")


def _keys(kind, spec, required, optional=frozenset()):
    extra = set(spec) - required - set(optional)
    missing = required - set(spec)
    if extra:
        raise ValueError(f"unknown keys for exponent {kind}: {sorted(extra)}")
    if missing:
        raise ValueError(f"missing keys for exponent {kind}: {sorted(missing)}")


def evaluate_exponent(field: ExponentField, x):
    return field(x)


def kappa_p(field: ExponentField, domain: Domain) -> float:
    """sup over the domain of 2^p(x) (p(x) - 1)^(p(x) - 1).

    f decreases on [1, F_ARGMIN] and increases afterwards, so its sup over
    the exponent range [p_lo, p_hi] sits at one of the two ends.
    """
    if field.is_constant:
        return f_kappa(field.p_max)
    p_lo, p_hi = field.range_on(domain)
    return max(f_kappa(p_lo), f_kappa(p_hi))


def _slice_exponent_bounds(field: ExponentField, domain: Domain, sigma, t):
    """Bounds (p_min(t), p_max(t)) on p over the slice {x in domain : x . sigma = t}."""
    p_lo, p_hi = field.range_on(domain)
    lo = np.full(t.shape, p_lo)
    hi = np.full(t.shape, p_hi)
    if isinstance(field, RadialExponent):
        r_min, r_max = domain.distance_range(field.center)
        c_t = float(np.dot(field.center, sigma))
        r_near = np.maximum(np.abs(t - c_t), r_min)
        r_far = np.full(t.shape, r_max)
        near_p = np.asarray(field.profile(r_near), dtype=float)
        far_p = np.asarray(field.profile(r_far), dtype=float) if math.isfinite(r_max) else np.full(t.shape, _profile_at_infinity(field.profile))
        lo = np.minimum(near_p, far_p)
        hi = np.maximum(near_p, far_p)
    return lo, hi


def inf_sup_power(field: ExponentField, domain: Domain, sigma, samples: int = 4001, rel_tol: float = 1e-6):
    """inf over t0 of sup over the domain of |x . sigma - t0|^p(x).

    Returns (value, t0, bracket width).  The inner sup is bounded slice by
    slice on a dense sample of the projection interval; the outer function is
    quasi-convex in t0 and minimised by golden-section search.
    """
    s = as_direction(sigma, domain.dim)
    a, b = projection_interval(domain, s)
    if not (math.isfinite(a) and math.isfinite(b)):
        raise HypothesisError("domain must be bounded along sigma")
    if field.is_constant:
        c = (b - a) / 2.0
        return c**field.p_max, (a + b) / 2.0, 0.0
    t = np.linspace(a, b, samples)
    p_min, p_max = _slice_exponent_bounds(field, domain, s, t)

    def h(t0):
        base = np.abs(t - t0)
        return float(np.max(np.maximum(base**p_min, base**p_max)))

    lo, hi = a, b
    x1, x2 = hi - GOLDEN * (hi - lo), lo + GOLDEN * (hi - lo)
    f1, f2 = h(x1), h(x2)
    while hi - lo > rel_tol * (b - a):
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - GOLDEN * (hi - lo)
            f1 = h(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + GOLDEN * (hi - lo)
            f2 = h(x2)
    t0 = (lo + hi) / 2.0
    return h(t0), t0, hi - lo


def kappa_domain_sigma(field: ExponentField, domain: Domain, sigma) -> float:
    """kappa(p) times inf over x0 of sup over the domain of |(x - x0) . sigma|^p(x)."""
    return kappa_p(field, domain) * inf_sup_power(field, domain, sigma)[0]


def log_term_integral(field: RadialExponent, u, sigma, grid: Grid, domain: Domain | None = None, workers: int = 1) -> IntegralResult:
    """Quadrature of pi'(r) ((x - x0) . sigma)^2 / r * log|u| * |u|^p(x), r = |x - x0|.

    The integrand is taken as 0 where u = 0 (t^p log t -> 0) and at x = x0.
    """
    if not isinstance(field, RadialExponent):
        raise TypeError("log_term_integral needs a radial exponent field")
    sig = as_direction(sigma, field.dim)
    x0 = np.array(field.center)
    region = u.support if domain is None else domain

    def integrand(pts):
        d = pts - x0
        r = np.linalg.norm(d, axis=-1)
        val = np.abs(u.value(pts))
        p = field(pts)
        ok = (val > 0) & (r > 0)
        out = np.zeros(len(pts))
        rr = r[ok]
        out[ok] = field.profile.derivative(rr) * (d[ok] @ sig) ** 2 / rr * np.log(val[ok]) * val[ok] ** p[ok]
        return out

    return integrate(integrand, region, grid, workers=workers)

"""Compactly supported test functions with closed-form values and gradients."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import HypothesisError
from .geometry import Ball, Box, Domain


@dataclass(frozen=True)
class RadialProfile:
    """u(x) = f(|x - center|), with f' given; used by the radial fast path."""

    center: tuple
    f: Callable
    df: Callable
    breakpoints: tuple = ()


@dataclass(frozen=True)
class TestFunction:
    """A function with compact support, evaluated on (M, N) point arrays."""

    __test__ = False  # not a pytest class

    name: str
    params: dict
    support: Domain
    sup_norm_bound: float
    _value: Callable = field(repr=False)
    _gradient: Callable = field(repr=False)
    radial: RadialProfile | None = field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return self.support.dim

    def _pts(self, x):
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            x = x[None, :] if x.shape[0] == self.dim else x[:, None]
        return x

    def value(self, x) -> np.ndarray:
        x = self._pts(x)
        out = np.zeros(len(x))
        inside = self.support.indicator(x)
        if np.any(inside):
            out[inside] = self._value(x[inside])
        return out

    def gradient(self, x) -> np.ndarray:
        x = self._pts(x)
        out = np.zeros_like(x)
        inside = self.support.indicator(x)
        if np.any(inside):
            out[inside] = self._gradient(x[inside])
        return out

    def directional_derivative(self, x, sigma) -> np.ndarray:
        return self.gradient(x) @ np.asarray(sigma, dtype=float)

    def describe(self) -> str:
        inner = ",".join(f"{k}={_short(v)}" for k, v in self.params.items())
        return f"{self.name}({inner})"

    # -- derived functions ----------------------------------------------------
    def scaled(self, c: float) -> "TestFunction":
        radial = None
        if self.radial is not None:
            rp = self.radial
            radial = RadialProfile(rp.center, lambda r: c * rp.f(r), lambda r: c * rp.df(r), rp.breakpoints)
        return TestFunction(
            self.name,
            {**self.params, "scale": c},
            self.support,
            abs(c) * self.sup_norm_bound,
            lambda x: c * self._value(x),
            lambda x: c * self._gradient(x),
            radial,
        )

    def translated(self, t) -> "TestFunction":
        t = np.asarray(t, dtype=float)
        radial = None
        if self.radial is not None:
            rp = self.radial
            radial = RadialProfile(tuple(np.array(rp.center) + t), rp.f, rp.df, rp.breakpoints)
        return TestFunction(
            self.name,
            {**self.params, "shift": tuple(t)},
            self.support.translate(t),
            self.sup_norm_bound,
            lambda x: self._value(x - t),
            lambda x: self._gradient(x - t),
            radial,
        )

    def dilated(self, s: float) -> "TestFunction":
        """x -> u(x / s)."""
        radial = None
        if self.radial is not None:
            rp = self.radial
            radial = RadialProfile(
                tuple(np.array(rp.center) * s),
                lambda r: rp.f(r / s),
                lambda r: rp.df(r / s) / s,
                tuple(b * s for b in rp.breakpoints),
            )
        return TestFunction(
            self.name,
            {**self.params, "dilation": s},
            self.support.scale(s),
            self.sup_norm_bound,
            lambda x: self._value(x / s),
            lambda x: self._gradient(x / s) / s,
            radial,
        )


def _short(v):
    if isinstance(v, (list, tuple, np.ndarray)):
        return "(" + ",".join(_short(x) for x in v) + ")"
    if isinstance(v, float):
        return f"{v:g}"
    return str(v)


def _bump_1d(y):
    """exp(-1/(1 - y^2)) on |y| < 1 and its derivative in y."""
    s = 1.0 - y * y
    safe = np.where(s > 0, s, 1.0)
    v = np.where(s > 0, np.exp(-1.0 / safe), 0.0)
    dv = np.where(s > 0, -v * 2.0 * y / safe**2, 0.0)
    return v, dv


def bump(center, radius: float) -> TestFunction:
    """Standard mollifier exp(-1/(1 - |y|^2)), y = (x - center) / radius."""
    if not radius > 0:
        raise ValueError("bump radius must be positive")
    c = np.atleast_1d(np.asarray(center, dtype=float))

    def value(x):
        y2 = np.sum(((x - c) / radius) ** 2, axis=-1)
        s = np.where(y2 < 1, 1.0 - y2, 1.0)
        return np.where(y2 < 1, np.exp(-1.0 / s), 0.0)

    def gradient(x):
        y = (x - c) / radius
        y2 = np.sum(y * y, axis=-1)
        s = np.where(y2 < 1, 1.0 - y2, 1.0)
        u = np.where(y2 < 1, np.exp(-1.0 / s), 0.0)
        return -(u / (radius * s**2))[:, None] * 2.0 * y

    def f(r):
        y2 = (np.asarray(r, dtype=float) / radius) ** 2
        s = np.where(y2 < 1, 1.0 - y2, 1.0)
        return np.where(y2 < 1, np.exp(-1.0 / s), 0.0)

    def df(r):
        r = np.asarray(r, dtype=float)
        y = r / radius
        s = np.where(y * y < 1, 1.0 - y * y, 1.0)
        return np.where(y * y < 1, -np.exp(-1.0 / s) * 2.0 * y / (radius * s**2), 0.0)

    return TestFunction(
        "bump",
        {"center": tuple(c), "radius": float(radius)},
        Ball(c, radius),
        math.exp(-1.0),
        value,
        gradient,
        RadialProfile(tuple(c), f, df),
    )


def tensor_bump(box: Box) -> TestFunction:
    """Product of one-dimensional bumps, supported exactly on a finite box."""
    if not isinstance(box, Box) or not box.bounded():
        raise ValueError("tensor_bump needs a finite axis-aligned box")
    lo, hi = np.array(box.lo), np.array(box.hi)
    mid, half = (lo + hi) / 2.0, (hi - lo) / 2.0

    def value(x):
        v, _ = _bump_1d((x - mid) / half)
        return np.prod(v, axis=-1)

    def gradient(x):
        v, dv = _bump_1d((x - mid) / half)
        dv = dv / half
        out = np.empty_like(x)
        for k in range(x.shape[1]):
            others = np.prod(np.delete(v, k, axis=1), axis=1)
            out[:, k] = dv[:, k] * others
        return out

    return TestFunction(
        "tensor_bump",
        {"lo": tuple(lo), "hi": tuple(hi)},
        box,
        math.exp(-float(box.dim)),
        value,
        gradient,
    )


def _psi(s):
    safe = np.where(s > 0, s, 1.0)
    return np.where(s > 0, np.exp(-1.0 / safe), 0.0)


def _dpsi(s):
    safe = np.where(s > 0, s, 1.0)
    return np.where(s > 0, np.exp(-1.0 / safe) / safe**2, 0.0)


def cutoff(t):
    """Smooth step: 1 on [0, 1/2], 0 on [1, inf), psi(1-t) / (psi(1-t) + psi(t-1/2)) between."""
    t = np.asarray(t, dtype=float)
    a, b = _psi(1.0 - t), _psi(t - 0.5)
    den = np.where(a + b > 0, a + b, 1.0)
    return np.where(t <= 0.5, 1.0, np.where(t >= 1.0, 0.0, a / den))


def cutoff_derivative(t):
    t = np.asarray(t, dtype=float)
    a, b = _psi(1.0 - t), _psi(t - 0.5)
    den = np.where(a + b > 0, a + b, 1.0)
    d = (-_dpsi(1.0 - t) * b - a * _dpsi(t - 0.5)) / den**2
    return np.where((t > 0.5) & (t < 1.0), d, 0.0)


def hardy_family(dim: int, p: float, eps: float, delta: float, R: float, center=None) -> TestFunction:
    """Near-extremal for the sharp Hardy inequality.

    u(x) = g(max(r, delta)) * cutoff(r / R), r = |x - center|, with
    g(r) = r^(-(N - p)/p + eps).  Lipschitz: the gradient jumps at r = delta.
    """
    if not 1 <= p < dim:
        raise HypothesisError(f"hardy_family needs 1 <= p < N, got p = {p}, N = {dim}")
    if not 0 < delta < R:
        raise ValueError("hardy_family needs 0 < delta < R")
    if not eps > 0:
        raise ValueError("hardy_family needs eps > 0")
    c = np.zeros(dim) if center is None else np.atleast_1d(np.asarray(center, dtype=float))
    expo = -(dim - p) / p + eps

    def f(r):
        r = np.asarray(r, dtype=float)
        return np.maximum(r, delta) ** expo * cutoff(r / R)

    def df(r):
        r = np.asarray(r, dtype=float)
        rr = np.maximum(r, delta)
        dg = np.where(r > delta, expo * rr ** (expo - 1.0), 0.0)
        return dg * cutoff(r / R) + rr**expo * cutoff_derivative(r / R) / R

    def value(x):
        return f(np.linalg.norm(x - c, axis=-1))

    def gradient(x):
        d = x - c
        r = np.linalg.norm(d, axis=-1)
        safe = np.where(r > 0, r, 1.0)
        return (np.where(r > 0, df(r), 0.0) / safe)[:, None] * d

    bound = max(delta**expo, R**expo)
    return TestFunction(
        "hardy_family",
        {"N": dim, "p": p, "eps": eps, "delta": delta, "R": R},
        Ball(c, R),
        bound,
        value,
        gradient,
        RadialProfile(tuple(c), f, df, (delta, R / 2.0)),
    )


def clamp_unit(u: TestFunction) -> TestFunction:
    """Rescale so that sup|u| <= 1; unchanged when the bound is already <= 1."""
    factor = 1.0 / max(1.0, u.sup_norm_bound)
    if factor == 1.0:
        return u
    return u.scaled(factor)


FAMILIES = ("bump", "tensor_bump", "hardy_family")


def function_from_dict(spec: dict) -> TestFunction:
    """Build a test function from {"kind": ..., params}; optional "scale" and "clamp"."""
    spec = dict(spec)
    kind = spec.pop("kind", None)
    scale = spec.pop("scale", None)
    clamp = spec.pop("clamp", False)
    if kind == "bump":
        _check_keys(kind, spec, {"center", "radius"})
        u = bump(spec["center"], float(spec["radius"]))
    elif kind == "tensor_bump":
        _check_keys(kind, spec, {"lo", "hi"})
        u = tensor_bump(Box(spec["lo"], spec["hi"]))
    elif kind == "hardy_family":
        _check_keys(kind, spec, {"N", "p", "eps", "delta", "R"}, optional={"center"})
        u = hardy_family(int(spec["N"]), float(spec["p"]), float(spec["eps"]), float(spec["delta"]), float(spec["R"]), spec.get("center"))
    else:
        raise ValueError(f"function.kind must be one of {FAMILIES}, got {kind!r}")
    if scale is not None:
        u = u.scaled(float(scale))
    if clamp:
        u = clamp_unit(u)
    return u


def _check_keys(kind, spec, required, optional=frozenset()):
    extra = set(spec) - required - set(optional)
    missing = required - set(spec)
    if extra:
        raise ValueError(f"unknown keys for function {kind}: {sorted(extra)}")
    if missing:
        raise ValueError(f"missing keys for function {kind}: {sorted(missing)}")

"""Closed-form domains in R^N and the geometric quantities entering the constants.

Every domain is a primitive (box, ball, annulus, strip) or a finite union of
primitives.  Support functions, projection intervals, distance bounds and
diameters are exact; only the circumradius of a union is found by a search.

Bounded primitives also expose *generators*: a list of balls (points with
radii, radius 0 for box corners) whose convex hull equals the convex hull of
the primitive.  Diameter and circumradius reduce to these generators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

UNIT_TOL = 1e-12
CLOSED_TOL = 1e-12


def as_direction(sigma, dim: int | None = None) -> np.ndarray:
    """Validate a unit vector; scalars are accepted in one dimension."""
    s = np.atleast_1d(np.asarray(sigma, dtype=float))
    if s.ndim != 1:
        raise ValueError("direction must be a 1-d vector")
    if dim is not None and s.shape[0] != dim:
        raise ValueError(f"direction has dimension {s.shape[0]}, expected {dim}")
    norm = float(np.linalg.norm(s))
    if abs(norm - 1.0) > UNIT_TOL:
        raise ValueError(f"direction must have unit norm, got |sigma| = {norm!r}")
    return s


def unit(v) -> np.ndarray:
    v = np.atleast_1d(np.asarray(v, dtype=float))
    return v / np.linalg.norm(v)


def axes(dim: int) -> list[np.ndarray]:
    return [np.eye(dim)[i] for i in range(dim)]


def _points(x, dim):
    x = np.asarray(x, dtype=float)
    if x.ndim == 1 and dim == 1 and x.shape[0] != 1:
        x = x[:, None]
    x = np.atleast_2d(x)
    if x.shape[-1] != dim:
        raise ValueError(f"points have dimension {x.shape[-1]}, domain has {dim}")
    return x


class Domain:
    """Base class.  Subclasses are frozen dataclasses."""

    dim: int

    # -- primitives override these --------------------------------------
    def support(self, sigma) -> float:
        """sup over the domain of x . sigma (may be +inf)."""
        raise NotImplementedError

    def indicator(self, x, closed: bool = False) -> np.ndarray:
        raise NotImplementedError

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def distance_range(self, x0) -> tuple[float, float]:
        """(inf, sup) of |x - x0| over the domain."""
        raise NotImplementedError

    def generators(self) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def translate(self, t) -> "Domain":
        raise NotImplementedError

    def scale(self, s: float) -> "Domain":
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError

    # -- shared -------------------------------------------------------------
    def bounded(self) -> bool:
        lo, hi = self.bounding_box()
        return bool(np.all(np.isfinite(lo)) and np.all(np.isfinite(hi)))

    def connected(self) -> bool:
        return True

    def __contains__(self, x) -> bool:
        return bool(self.indicator(np.asarray(x, dtype=float)[None, :])[0])


def _fmt(v: float):
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return float(v)


@dataclass(frozen=True)
class Box(Domain):
    lo: tuple
    hi: tuple

    def __post_init__(self):
        lo = tuple(float(v) for v in np.atleast_1d(self.lo))
        hi = tuple(float(v) for v in np.atleast_1d(self.hi))
        if len(lo) != len(hi) or not lo:
            raise ValueError("box bounds must be non-empty and of equal length")
        if any(not a < b for a, b in zip(lo, hi)):
            raise ValueError(f"box needs lo < hi on every axis, got {lo} / {hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self):
        return len(self.lo)

    def support(self, sigma):
        s = as_direction(sigma, self.dim)
        total = 0.0
        for si, a, b in zip(s, self.lo, self.hi):
            if si > 0:
                total += si * b
            elif si < 0:
                total += si * a
        return total

    def indicator(self, x, closed=False):
        x = _points(x, self.dim)
        lo, hi = np.array(self.lo), np.array(self.hi)
        if closed:
            return np.all((x >= lo - CLOSED_TOL) & (x <= hi + CLOSED_TOL), axis=-1)
        return np.all((x > lo) & (x < hi), axis=-1)

    def bounding_box(self):
        return np.array(self.lo), np.array(self.hi)

    def distance_range(self, x0):
        x0 = np.asarray(x0, dtype=float)
        lo, hi = np.array(self.lo), np.array(self.hi)
        near = np.linalg.norm(x0 - np.clip(x0, lo, hi))
        if not self.bounded():
            return float(near), math.inf
        far = np.linalg.norm(np.maximum(np.abs(x0 - lo), np.abs(x0 - hi)))
        return float(near), float(far)

    def generators(self):
        lo, hi = np.array(self.lo), np.array(self.hi)
        corners = np.array(np.meshgrid(*zip(lo, hi), indexing="ij")).reshape(self.dim, -1).T
        return corners, np.zeros(len(corners))

    def translate(self, t):
        t = np.asarray(t, dtype=float)
        return Box(np.array(self.lo) + t, np.array(self.hi) + t)

    def scale(self, s):
        return Box(np.array(self.lo) * s, np.array(self.hi) * s)

    def to_dict(self):
        return {"kind": "box", "lo": [_fmt(v) for v in self.lo], "hi": [_fmt(v) for v in self.hi]}


@dataclass(frozen=True)
class Ball(Domain):
    center: tuple
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(v) for v in np.atleast_1d(self.center)))
        if not self.radius > 0:
            raise ValueError("ball radius must be positive")
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def dim(self):
        return len(self.center)

    def support(self, sigma):
        s = as_direction(sigma, self.dim)
        return float(np.dot(self.center, s)) + self.radius

    def indicator(self, x, closed=False):
        x = _points(x, self.dim)
        r2 = np.sum((x - np.array(self.center)) ** 2, axis=-1)
        if closed:
            return r2 <= (self.radius + CLOSED_TOL) ** 2
        return r2 < self.radius**2

    def bounding_box(self):
        c = np.array(self.center)
        return c - self.radius, c + self.radius

    def distance_range(self, x0):
        d = float(np.linalg.norm(np.asarray(x0, dtype=float) - np.array(self.center)))
        return max(0.0, d - self.radius), d + self.radius

    def generators(self):
        return np.array([self.center]), np.array([self.radius])

    def translate(self, t):
        return Ball(np.array(self.center) + np.asarray(t, dtype=float), self.radius)

    def scale(self, s):
        return Ball(np.array(self.center) * s, self.radius * s)

    def to_dict(self):
        return {"kind": "ball", "center": list(self.center), "radius": self.radius}


@dataclass(frozen=True)
class Annulus(Domain):
    center: tuple
    inner: float
    outer: float

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(v) for v in np.atleast_1d(self.center)))
        if not 0 < self.inner < self.outer:
            raise ValueError("annulus needs 0 < inner < outer")
        object.__setattr__(self, "inner", float(self.inner))
        object.__setattr__(self, "outer", float(self.outer))

    @property
    def dim(self):
        return len(self.center)

    def connected(self):
        return self.dim > 1

    def support(self, sigma):
        s = as_direction(sigma, self.dim)
        return float(np.dot(self.center, s)) + self.outer

    def indicator(self, x, closed=False):
        x = _points(x, self.dim)
        r2 = np.sum((x - np.array(self.center)) ** 2, axis=-1)
        if closed:
            return (r2 >= (self.inner - CLOSED_TOL) ** 2) & (r2 <= (self.outer + CLOSED_TOL) ** 2)
        return (r2 > self.inner**2) & (r2 < self.outer**2)

    def bounding_box(self):
        c = np.array(self.center)
        return c - self.outer, c + self.outer

    def distance_range(self, x0):
        d = float(np.linalg.norm(np.asarray(x0, dtype=float) - np.array(self.center)))
        if d < self.inner:
            near = self.inner - d
        elif d > self.outer:
            near = d - self.outer
        else:
            near = 0.0
        return near, d + self.outer

    def generators(self):
        return np.array([self.center]), np.array([self.outer])

    def translate(self, t):
        return Annulus(np.array(self.center) + np.asarray(t, dtype=float), self.inner, self.outer)

    def scale(self, s):
        return Annulus(np.array(self.center) * s, self.inner * s, self.outer * s)

    def to_dict(self):
        return {"kind": "annulus", "center": list(self.center), "inner": self.inner, "outer": self.outer}


@dataclass(frozen=True)
class Strip(Domain):
    """The slab {x : a < x . direction < b}, unbounded in every transverse direction."""

    direction: tuple
    a: float
    b: float

    def __post_init__(self):
        object.__setattr__(self, "direction", tuple(float(v) for v in as_direction(self.direction)))
        if not self.a < self.b:
            raise ValueError("strip needs a < b")
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))

    @property
    def dim(self):
        return len(self.direction)

    def support(self, sigma):
        s = as_direction(sigma, self.dim)
        c = float(np.dot(s, self.direction))
        if c >= 1.0 - UNIT_TOL:
            return self.b
        if c <= -1.0 + UNIT_TOL:
            return -self.a
        return math.inf

    def indicator(self, x, closed=False):
        x = _points(x, self.dim)
        t = x @ np.array(self.direction)
        if closed:
            return (t >= self.a - CLOSED_TOL) & (t <= self.b + CLOSED_TOL)
        return (t > self.a) & (t < self.b)

    def bounding_box(self):
        lo = np.full(self.dim, -math.inf)
        hi = np.full(self.dim, math.inf)
        for i in range(self.dim):
            e = np.zeros(self.dim)
            e[i] = 1.0
            hi[i] = self.support(e)
            lo[i] = -self.support(-e)
        return lo, hi

    def distance_range(self, x0):
        t = float(np.dot(np.asarray(x0, dtype=float), self.direction))
        near = max(0.0, self.a - t, t - self.b)
        if self.dim == 1:
            return near, max(abs(t - self.a), abs(t - self.b))
        return near, math.inf

    def generators(self):
        if self.dim == 1:
            n = self.direction[0]
            return np.array([[self.a * n], [self.b * n]]), np.zeros(2)
        raise ValueError("a strip in dimension >= 2 is unbounded")

    def translate(self, t):
        shift = float(np.dot(np.asarray(t, dtype=float), self.direction))
        return Strip(self.direction, self.a + shift, self.b + shift)

    def scale(self, s):
        return Strip(self.direction, self.a * s, self.b * s)

    def to_dict(self):
        return {"kind": "strip", "direction": list(self.direction), "a": self.a, "b": self.b}


@dataclass(frozen=True)
class Union(Domain):
    members: tuple

    def __post_init__(self):
        flat = []
        for m in self.members:
            flat.extend(m.members if isinstance(m, Union) else [m])
        if not flat:
            raise ValueError("union needs at least one member")
        dims = {m.dim for m in flat}
        if len(dims) != 1:
            raise ValueError("union members must share a dimension")
        object.__setattr__(self, "members", tuple(flat))

    @property
    def dim(self):
        return self.members[0].dim

    def connected(self):
        # Conservative: only a single connected member counts as connected.
        return len(self.members) == 1 and self.members[0].connected()

    def support(self, sigma):
        return max(m.support(sigma) for m in self.members)

    def indicator(self, x, closed=False):
        out = self.members[0].indicator(x, closed)
        for m in self.members[1:]:
            out = out | m.indicator(x, closed)
        return out

    def bounding_box(self):
        boxes = [m.bounding_box() for m in self.members]
        return np.min([b[0] for b in boxes], axis=0), np.max([b[1] for b in boxes], axis=0)

    def distance_range(self, x0):
        ranges = [m.distance_range(x0) for m in self.members]
        return min(r[0] for r in ranges), max(r[1] for r in ranges)

    def generators(self):
        gens = [m.generators() for m in self.members]
        return np.concatenate([g[0] for g in gens]), np.concatenate([g[1] for g in gens])

    def translate(self, t):
        return Union(tuple(m.translate(t) for m in self.members))

    def scale(self, s):
        return Union(tuple(m.scale(s) for m in self.members))

    def to_dict(self):
        return {"kind": "union", "members": [m.to_dict() for m in self.members]}


def whole_space(dim: int) -> Box:
    return Box([-math.inf] * dim, [math.inf] * dim)


# ---------------------------------------------------------------------------
# geometric constants


def projection_interval(domain: Domain, sigma) -> tuple[float, float]:
    """Closed hull [a, b] of {x . sigma : x in domain}; sides may be infinite."""
    s = as_direction(sigma, domain.dim)
    return -domain.support(-s), domain.support(s)


def directional_constant(domain: Domain, sigma) -> float:
    """inf over x0 of sup over the domain of |(x - x0) . sigma|, i.e. half the projected width."""
    a, b = projection_interval(domain, sigma)
    if math.isinf(a) or math.isinf(b):
        return math.inf
    return (b - a) / 2.0


def diameter(domain: Domain) -> float:
    if not domain.bounded():
        return math.inf
    pts, rad = domain.generators()
    diff = pts[:, None, :] - pts[None, :, :]
    return float(np.max(np.linalg.norm(diff, axis=-1) + rad[:, None] + rad[None, :]))


def _farthest(centers, pts, rad):
    d = np.linalg.norm(centers[:, None, :] - pts[None, :, :], axis=-1) + rad[None, :]
    return d.max(axis=1)


def circumradius_bracket(domain: Domain, rel_tol: float = 1e-10):
    """Smallest enclosing ball of the closure: returns (lower, upper, center).

    The objective c -> max_k |c - p_k| + r_k is convex and 1-Lipschitz, so
    refining a sample grid around the incumbent gives an upper bound whose
    gap to the optimum is at most half the final grid diagonal.
    """
    if not domain.bounded():
        return math.inf, math.inf, None
    if isinstance(domain, Box):
        lo, hi = domain.bounding_box()
        r = float(np.linalg.norm(hi - lo)) / 2.0
        return r, r, (lo + hi) / 2.0
    if isinstance(domain, (Ball, Annulus)):
        r = domain.radius if isinstance(domain, Ball) else domain.outer
        return r, r, np.array(domain.center)

    pts, rad = domain.generators()
    dim = pts.shape[1]
    diam = diameter(domain)
    lo, hi = domain.bounding_box()
    best = (lo + hi) / 2.0
    half = float(np.max(hi - lo)) / 2.0
    per_axis = 21 if dim <= 3 else 7
    offsets = np.linspace(-1.0, 1.0, per_axis)
    grid_unit = np.array(np.meshgrid(*([offsets] * dim), indexing="ij")).reshape(dim, -1).T
    while True:
        cand = best + half * grid_unit
        vals = _farthest(cand, pts, rad)
        k = int(np.argmin(vals))
        best, upper = cand[k], float(vals[k])
        h = 2.0 * half / (per_axis - 1)
        if h <= rel_tol * diam:
            break
        half = 2.0 * h
    lower = max(diam / 2.0, upper - h * math.sqrt(dim) / 2.0)
    return lower, upper, best


def circumradius(domain: Domain) -> float:
    """Radius of the smallest ball containing the closure of the domain."""
    return circumradius_bracket(domain)[1]


def best_direction(domain: Domain, basis: Sequence) -> tuple[int, np.ndarray, float]:
    """Basis direction with the smallest directional constant; ties go to the lowest index."""
    if len(basis) == 0:
        raise ValueError("basis must be non-empty")
    best_i, best_c = 0, directional_constant(domain, basis[0])
    for i in range(1, len(basis)):
        c = directional_constant(domain, basis[i])
        if c < best_c:
            best_i, best_c = i, c
    return best_i, as_direction(basis[best_i], domain.dim), best_c


# ---------------------------------------------------------------------------
# serialization


def _num(v):
    if isinstance(v, str):
        if v in ("inf", "+inf"):
            return math.inf
        if v == "-inf":
            return -math.inf
        raise ValueError(f"unrecognised number {v!r}")
    return float(v)


def _vec(v):
    return [_num(x) for x in np.atleast_1d(v)] if not isinstance(v, (list, tuple)) else [_num(x) for x in v]


_DOMAIN_KEYS = {
    "box": {"lo", "hi"},
    "ball": {"center", "radius"},
    "annulus": {"center", "inner", "outer"},
    "strip": {"direction", "a", "b"},
    "union": {"members"},
}


def domain_from_dict(spec: dict) -> Domain:
    kind = spec.get("kind")
    if kind not in _DOMAIN_KEYS:
        raise ValueError(f"domain.kind must be one of {sorted(_DOMAIN_KEYS)}, got {kind!r}")
    extra = set(spec) - _DOMAIN_KEYS[kind] - {"kind"}
    missing = _DOMAIN_KEYS[kind] - set(spec)
    if extra:
        raise ValueError(f"unknown domain keys for {kind}: {sorted(extra)}")
    if missing:
        raise ValueError(f"missing domain keys for {kind}: {sorted(missing)}")
    if kind == "box":
        return Box(_vec(spec["lo"]), _vec(spec["hi"]))
    if kind == "ball":
        return Ball(_vec(spec["center"]), _num(spec["radius"]))
    if kind == "annulus":
        return Annulus(_vec(spec["center"]), _num(spec["inner"]), _num(spec["outer"]))
    if kind == "strip":
        return Strip(unit(_vec(spec["direction"])), _num(spec["a"]), _num(spec["b"]))
    return Union(tuple(domain_from_dict(m) for m in spec["members"]))

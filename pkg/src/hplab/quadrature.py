"""Midpoint-rule quadrature on tensor grids, and Simpson quadrature for radial integrands.

Every integral is computed at two resolutions.  The reported error is the
Richardson difference of the pair, plus the mass of cells cut by the domain
boundary (where the midpoint rule is only first order), plus, when cells
around a singular point were dropped, an analytic bound on their mass.

Cell sums are accumulated slab by slab in a fixed order, so the result does
not depend on the number of worker threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from scipy import ndimage

from .errors import HypothesisError
from .geometry import Domain

CHUNK_POINTS = 1 << 20
MIN_CELLS = 8


def sphere_area(dim: int) -> float:
    """Surface measure of the unit sphere in R^dim (2 when dim = 1)."""
    return dim * math.pi ** (dim / 2) / math.gamma(dim / 2 + 1)


@dataclass(frozen=True)
class IntegralResult:
    value: float
    error_estimate: float
    coarse_value: float | None = None
    exclusion_bound: float = 0.0
    n: tuple | None = None
    boundary_bound: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise ValueError(f"integral value is not finite: {self.value}")
        if self.error_estimate < 0:
            raise ValueError("error estimate must be nonnegative")

    @property
    def relative_error(self) -> float:
        if self.value == 0:
            return 0.0 if self.error_estimate == 0 else math.inf
        return self.error_estimate / abs(self.value)


@dataclass(frozen=True)
class Grid:
    lo: tuple
    hi: tuple
    n: tuple
    singular_point: tuple | None = None
    singular_gamma: float = 0.0
    exclusion_multiplier: float = 2.0

    def __post_init__(self):
        lo = tuple(float(v) for v in np.atleast_1d(self.lo))
        hi = tuple(float(v) for v in np.atleast_1d(self.hi))
        n = np.atleast_1d(self.n).astype(int)
        if n.size == 1:
            n = np.repeat(n, len(lo))
        if not (len(lo) == len(hi) == len(n)):
            raise ValueError("grid bounds and cell counts must agree in length")
        if not all(math.isfinite(v) for v in lo + hi):
            raise ValueError("grid bounding box must be finite")
        if any(not a < b for a, b in zip(lo, hi)):
            raise ValueError("grid needs lo < hi on every axis")
        if np.any(n < MIN_CELLS):
            raise ValueError(f"grid needs at least {MIN_CELLS} cells per axis, got {tuple(n)}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        object.__setattr__(self, "n", tuple(int(v) for v in n))
        if self.singular_point is not None:
            object.__setattr__(self, "singular_point", tuple(float(v) for v in np.atleast_1d(self.singular_point)))

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def h(self) -> np.ndarray:
        return (np.array(self.hi) - np.array(self.lo)) / np.array(self.n)

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.h))

    @property
    def exclusion_radius(self) -> float:
        return self.exclusion_multiplier * float(np.max(self.h))

    @property
    def excluded_outer_radius(self) -> float:
        """Radius of a ball around the singular point containing every excluded cell."""
        return self.exclusion_radius + float(np.linalg.norm(self.h))

    def refined(self) -> "Grid":
        return replace(self, n=tuple(2 * v for v in self.n))

    def with_singularity(self, point, gamma: float) -> "Grid":
        if point is None or gamma <= 0:
            return replace(self, singular_point=None, singular_gamma=0.0)
        return replace(self, singular_point=tuple(np.atleast_1d(point).astype(float)), singular_gamma=float(gamma))

    def translate(self, t) -> "Grid":
        t = np.asarray(t, dtype=float)
        sp = None if self.singular_point is None else np.array(self.singular_point) + t
        return replace(self, lo=np.array(self.lo) + t, hi=np.array(self.hi) + t, singular_point=sp)

    def centers(self, axis: int) -> np.ndarray:
        return self.lo[axis] + (np.arange(self.n[axis]) + 0.5) * self.h[axis]

    @classmethod
    def covering(cls, support: Domain, domain: Domain | None = None, n=64, **kw) -> "Grid":
        """Grid over the bounding box of ``support`` clipped to that of ``domain``."""
        lo, hi = support.bounding_box()
        if domain is not None:
            dlo, dhi = domain.bounding_box()
            lo, hi = np.maximum(lo, dlo), np.minimum(hi, dhi)
        return cls(lo, hi, n, **kw)


def _excluded_mask(pts, grid: Grid):
    x0 = np.array(grid.singular_point)
    gap = np.maximum(np.abs(pts - x0) - grid.h / 2.0, 0.0)
    # cells at exactly distance rho are common (x0 on a grid line); the slack
    # keeps that decision stable under translation of grid and singular point
    return np.sum(gap**2, axis=-1) < (grid.exclusion_radius * (1.0 + 1e-9)) ** 2


def _chunks(grid: Grid):
    rows = max(1, CHUNK_POINTS // max(1, int(np.prod(grid.n[1:]))))
    return [(s, min(s + rows, grid.n[0])) for s in range(0, grid.n[0], rows)]


def _chunk_points(grid: Grid, start: int, stop: int):
    coords = [grid.centers(0)[start:stop]] + [grid.centers(k) for k in range(1, grid.dim)]
    mesh = np.meshgrid(*coords, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def _midpoint_sum(f, domain: Domain, grid: Grid, workers: int = 1):
    """Midpoint sum over cells whose centers lie in the domain.

    Returns (sum, number of excluded cells inside the domain, |f|-mass of
    inside cells with an axis neighbour outside the domain).
    """
    singular = grid.singular_point is not None and grid.singular_gamma > 0
    cross = ndimage.generate_binary_structure(grid.dim, 1)

    def one(bounds):
        start, stop = bounds
        # one halo row on each side so cut cells are found across slab edges
        s0, e0 = max(start - 1, 0), min(stop + 1, grid.n[0])
        inside = domain.indicator(_chunk_points(grid, s0, e0)).reshape((e0 - s0,) + grid.n[1:])
        cut = inside & ~ndimage.binary_erosion(inside, structure=cross, border_value=1)
        rows = slice(start - s0, start - s0 + stop - start)
        keep, cut = inside[rows].reshape(-1), cut[rows].reshape(-1)
        pts = _chunk_points(grid, start, stop)
        dropped = 0
        if singular:
            ex = _excluded_mask(pts, grid) & keep
            dropped = int(np.count_nonzero(ex))
            keep &= ~ex
        if not np.any(keep):
            return 0.0, dropped, 0.0
        vals = np.asarray(f(pts[keep]), dtype=float)
        return float(np.sum(vals)), dropped, float(np.sum(np.abs(vals[cut[keep]])))

    chunks = _chunks(grid)
    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(one, chunks))
    else:
        parts = [one(c) for c in chunks]
    total = math.fsum(p[0] for p in parts) * grid.cell_volume
    boundary = math.fsum(p[2] for p in parts) * grid.cell_volume
    return total, sum(p[1] for p in parts), boundary


def _estimate_regular_bound(f, grid: Grid) -> float:
    """Sample sup of |f(x)| |x - x0|^gamma on shells inside the excluded ball."""
    x0 = np.array(grid.singular_point)
    dim = grid.dim
    dirs = [np.eye(dim)[i] * s for i in range(dim) for s in (1.0, -1.0)]
    if dim > 1:
        dirs += [np.array(v) / math.sqrt(dim) for v in np.array(np.meshgrid(*([[-1.0, 1.0]] * dim))).reshape(dim, -1).T]
    radii = grid.excluded_outer_radius * np.linspace(0.05, 1.0, 12)
    pts = np.array([x0 + r * d for r in radii for d in dirs])
    r = np.linalg.norm(pts - x0, axis=-1)
    vals = np.abs(np.asarray(f(pts), dtype=float)) * r**grid.singular_gamma
    vals = vals[np.isfinite(vals)]
    return float(vals.max()) if vals.size else 0.0


def integrate(f, domain: Domain, grid: Grid, regular_bound: float | None = None, workers: int = 1) -> IntegralResult:
    """Integrate ``f`` over ``domain`` by the midpoint rule at n and 2n cells per axis.

    ``f`` maps an (M, N) array of points to M values.  If the grid carries a
    singular point with exponent gamma, cells touching B(x0, rho) are skipped
    and ``regular_bound`` (a bound on |f| |x - x0|^gamma near x0; estimated by
    sampling when omitted) enters the analytic bound on the skipped mass.
    """
    if grid.dim != domain.dim:
        raise ValueError("grid and domain dimensions differ")
    gamma = grid.singular_gamma
    if grid.singular_point is not None and gamma >= grid.dim:
        raise HypothesisError(f"singular exponent gamma = {gamma} >= N = {grid.dim} is not integrable")
    coarse, _, _ = _midpoint_sum(f, domain, grid, workers)
    fine_grid = grid.refined()
    fine, dropped, boundary = _midpoint_sum(f, domain, fine_grid, workers)
    err = abs(fine - coarse) / 3.0 + boundary
    excl = 0.0
    if dropped:
        g = _estimate_regular_bound(f, fine_grid) if regular_bound is None else regular_bound
        rho = fine_grid.excluded_outer_radius
        excl = g * sphere_area(grid.dim) * rho ** (grid.dim - gamma) / (grid.dim - gamma)
    return IntegralResult(fine, err + excl, coarse, excl, fine_grid.n, boundary)


def _pow(a, p):
    """|a|^p with 0^p = 0 (p >= 1)."""
    return np.abs(a) ** p


def _exponent_at(field, pts):
    if callable(field):
        return np.asarray(field(pts), dtype=float)
    return float(field)


def modular_integral(u, field, weight, domain: Domain, grid: Grid, regular_bound=None, workers: int = 1) -> IntegralResult:
    """Integral of |u(x)|^p(x) weight(x); ``field`` is a number or a callable exponent."""

    def integrand(pts):
        vals = _pow(u.value(pts), _exponent_at(field, pts))
        if weight is not None:
            vals = vals * weight(pts)
        return vals

    return integrate(integrand, domain, grid, regular_bound, workers)


def gradient_power(grad, p, norm: str = "lp"):
    """|grad u|^p under the l^p convention (sum_i |d_i u|^p) or the Euclidean norm."""
    if norm == "lp":
        p_col = p[:, None] if np.ndim(p) else p
        return np.sum(np.abs(grad) ** p_col, axis=-1)
    if norm == "euclidean":
        return np.linalg.norm(grad, axis=-1) ** p
    raise ValueError(f"norm must be 'lp' or 'euclidean', got {norm!r}")


def gradient_modular_integral(
    u,
    field,
    domain: Domain,
    grid: Grid,
    weight=None,
    x0=None,
    radial_power=None,
    sigma=None,
    norm: str = "lp",
    regular_bound=None,
    workers: int = 1,
) -> IntegralResult:
    """Gradient-side modular.

    With ``sigma``: |d_sigma u|^p(x), times |(x - x0) . sigma|^p(x) when x0 is given.
    Without: |grad u|^p(x) |x - x0|^s(x), with s = ``radial_power`` (number or
    callable; omitted means no radial factor).  ``weight`` multiplies either form.
    """
    if radial_power is not None and x0 is None:
        raise ValueError("radial_power needs the center x0")
    x0a = None if x0 is None else np.asarray(x0, dtype=float)
    sig = None if sigma is None else np.asarray(sigma, dtype=float)

    def integrand(pts):
        p = _exponent_at(field, pts)
        g = u.gradient(pts)
        if sig is not None:
            vals = _pow(g @ sig, p)
            if x0a is not None:
                vals = vals * _pow((pts - x0a) @ sig, p)
        else:
            vals = gradient_power(g, p, norm)
            if radial_power is not None:
                s = _exponent_at(radial_power, pts)
                r = np.linalg.norm(pts - x0a, axis=-1)
                with np.errstate(divide="ignore", invalid="ignore"):
                    factor = r**s
                vals = vals * factor
        if weight is not None:
            vals = vals * weight(pts)
        return vals

    return integrate(integrand, domain, grid, regular_bound, workers)


# ---------------------------------------------------------------------------
# radial integrals


def _simpson(vals, h):
    return h / 3.0 * (vals[0] + vals[-1] + 4.0 * np.sum(vals[1:-1:2]) + 2.0 * np.sum(vals[2:-1:2]))


def _segment(g, a, b, n, mapping):
    if mapping == "log":
        s = np.linspace(math.log(a), math.log(b), n + 1)
        r = np.exp(s)
        with np.errstate(all="ignore"):
            vals = g(r) * r
        h = (math.log(b) - math.log(a)) / n
    else:
        r = np.linspace(a, b, n + 1)
        with np.errstate(all="ignore"):
            vals = g(r)
        h = (b - a) / n
    vals = np.asarray(vals, dtype=float)
    # removable endpoint singularities (e.g. r^-2 * r^2 at r = 0): quadratic extrapolation
    if not math.isfinite(vals[0]):
        vals[0] = 3 * vals[1] - 3 * vals[2] + vals[3]
    if not math.isfinite(vals[-1]):
        vals[-1] = 3 * vals[-2] - 3 * vals[-3] + vals[-4]
    return _simpson(vals, h)


def radial_integrate(
    f_radial, dim: int, r_lo: float, r_hi: float, n: int, breakpoints=(), mapping: str = "linear", with_jacobian: bool = False
) -> IntegralResult:
    """|S^(N-1)| * integral of f(r) r^(N-1) dr over [r_lo, r_hi] by composite Simpson.

    Each segment between breakpoints gets n intervals; the pair (n, 2n) gives
    the Richardson estimate |S_2n - S_n| / 15.  ``mapping='log'`` substitutes
    r = e^s on every segment (needs r_lo > 0).  With ``with_jacobian`` the
    caller's f already contains the r^(N-1) factor, which avoids overflow when
    a singular weight cancels against it.
    """
    if not 0 <= r_lo < r_hi:
        raise ValueError("need 0 <= r_lo < r_hi")
    if mapping == "log" and r_lo <= 0:
        raise ValueError("log mapping needs r_lo > 0")
    n = int(n) + int(n) % 2
    edges = [r_lo] + sorted(b for b in breakpoints if r_lo < b < r_hi) + [r_hi]

    def g(r):
        vals = np.asarray(f_radial(r), dtype=float)
        return vals if with_jacobian else vals * r ** (dim - 1)

    coarse = fine = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        coarse += _segment(g, a, b, n, mapping)
        fine += _segment(g, a, b, 2 * n, mapping)
    area = sphere_area(dim)
    return IntegralResult(area * fine, area * abs(fine - coarse) / 15.0, area * coarse, 0.0, (2 * n,))

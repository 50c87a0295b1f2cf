"""Discrete estimates of optimal constants, used to measure how sharp the certified ones are.

For p = 2 the best constant is 1 / lambda_min of the generalized eigenproblem
K y = lambda M y (stiffness against mass).  For other p a normalized gradient
ascent on the discrete ratio LHS_h / RHS_h gives lower bounds only.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import ndimage, sparse
from scipy.sparse.linalg import cg

from . import geometry as geo
from .errors import ConvergenceError, HypothesisError
from .exponents import ConstantExponent
from .functions import TestFunction
from .quadrature import IntegralResult, radial_integrate
from .verifier import GridSettings, InequalityInstance, certified_constant_for, verify
from .weights import evaluate_weight

RADIAL_KINDS = ("GeneralWeighted", "GammaHardy", "SharpHardy", "DualHardyGamma", "DualHardyPlain", "ClassicalPoincare")


@dataclass(frozen=True)
class NodeGrid:
    """Tensor grid of (n + 1)^N nodes over [lo, hi]."""

    lo: tuple
    hi: tuple
    n: int

    def __post_init__(self):
        object.__setattr__(self, "lo", tuple(float(v) for v in np.atleast_1d(self.lo)))
        object.__setattr__(self, "hi", tuple(float(v) for v in np.atleast_1d(self.hi)))
        if not all(math.isfinite(a) and math.isfinite(b) and a < b for a, b in zip(self.lo, self.hi)):
            raise ValueError("NodeGrid needs a finite, non-degenerate box")
        if self.n < 4:
            raise ValueError("NodeGrid needs n >= 4")

    @classmethod
    def over(cls, domain: geo.Domain, n: int, box: geo.Box | None = None) -> "NodeGrid":
        lo, hi = (box.lo, box.hi) if box is not None else domain.bounding_box()
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise ValueError("unbounded domain: pass an explicit box")
        return cls(lo, hi, n)

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def shape(self) -> tuple:
        return (self.n + 1,) * self.dim

    @property
    def h(self) -> np.ndarray:
        return (np.array(self.hi) - np.array(self.lo)) / self.n

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.h))

    def nodes(self) -> np.ndarray:
        axes = [np.linspace(a, b, self.n + 1) for a, b in zip(self.lo, self.hi)]
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, self.dim)

    def active_mask(self, domain: geo.Domain) -> np.ndarray:
        """Nodes all of whose 3^N neighbours lie in the closed domain; a discrete compact support."""
        inside = domain.indicator(self.nodes(), closed=True).reshape(self.shape)
        inside = ndimage.binary_erosion(inside, structure=np.ones((3,) * self.dim), border_value=0)
        return inside


@dataclass
class GridFunction:
    grid: NodeGrid
    values: np.ndarray  # shape grid.shape, zero off the active set
    active: np.ndarray

    @classmethod
    def from_function(cls, u: TestFunction, grid: NodeGrid, domain: geo.Domain) -> "GridFunction":
        active = grid.active_mask(domain)
        vals = u.value(grid.nodes()).reshape(grid.shape)
        return cls(grid, np.where(active, vals, 0.0), active)

    def dump(self, path) -> tuple[Path, Path]:
        """Flat little-endian float64 array plus a JSON sidecar with shape, spacing and origin."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.values.astype("<f8").tofile(path)
        side = path.with_suffix(path.suffix + ".json")
        side.write_text(
            json.dumps(
                {"shape": list(self.values.shape), "spacing": self.grid.h.tolist(), "origin": list(self.grid.lo), "dtype": "<f8", "order": "C"},
                indent=2,
            )
        )
        return path, side


@dataclass
class ExtremalResult:
    estimated_optimal_constant: float
    certified_constant: float
    iterations: int
    residual: float
    method: str
    tolerance: float = 0.0
    best: str = ""
    curve: list = field(default_factory=list)
    function: GridFunction | None = field(default=None, repr=False)

    @property
    def sharpness(self) -> float:
        return self.estimated_optimal_constant / self.certified_constant

    def within_certified(self) -> bool:
        return self.estimated_optimal_constant <= self.certified_constant * (1.0 + self.tolerance)


# ---------------------------------------------------------------------------
# discrete weights


def _axis_of(sigma) -> int:
    s = np.asarray(sigma, dtype=float)
    k = int(np.argmax(np.abs(s)))
    if abs(abs(s[k]) - 1.0) > 1e-12:
        raise ValueError("discrete directional forms need sigma along a coordinate axis")
    return k


def _radial(x0, s):
    x0 = np.asarray(x0, dtype=float)

    def w(pts):
        r = np.linalg.norm(pts - x0, axis=-1)
        with np.errstate(divide="ignore"):
            return r**s

    w.power = s
    return w


def _ones(pts):
    return np.ones(len(pts))


_ones.power = 0.0


def _constant_p(inst: InequalityInstance) -> float:
    if inst.p is not None:
        return float(inst.p)
    if isinstance(inst.exponent, ConstantExponent):
        return float(inst.exponent.p)
    raise HypothesisError("a constant exponent is required here")


def discrete_weights(inst: InequalityInstance):
    """(lhs weight, rhs weight, axes used by the gradient side) for a constant-p instance."""
    k, x0, dim = inst.kind, inst.x0, inst.dim
    p = _constant_p(inst)
    all_axes = tuple(range(dim))
    if k == "DirectionalPoincare":
        return _ones, _ones, (_axis_of(inst.sigma),)
    if k == "GeneralWeighted":
        params = inst.weight
        rp = _radial(x0, p)
        return (lambda pts: evaluate_weight(params, pts)), (lambda pts: evaluate_weight(params, pts) * rp(pts)), all_axes
    if k == "GammaHardy":
        return _radial(x0, -inst.gamma), _radial(x0, p - inst.gamma), all_axes
    if k == "SharpHardy":
        return _radial(x0, -p), _ones, all_axes
    if k == "DualHardyGamma":
        return _radial(x0, inst.gamma), _radial(x0, p + inst.gamma), all_axes
    if k == "DualHardyPlain":
        return _ones, _radial(x0, p), all_axes
    if k == "ClassicalPoincare":
        return _ones, _ones, all_axes
    axis = _axis_of(inst.sigma)
    if inst.form == "weighted":
        c = np.asarray(x0, dtype=float)
        return _ones, (lambda pts: np.abs(pts[:, axis] - c[axis]) ** p), (axis,)
    return _ones, _ones, (axis,)


class _Discretization:
    """Node weights, edge weights and the active index map shared by both solvers."""

    def __init__(self, inst: InequalityInstance, grid: NodeGrid):
        self.inst, self.grid = inst, grid
        wl, wr, self.axes = discrete_weights(inst)
        nodes = grid.nodes()
        active = grid.active_mask(inst.domain).reshape(-1)
        with np.errstate(divide="ignore", invalid="ignore"):
            self.node_w = np.asarray(wl(nodes), dtype=float)
        # singular node: pinned to zero, as the quadrature excludes it
        active &= np.isfinite(self.node_w)
        self.active = active.reshape(grid.shape)
        self.index = -np.ones(active.size, dtype=np.int64)
        self.index[active] = np.arange(int(active.sum()))
        self.size = int(active.sum())
        if self.size == 0:
            raise ValueError("no interior grid nodes: the discrete mass matrix is empty")
        self.edges = []  # (i, j, weight, h_k): i, j flat node indices along axis k
        flat = np.arange(active.size).reshape(grid.shape)
        h = grid.h
        for k in self.axes:
            i = np.take(flat, range(grid.n), axis=k).reshape(-1)
            j = np.take(flat, range(1, grid.n + 1), axis=k).reshape(-1)
            touch = active[i] | active[j]
            i, j = i[touch], j[touch]
            mid = 0.5 * (nodes[i] + nodes[j])
            with np.errstate(divide="ignore", invalid="ignore"):
                w = np.asarray(wr(mid), dtype=float)
            bad = ~np.isfinite(w)
            if np.any(bad):
                # an edge through the singular point: drop both ends from the active set
                for a in np.concatenate([i[bad], j[bad]]):
                    active[a] = False
                self.index[:] = -1
                self.index[active] = np.arange(int(active.sum()))
                self.size = int(active.sum())
                w = np.where(bad, 0.0, w)
            self.edges.append((i, j, w, float(h[k])))
        self.active = active.reshape(grid.shape)

    def mass(self) -> sparse.csr_matrix:
        d = self.node_w[self.active.reshape(-1)] * self.grid.cell_volume
        return sparse.diags(d).tocsr()

    def stiffness(self) -> sparse.csr_matrix:
        rows, cols, vals = [], [], []
        vol = self.grid.cell_volume
        for i, j, w, hk in self.edges:
            c = w * vol / hk**2
            ii, jj = self.index[i], self.index[j]
            for a, b in ((ii, jj), (jj, ii)):
                ok = a >= 0
                rows.append(a[ok])
                cols.append(a[ok])
                vals.append(c[ok])
                both = ok & (b >= 0)
                rows.append(a[both])
                cols.append(b[both])
                vals.append(-c[both])
        K = sparse.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(self.size, self.size))
        return K.tocsr()

    def embed(self, y) -> np.ndarray:
        out = np.zeros(self.active.size)
        out[self.active.reshape(-1)] = y
        return out.reshape(self.grid.shape)

    def restrict(self, values) -> np.ndarray:
        return np.asarray(values, dtype=float).reshape(-1)[self.active.reshape(-1)]


# ---------------------------------------------------------------------------
# p = 2


def optimal_constant_p2(
    inst: InequalityInstance,
    grid: NodeGrid | int,
    tol: float = 1e-10,
    max_iter: int = 10_000,
    start: GridFunction | None = None,
) -> ExtremalResult:
    """Estimated optimal modular constant 1 / lambda_min by inverse power iteration."""
    if _constant_p(inst) != 2:
        raise HypothesisError("optimal_constant_p2 needs p = 2")
    if isinstance(grid, int):
        grid = NodeGrid.over(inst.domain, grid)
    disc = _Discretization(inst, grid)
    M, K = disc.mass(), disc.stiffness()
    diag = K.diagonal()
    if np.any(diag <= 0):
        raise ValueError("stiffness matrix has an empty row; refine the grid")
    precond = sparse.diags(1.0 / diag)

    if start is not None:
        x = disc.restrict(start.values)
    else:
        x = np.ones(disc.size)
    y = x
    rq_old = math.inf
    rq = math.nan
    residual = math.inf
    for it in range(1, max_iter + 1):
        b = M @ x
        y, info = cg(K, b, x0=y, rtol=1e-12, atol=0.0, M=precond, maxiter=20 * disc.size)
        if info < 0:
            raise ConvergenceError("conjugate gradient breakdown", residual=math.nan, iterations=it)
        norm = math.sqrt(float(y @ (M @ y)))
        if norm == 0:
            raise ValueError("start vector has no mass; the mass matrix is singular on it")
        y = y / norm
        Ky = K @ y
        rq = float(y @ Ky)
        residual = float(np.linalg.norm(Ky - rq * (M @ y)) / max(np.linalg.norm(Ky), 1e-300))
        if abs(rq - rq_old) <= tol * abs(rq):
            break
        rq_old = rq
        x = y
    else:
        raise ConvergenceError(
            f"inverse iteration did not converge in {max_iter} steps (residual {residual:.3e})",
            residual=residual,
            iterations=max_iter,
        )
    est = 1.0 / rq
    values = disc.embed(np.abs(y))
    return ExtremalResult(
        est,
        certified_constant_for(inst),
        it,
        residual,
        "inverse_power",
        tolerance=tol,
        best=f"discrete eigenfunction, n={grid.n}",
        function=GridFunction(grid, values, disc.active),
    )


# ---------------------------------------------------------------------------
# general p


class _DiscreteRatio:
    def __init__(self, disc: _Discretization, p: float):
        self.disc, self.p = disc, p
        self.vol = disc.grid.cell_volume
        self.mask = disc.active.reshape(-1)

    def lhs(self, v):
        return float(np.sum(self.disc.node_w[self.mask] * np.abs(v[self.mask]) ** self.p) * self.vol)

    def rhs(self, v):
        total = 0.0
        for i, j, w, hk in self.disc.edges:
            total += float(np.sum(w * np.abs((v[j] - v[i]) / hk) ** self.p))
        return total * self.vol

    def value_and_gradient(self, v):
        p, vol = self.p, self.vol
        L, R = self.lhs(v), self.rhs(v)
        gL = np.zeros_like(v)
        m = self.mask
        gL[m] = p * self.disc.node_w[m] * np.sign(v[m]) * np.abs(v[m]) ** (p - 1) * vol
        gR = np.zeros_like(v)
        for i, j, w, hk in self.disc.edges:
            d = (v[j] - v[i]) / hk
            t = p * w * np.sign(d) * np.abs(d) ** (p - 1) * vol / hk
            np.add.at(gR, j, t)
            np.add.at(gR, i, -t)
        g = (gL * R - L * gR) / R**2
        g[~m] = 0.0
        return L / R, g


def ratio_ascent(
    inst: InequalityInstance,
    u0: GridFunction,
    steps: int = 500,
    seed: int | None = None,
    jitter: float = 0.0,
    min_step: float = 1e-12,
) -> ExtremalResult:
    """Normalized gradient ascent on J = LHS_h / RHS_h with backtracking (halving from 1.0).

    ``jitter`` > 0 adds a seeded relative perturbation to u0 before the first step.
    Returns the best J seen, which bounds the optimal constant from below.
    """
    p = _constant_p(inst)
    if p < 1:
        raise HypothesisError(f"exponent p must be >= 1, got {p}")
    disc = _Discretization(inst, u0.grid)
    obj = _DiscreteRatio(disc, p)
    v = np.where(disc.active, u0.values, 0.0).reshape(-1).astype(float)
    if jitter > 0:
        rng = np.random.default_rng(seed)
        v = v + jitter * np.max(np.abs(v)) * rng.standard_normal(v.size) * disc.active.reshape(-1)
    if obj.rhs(v) == 0:
        raise ValueError("degenerate start: RHS_h(u0) = 0")
    v = v / np.linalg.norm(v)
    J, g = obj.value_and_gradient(v)
    history = [J]
    done = 0
    for done in range(1, steps + 1):
        gn = np.linalg.norm(g)
        if gn == 0:
            break
        direction = g / gn
        s = 1.0
        while s >= min_step:
            trial = v + s * direction
            trial /= np.linalg.norm(trial)
            if obj.rhs(trial) > 0:
                Jt, gt = obj.value_and_gradient(trial)
                if Jt > J:
                    break
            s *= 0.5
        else:
            break
        v, J, g = trial, Jt, gt
        history.append(J)
    return ExtremalResult(
        J,
        certified_constant_for(inst),
        done,
        float(np.linalg.norm(g)),
        "ratio_ascent",
        tolerance=1e-9,
        best=f"ascent iterate, n={u0.grid.n}",
        curve=history,
        function=GridFunction(u0.grid, disc.embed(v[disc.active.reshape(-1)]), disc.active),
    )


# ---------------------------------------------------------------------------
# families of test functions


def _radial_sides(inst: InequalityInstance, u: TestFunction, n: int):
    """LHS and RHS through the one-dimensional radial reduction."""
    rp, p, dim = u.radial, _constant_p(inst), inst.dim
    wl, wr, _ = discrete_weights(inst)
    x0 = np.asarray(inst.x0, dtype=float)

    # everything in logs: near a tiny core |u|^p, r^-p and r^(N-1) can each
    # overflow or underflow on their own while their product is moderate
    def log_r_power(r, s):
        with np.errstate(divide="ignore"):
            return np.zeros_like(r) if s == 0 else s * np.log(r)

    def along(w):
        if hasattr(w, "power"):
            return lambda r: log_r_power(np.asarray(r, dtype=float), w.power + dim - 1)

        def log_w(r):
            r = np.asarray(r, dtype=float)
            with np.errstate(divide="ignore"):
                return np.log(w(x0[None, :] + r[:, None] * geo.unit(np.eye(dim)[0]))) + log_r_power(r, dim - 1)

        return log_w

    wl_r, wr_r = along(wl), along(wr)
    R = u.support.radius

    def product(v, log_w):
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            return np.exp(p * np.log(np.abs(v)) + log_w)

    def lhs_f(r):
        return product(rp.f(r), wl_r(r))

    def rhs_f(r):
        return product(rp.df(r), wr_r(r))

    bps = sorted(b for b in rp.breakpoints if 0 < b < R)
    out = []
    for fn in (lhs_f, rhs_f):
        if bps:
            # constant core near 0, then a log-spaced tail resolves the power law
            a = radial_integrate(fn, dim, 0.0, bps[0], n, with_jacobian=True)
            b = radial_integrate(fn, dim, bps[0], R, n, breakpoints=bps[1:], mapping="log", with_jacobian=True)
            out.append(IntegralResult(a.value + b.value, a.error_estimate + b.error_estimate))
        else:
            out.append(radial_integrate(fn, dim, 0.0, R, n, with_jacobian=True))
    return out


def _radial_ok(inst: InequalityInstance, u: TestFunction) -> bool:
    if u.radial is None or inst.kind not in RADIAL_KINDS:
        return False
    if not isinstance(u.support, geo.Ball):
        return False
    # the coordinate-sum gradient convention is only rotation invariant for p = 2
    if inst.p != 2 and inst.norm == "lp":
        return False
    return np.allclose(u.radial.center, inst.x0)


def sharpness_report(
    inst: InequalityInstance,
    family,
    parameters,
    radial: bool = False,
    settings: GridSettings | None = None,
    radial_n: int = 4096,
) -> ExtremalResult:
    """Continuum ratio LHS / RHS for each family member; the maximum is a lower bound on the optimal constant.

    ``family`` maps one parameter to a TestFunction.  With ``radial`` the
    one-dimensional reduction is used whenever it is exact for the instance.
    """
    # tolerances are relative to the certified constant, as in verify
    constant = certified_constant_for(inst)
    curve = []
    best, best_param, worst_tol = -math.inf, None, 0.0
    for param in parameters:
        u = family(param)
        if radial and _radial_ok(inst, u):
            lhs, rhs = _radial_sides(inst, u, radial_n)
            ratio = lhs.value / rhs.value
            tol = (lhs.error_estimate + ratio * rhs.error_estimate) / rhs.value / constant
        else:
            rep = verify(inst, u, settings)
            ratio = rep.lhs.value / rep.rhs.value if rep.lhs.value > 0 else 0.0
            tol = rep.tolerance_used
        curve.append((param, ratio))
        worst_tol = max(worst_tol, tol)
        if ratio > best:
            best, best_param = ratio, param
    return ExtremalResult(
        best,
        constant,
        len(curve),
        0.0,
        "family",
        tolerance=worst_tol,
        best=f"parameter {best_param!r}",
        curve=curve,
    )

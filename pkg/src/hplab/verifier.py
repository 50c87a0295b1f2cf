"""Inequality instances, their certified constants, and numerical verification.

All inequalities are checked in modular (p-th power) form:

    LHS(u) <= C * RHS(u)

where LHS is the zero-order modular, RHS the gradient-side modular and C the
certified constant.  The verdict absorbs the quadrature error of both sides.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import geometry as geo
from .errors import HypothesisError, SupportError
from .exponents import (
    ConstantExponent,
    ExponentField,
    RadialExponent,
    field_from_dict,
    kappa_domain_sigma,
    kappa_p,
)
from .functions import TestFunction, clamp_unit
from .quadrature import Grid, IntegralResult, gradient_modular_integral, modular_integral
from .weights import WeightParams, certified_constant, evaluate_weight

KINDS = (
    "DirectionalPoincare",
    "GeneralWeighted",
    "GammaHardy",
    "SharpHardy",
    "DualHardyGamma",
    "DualHardyPlain",
    "ClassicalPoincare",
    "VarExpDirectional",
    "VarExpRadial",
)

RESULT_NAMES = {
    "DirectionalPoincare": "Poincare inequality on domains bounded in one direction",
    "GeneralWeighted": "weighted Hardy-Poincare inequality with weight (lambda + |x - x0|^alpha)^(-beta)",
    "GammaHardy": "weighted Hardy-Poincare corollary, Hardy-type inequality with |x - x0|^(-gamma)",
    "SharpHardy": "weighted Hardy-Poincare corollary, sharp Hardy",
    "DualHardyGamma": "weighted Hardy-Poincare corollary, dual Hardy with |x - x0|^gamma",
    "DualHardyPlain": "weighted Hardy-Poincare corollary, dual Hardy (gamma -> 0)",
    "ClassicalPoincare": "weighted Hardy-Poincare corollary, classical Poincare on bounded domains",
    "VarExpDirectional": "variable exponent modular Poincare, exponent constant along sigma",
    "VarExpRadial": "variable exponent modular Poincare, radial decreasing exponent with |u| <= 1",
}

POINCARE_BOUNDS = ("circumradius", "diameter", "best_direction")
VAREXP = ("VarExpDirectional", "VarExpRadial")

TOLERANCE_FLOOR = 1e-9


@dataclass(frozen=True)
class GridSettings:
    n: int = 256
    n_3d: int = 64
    exclusion_multiplier: float = 2.0
    workers: int = 1

    def cells(self, dim: int) -> int:
        return self.n_3d if dim >= 3 else self.n


@dataclass(frozen=True)
class InequalityInstance:
    kind: str
    domain: geo.Domain
    p: float | None = None
    exponent: ExponentField | None = None
    weight: WeightParams | None = None
    gamma: float | None = None
    sigma: tuple | None = None
    x0: tuple | None = None
    refined: bool = False
    bound: str = "circumradius"
    form: str | None = None
    norm: str = "lp"
    instance_id: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"instance kind must be one of {KINDS}, got {self.kind!r}")
        dim = self.domain.dim
        if self.norm not in ("lp", "euclidean"):
            raise ValueError("norm must be 'lp' or 'euclidean'")
        if self.sigma is not None:
            object.__setattr__(self, "sigma", tuple(geo.as_direction(self.sigma, dim)))
        if self.x0 is not None:
            x0 = tuple(float(v) for v in np.atleast_1d(self.x0))
            if len(x0) != dim:
                raise ValueError("x0 dimension does not match the domain")
            object.__setattr__(self, "x0", x0)

        if self.kind in VAREXP:
            if self.exponent is None:
                if self.p is None:
                    raise ValueError(f"{self.kind} needs an exponent field or p")
                object.__setattr__(self, "exponent", ConstantExponent(float(self.p)))
        else:
            if self.p is None:
                raise ValueError(f"{self.kind} needs p")
            if not self.p >= 1:
                raise HypothesisError(f"exponent p must be >= 1, got {self.p}")
        getattr(self, "_check_" + self.kind)(dim)

    # -- hypotheses, one per kind -----------------------------------------
    def _need_sigma(self):
        if self.sigma is None:
            raise ValueError(f"{self.kind} needs a direction sigma")

    def _default_x0(self, dim):
        if self.x0 is None:
            object.__setattr__(self, "x0", tuple([0.0] * dim))

    def _check_DirectionalPoincare(self, dim):
        self._need_sigma()
        if not math.isfinite(geo.directional_constant(self.domain, self.sigma)):
            raise HypothesisError("directional Poincare hypothesis: domain must be bounded along sigma")

    def _check_GeneralWeighted(self, dim):
        if self.weight is None:
            raise ValueError("GeneralWeighted needs weight parameters")
        if self.weight.dim != dim:
            raise ValueError("weight center dimension does not match the domain")
        object.__setattr__(self, "x0", self.weight.x0)

    def _check_GammaHardy(self, dim):
        if self.gamma is None or not 0 < self.gamma < dim:
            raise HypothesisError(f"Hardy-type hypothesis 0 < gamma < N violated: gamma = {self.gamma}, N = {dim}")
        self._default_x0(dim)

    def _check_SharpHardy(self, dim):
        if not 1 <= self.p < dim:
            raise HypothesisError(f"sharp Hardy hypothesis 1 <= p < N violated: p = {self.p}, N = {dim}")
        self._default_x0(dim)

    def _check_DualHardyGamma(self, dim):
        if self.gamma is None or not self.gamma > 0:
            raise HypothesisError(f"dual Hardy hypothesis gamma > 0 violated: gamma = {self.gamma}")
        self._default_x0(dim)

    def _check_DualHardyPlain(self, dim):
        self._default_x0(dim)

    def _check_ClassicalPoincare(self, dim):
        if not self.domain.bounded():
            raise HypothesisError("classical Poincare hypothesis: domain must be bounded")
        if self.bound not in POINCARE_BOUNDS:
            raise ValueError(f"bound must be one of {POINCARE_BOUNDS}, got {self.bound!r}")
        if self.bound == "diameter" and not self.domain.connected():
            raise HypothesisError("the diameter bound needs a connected domain")

    def _varexp_form(self, dim):
        self._need_sigma()
        bounded = math.isfinite(geo.directional_constant(self.domain, self.sigma))
        form = self.form or ("bounded" if bounded else "weighted")
        if form not in ("bounded", "weighted"):
            raise ValueError("form must be 'bounded' or 'weighted'")
        if form == "bounded" and not bounded:
            raise HypothesisError("the bounded form needs a domain bounded along sigma")
        object.__setattr__(self, "form", form)

    def _check_VarExpDirectional(self, dim):
        self._varexp_form(dim)
        if not self.exponent.is_constant_along(self.sigma):
            raise HypothesisError("variable exponent hypothesis: p(.) must be constant along sigma")
        if self.form == "weighted":
            self._default_x0(dim)

    def _check_VarExpRadial(self, dim):
        self._varexp_form(dim)
        if isinstance(self.exponent, RadialExponent):
            if self.exponent.monotonicity == "increasing":
                raise HypothesisError("variable exponent hypothesis: the radial profile must be decreasing")
            object.__setattr__(self, "x0", self.exponent.center)
        elif not self.exponent.is_constant:
            raise HypothesisError("variable exponent hypothesis: p(.) must be radial with a decreasing profile")
        else:
            self._default_x0(dim)

    # -- descriptors ------------------------------------------------------
    @property
    def dim(self) -> int:
        return self.domain.dim

    def p_descr(self) -> str:
        if self.kind in VAREXP:
            return self.exponent.describe()
        return f"p={self.p:g}"

    def params(self) -> dict:
        out = {"domain": self.domain.to_dict()}
        if self.weight is not None:
            out["weight"] = self.weight.to_dict()
        for key in ("gamma", "sigma", "x0"):
            v = getattr(self, key)
            if v is not None:
                out[key] = list(v) if isinstance(v, tuple) else v
        if self.kind == "GeneralWeighted" and self.refined:
            out["refined"] = True
        if self.kind == "ClassicalPoincare":
            out["bound"] = self.bound
        if self.kind in VAREXP:
            out["form"] = self.form
        if self.norm != "lp":
            out["norm"] = self.norm
        return out

    def translate(self, t) -> "InequalityInstance":
        t = np.asarray(t, dtype=float)
        return replace(
            self,
            domain=self.domain.translate(t),
            exponent=None if self.exponent is None else self.exponent.translate(t),
            weight=None if self.weight is None else self.weight.translate(t),
            x0=None if self.x0 is None else tuple(np.array(self.x0) + t),
        )


# ---------------------------------------------------------------------------
# constants


def certified_constant_for(inst: InequalityInstance) -> float:
    """Constant multiplying the gradient-side modular."""
    k, dim, p = inst.kind, inst.dim, inst.p
    if k == "DirectionalPoincare":
        return (p * geo.directional_constant(inst.domain, inst.sigma)) ** p
    if k == "GeneralWeighted":
        return certified_constant("general", p, dim, params=inst.weight, refined_over=inst.domain if inst.refined else None)
    if k == "GammaHardy":
        return certified_constant("gamma_hardy", p, dim, gamma=inst.gamma)
    if k == "SharpHardy":
        return certified_constant("sharp_hardy", p, dim)
    if k in ("DualHardyGamma", "DualHardyPlain"):
        return certified_constant("dual", p, dim)
    if k == "ClassicalPoincare":
        if inst.bound == "circumradius":
            return certified_constant("classical_poincare", p, dim, c_omega=geo.circumradius(inst.domain))
        if inst.bound == "diameter":
            return (p / dim ** (1.0 / p) * geo.diameter(inst.domain) / 2.0) ** p
        _, _, c = geo.best_direction(inst.domain, geo.axes(dim))
        return (p * c) ** p
    if inst.form == "weighted":
        return kappa_p(inst.exponent, inst.domain)
    return kappa_domain_sigma(inst.exponent, inst.domain, inst.sigma)


# ---------------------------------------------------------------------------
# modulars


def _power_weight(x0, s):
    x0 = np.asarray(x0, dtype=float)

    def w(pts):
        r = np.linalg.norm(pts - x0, axis=-1)
        with np.errstate(divide="ignore"):
            return r**s

    return w


def _sides(inst: InequalityInstance, u: TestFunction, grid: Grid, workers: int):
    """(lhs, rhs) IntegralResults for the instance's two modulars."""
    k, dom, x0 = inst.kind, inst.domain, inst.x0
    norm = inst.norm
    if k in VAREXP:
        lhs = modular_integral(u, inst.exponent, None, dom, grid, workers=workers)
        x0w = x0 if inst.form == "weighted" else None
        rhs = gradient_modular_integral(u, inst.exponent, dom, grid, x0=x0w, sigma=inst.sigma, workers=workers)
        return lhs, rhs

    p = inst.p
    lhs_weight = None
    lhs_grid = grid
    rhs_grid = grid
    rhs_kw = {}
    if k == "DirectionalPoincare":
        rhs_kw = {"sigma": inst.sigma}
    elif k == "GeneralWeighted":
        params = inst.weight

        def omega(pts):
            return evaluate_weight(params, pts)

        lhs_weight = omega
        rhs_kw = {"weight": omega, "x0": x0, "radial_power": p}
    elif k == "GammaHardy":
        lhs_weight = _power_weight(x0, -inst.gamma)
        lhs_grid = grid.with_singularity(x0, inst.gamma)
        rhs_kw = {"x0": x0, "radial_power": p - inst.gamma}
        rhs_grid = grid.with_singularity(x0, inst.gamma - p)
    elif k == "SharpHardy":
        lhs_weight = _power_weight(x0, -p)
        lhs_grid = grid.with_singularity(x0, p)
    elif k == "DualHardyGamma":
        lhs_weight = _power_weight(x0, inst.gamma)
        rhs_kw = {"x0": x0, "radial_power": p + inst.gamma}
    elif k == "DualHardyPlain":
        rhs_kw = {"x0": x0, "radial_power": p}
    lhs_bound = u.sup_norm_bound**p if lhs_grid.singular_point is not None else None
    lhs = modular_integral(u, p, lhs_weight, dom, lhs_grid, regular_bound=lhs_bound, workers=workers)
    rhs = gradient_modular_integral(u, p, dom, rhs_grid, norm=norm, workers=workers, **rhs_kw)
    return lhs, rhs


# ---------------------------------------------------------------------------
# verification


@dataclass
class VerificationReport:
    instance_id: str
    kind: str
    dim: int
    p_descr: str
    params: dict
    function: str
    lhs: IntegralResult | None
    rhs: IntegralResult | None
    constant: float
    ratio: float
    passed: bool
    tolerance_used: float
    grid_n: int
    status: str = "ok"
    message: str = ""
    extra: dict = field(default_factory=dict)


def check_support(domain: geo.Domain, u: TestFunction, per_axis: int = 9) -> None:
    """Sample the closed support (lattice over its bounding box, faces included) against the closed domain."""
    lo, hi = u.support.bounding_box()
    axes_pts = [np.linspace(a, b, per_axis) for a, b in zip(lo, hi)]
    pts = np.array(np.meshgrid(*axes_pts, indexing="ij")).reshape(u.dim, -1).T
    pts = pts[u.support.indicator(pts, closed=True)]
    bad = ~domain.indicator(pts, closed=True)
    if np.any(bad):
        raise SupportError(f"support of {u.describe()} leaves the domain near {pts[bad][0].tolist()}")


def verify(inst: InequalityInstance, u: TestFunction, settings: GridSettings | None = None, clamp: bool = False) -> VerificationReport:
    settings = settings or GridSettings()
    if u.dim != inst.dim:
        raise ValueError(f"function dimension {u.dim} does not match instance dimension {inst.dim}")
    if inst.kind == "VarExpRadial":
        if clamp:
            u = clamp_unit(u)
        elif u.sup_norm_bound > 1.0:
            raise HypothesisError(f"variable exponent hypothesis |u| <= 1 violated: sup bound {u.sup_norm_bound:g}")
    check_support(inst.domain, u)

    n = settings.cells(inst.dim)
    grid = Grid.covering(u.support, inst.domain, n, exclusion_multiplier=settings.exclusion_multiplier)
    constant = certified_constant_for(inst)
    lhs, rhs = _sides(inst, u, grid, settings.workers)
    ratio, tol = ratio_and_tolerance(lhs, rhs, constant)
    extra = {}
    if inst.kind == "DirectionalPoincare" and not inst.domain.connected():
        extra["note"] = "disconnected domain: constant uses the convex hull of the projection"
    return VerificationReport(
        inst.instance_id,
        inst.kind,
        inst.dim,
        inst.p_descr(),
        inst.params(),
        u.describe(),
        lhs,
        rhs,
        constant,
        ratio,
        ratio <= 1.0 + tol,
        tol,
        n,
        extra=extra,
    )


def ratio_and_tolerance(lhs: IntegralResult, rhs: IntegralResult, constant: float) -> tuple[float, float]:
    if lhs.value == 0:
        return 0.0, TOLERANCE_FLOOR
    denom = constant * rhs.value
    if denom <= 0:
        return math.inf, TOLERANCE_FLOOR
    tol = (lhs.error_estimate + constant * rhs.error_estimate) / denom + TOLERANCE_FLOOR
    return lhs.value / denom, tol


def _error_report(inst, u, exc, settings) -> VerificationReport:
    return VerificationReport(
        getattr(inst, "instance_id", ""),
        getattr(inst, "kind", "?"),
        getattr(inst, "dim", 0),
        inst.p_descr() if hasattr(inst, "p_descr") else "",
        inst.params() if hasattr(inst, "params") else {},
        u.describe(),
        None,
        None,
        math.nan,
        math.nan,
        False,
        math.nan,
        settings.cells(getattr(inst, "dim", 1)),
        status="error",
        message=f"{type(exc).__name__}: {exc}",
    )


def sweep(instances, functions, settings: GridSettings | None = None, clamp: bool = False) -> list[VerificationReport]:
    """Every (instance, function) pair in row-major order; failures are recorded, never raised."""
    settings = settings or GridSettings()
    reports = []
    for inst in instances:
        for u in functions:
            try:
                reports.append(verify(inst, u, settings, clamp))
            except (ValueError, ArithmeticError) as exc:
                reports.append(_error_report(inst, u, exc, settings))
    return reports


def verify_over_centers(inst: InequalityInstance, u: TestFunction, centers, settings: GridSettings | None = None):
    """Re-verify with x0 (or the weight center) moved to each of ``centers``; returns (reports, max ratio)."""
    reports = []
    for c in centers:
        c = tuple(np.atleast_1d(np.asarray(c, dtype=float)))
        if inst.weight is not None:
            moved = replace(inst, weight=WeightParams(inst.weight.lam, inst.weight.alpha, inst.weight.beta, c))
        else:
            moved = replace(inst, x0=c)
        reports.append(verify(moved, u, settings))
    return reports, max((r.ratio for r in reports), default=0.0)


def summarize(reports) -> dict:
    ok = [r for r in reports if r.status == "ok"]
    ratios = [r.ratio for r in ok if math.isfinite(r.ratio)]
    return {
        "rows": len(reports),
        "passed": sum(1 for r in reports if r.passed),
        "failed": sum(1 for r in ok if not r.passed),
        "errors": sum(1 for r in reports if r.status == "error"),
        "worst_ratio": max(ratios) if ratios else None,
    }


# ---------------------------------------------------------------------------
# CSV

CSV_COLUMNS = (
    "instance_id",
    "kind",
    "N",
    "p_descr",
    "params",
    "lhs",
    "lhs_err",
    "rhs",
    "rhs_err",
    "constant",
    "ratio",
    "pass",
    "grid_n",
)


def _num(v) -> str:
    if v is None:
        return ""
    return repr(float(v))


def report_row(r: VerificationReport) -> list[str]:
    params = dict(r.params)
    params["function"] = r.function
    if r.status != "ok":
        params["error"] = r.message
    params.update(r.extra)
    return [
        r.instance_id,
        r.kind,
        str(r.dim),
        r.p_descr,
        json.dumps(params, sort_keys=True, separators=(",", ":")),
        _num(r.lhs.value if r.lhs else None),
        _num(r.lhs.error_estimate if r.lhs else None),
        _num(r.rhs.value if r.rhs else None),
        _num(r.rhs.error_estimate if r.rhs else None),
        _num(r.constant),
        _num(r.ratio),
        "true" if r.passed else "false",
        str(r.grid_n),
    ]


def reports_to_csv(reports) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in reports:
        writer.writerow(report_row(r))
    return buf.getvalue()


# ---------------------------------------------------------------------------
# config specs

_INSTANCE_KEYS = {"id", "kind", "domain", "p", "exponent", "weight", "gamma", "sigma", "x0", "refined", "bound", "form", "norm"}


def instance_from_dict(spec: dict) -> InequalityInstance:
    extra = set(spec) - _INSTANCE_KEYS
    if extra:
        raise ValueError(f"unknown instance keys: {sorted(extra)}")
    if "kind" not in spec or "domain" not in spec:
        raise ValueError("instance needs 'kind' and 'domain'")
    domain = geo.domain_from_dict(spec["domain"])
    sigma = spec.get("sigma")
    return InequalityInstance(
        kind=spec["kind"],
        domain=domain,
        p=None if spec.get("p") is None else float(spec["p"]),
        exponent=None if spec.get("exponent") is None else field_from_dict(spec["exponent"], domain.dim),
        weight=None if spec.get("weight") is None else WeightParams.from_dict(spec["weight"]),
        gamma=None if spec.get("gamma") is None else float(spec["gamma"]),
        sigma=None if sigma is None else tuple(geo.unit(sigma)),
        x0=spec.get("x0"),
        refined=bool(spec.get("refined", False)),
        bound=spec.get("bound", "circumradius"),
        form=spec.get("form"),
        norm=spec.get("norm", "lp"),
        instance_id=str(spec.get("id", "")),
    )

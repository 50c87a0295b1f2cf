"""Config-driven experiment runner: ``hp run`` and ``hp describe``."""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from datetime import datetime, timezone
from pathlib import Path
from typing import Annotated, Any, Literal, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from . import extremal as ext
from .errors import HypothesisError, SupportError
from .functions import function_from_dict
from .verifier import (
    RESULT_NAMES,
    GridSettings,
    InequalityInstance,
    VerificationReport,
    certified_constant_for,
    instance_from_dict,
    reports_to_csv,
    summarize,
    sweep,
    verify,
    verify_over_centers,
)

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class GridModel(_Strict):
    n: int = Field(256, ge=8)
    n_3d: int = Field(64, ge=8)
    exclusion_multiplier: float = Field(2.0, gt=0)


class VerifyJob(_Strict):
    kind: Literal["verify"]
    id: str
    instance: dict[str, Any]
    function: dict[str, Any]
    grid: GridModel | None = None
    clamp: bool = False
    random_centers: int = Field(0, ge=0)


class SweepJob(_Strict):
    kind: Literal["sweep"]
    id: str
    instances: list[dict[str, Any]]
    functions: list[dict[str, Any]]
    grid: GridModel | None = None
    clamp: bool = False


class ExtremalJob(_Strict):
    kind: Literal["extremal"]
    id: str
    instance: dict[str, Any]
    method: Literal["p2", "ascent"] = "p2"
    n: int = Field(64, ge=4)
    tol: float = Field(1e-10, gt=0)
    max_iter: int = Field(10_000, ge=1)
    steps: int = Field(500, ge=0)
    start: dict[str, Any] | None = None
    jitter: float = Field(0.0, ge=0)
    dump: bool = False


class SharpnessJob(_Strict):
    kind: Literal["sharpness"]
    id: str
    instance: dict[str, Any]
    family: dict[str, Any]
    parameter: str
    values: list[float]
    radial: bool = False
    radial_n: int = Field(4096, ge=8)
    grid: GridModel | None = None


Job = Annotated[Union[VerifyJob, SweepJob, ExtremalJob, SharpnessJob], Field(discriminator="kind")]


class RunConfig(_Strict):
    jobs: list[Job] = Field(default_factory=list)
    out: str = "hp_out"
    seed: int = 0
    grid: GridModel = Field(default_factory=GridModel)


class ConfigError(Exception):
    pass


# ---------------------------------------------------------------------------
# resolution: every config entry is turned into objects before anything runs


def _resolve(where: str, build, spec):
    try:
        return build(spec)
    except (HypothesisError, SupportError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc
    except (ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"{where}: invalid entry ({type(exc).__name__}: {exc})") from exc


def _family_builder(where, family: dict, parameter: str):
    base = dict(family)
    if parameter in base:
        raise ConfigError(f"{where}.family: swept parameter {parameter!r} must not also be fixed")

    def build(value):
        return function_from_dict({**base, parameter: value})

    return build


def load_config(path) -> RunConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    try:
        cfg = RunConfig.model_validate(raw)
    except ValidationError as exc:
        first = exc.errors()[0]
        loc = ".".join(str(p) for p in first["loc"])
        raise ConfigError(f"config field {loc}: {first['msg']}") from exc
    ids = [j.id for j in cfg.jobs]
    dup = sorted({i for i in ids if ids.count(i) > 1})
    if dup:
        raise ConfigError(f"duplicate job ids: {dup}")
    return cfg


def resolve_job(job: Job, index: int) -> dict:
    where = f"jobs[{index}]"
    out: dict = {}
    if isinstance(job, SweepJob):
        out["instances"] = [_resolve(f"{where}.instances[{i}]", instance_from_dict, s) for i, s in enumerate(job.instances)]
        out["functions"] = [_resolve(f"{where}.functions[{i}]", function_from_dict, s) for i, s in enumerate(job.functions)]
        return out
    out["instance"] = _resolve(f"{where}.instance", instance_from_dict, job.instance)
    if isinstance(job, VerifyJob):
        out["function"] = _resolve(f"{where}.function", function_from_dict, job.function)
    elif isinstance(job, ExtremalJob):
        if job.start is not None:
            out["start"] = _resolve(f"{where}.start", function_from_dict, job.start)
    elif isinstance(job, SharpnessJob):
        build = _family_builder(where, job.family, job.parameter)
        out["family"] = build
        for i, v in enumerate(job.values):
            _resolve(f"{where}.values[{i}]", build, v)
    return out


def _settings(cfg: RunConfig, job, workers: int) -> GridSettings:
    g = getattr(job, "grid", None) or cfg.grid
    return GridSettings(g.n, g.n_3d, g.exclusion_multiplier, workers)


# ---------------------------------------------------------------------------
# jobs


def _random_centers(domain, k: int, rng) -> list:
    lo, hi = domain.bounding_box()
    lo, hi = np.maximum(lo, -1e3), np.minimum(hi, 1e3)
    centers = []
    while len(centers) < k:
        pts = rng.uniform(lo, hi, size=(4 * k, len(lo)))
        centers.extend(pts[domain.indicator(pts)][: k - len(centers)].tolist())
    return centers


def _extremal_report(inst: InequalityInstance, res: ext.ExtremalResult, extra: dict, grid_n: int) -> VerificationReport:
    extra = {
        "method": res.method,
        "instance_kind": inst.kind,
        "estimated_optimal_constant": res.estimated_optimal_constant,
        "iterations": res.iterations,
        "residual": res.residual,
        "best": res.best,
        **extra,
    }
    return VerificationReport(
        inst.instance_id,
        "extremal",
        inst.dim,
        inst.p_descr(),
        inst.params(),
        "",
        None,
        None,
        res.certified_constant,
        res.sharpness,
        res.within_certified(),
        res.tolerance,
        grid_n,
        extra=extra,
    )


def run_job(cfg: RunConfig, job: Job, objs: dict, out_dir: Path, workers: int, seed: int) -> list[VerificationReport]:
    settings = _settings(cfg, job, workers)
    if isinstance(job, SweepJob):
        return sweep(objs["instances"], objs["functions"], settings, clamp=job.clamp)
    inst = objs["instance"]
    if isinstance(job, VerifyJob):
        u = objs["function"]
        rep = verify(inst, u, settings, clamp=job.clamp)
        if job.random_centers and inst.kind not in ("DirectionalPoincare", "ClassicalPoincare", "VarExpRadial"):
            rng = np.random.default_rng(seed)
            reports, _ = verify_over_centers(inst, u, _random_centers(inst.domain, job.random_centers, rng), settings)
            return [rep, *reports]
        return [rep]
    if isinstance(job, ExtremalJob):
        grid = ext.NodeGrid.over(inst.domain, job.n)
        if job.method == "p2":
            start = None
            if "start" in objs:
                start = ext.GridFunction.from_function(objs["start"], grid, inst.domain)
            res = ext.optimal_constant_p2(inst, grid, tol=job.tol, max_iter=job.max_iter, start=start)
        else:
            if "start" not in objs:
                raise ConfigError(f"job {job.id}: ascent needs a start function")
            u0 = ext.GridFunction.from_function(objs["start"], grid, inst.domain)
            res = ext.ratio_ascent(inst, u0, steps=job.steps, seed=seed, jitter=job.jitter)
        extra = {}
        if job.dump and res.function is not None:
            path, side = res.function.dump(out_dir / f"{job.id}.f64")
            extra["dump"] = path.name
        return [_extremal_report(inst, res, extra, job.n)]
    res = ext.sharpness_report(inst, objs["family"], job.values, radial=job.radial, settings=settings, radial_n=job.radial_n)
    rows = []
    for value, ratio in res.curve:
        single = ext.ExtremalResult(ratio, res.certified_constant, 1, 0.0, "family", res.tolerance, f"{job.parameter}={value!r}")
        rows.append(_extremal_report(inst, single, {"parameter": job.parameter, "value": value}, settings.cells(inst.dim)))
    return rows


def run(config_path, out: str | None = None, workers: int = 1, seed: int | None = None, stream=None) -> int:
    stream = stream or sys.stdout
    try:
        cfg = load_config(config_path)
        resolved = [resolve_job(job, i) for i, job in enumerate(cfg.jobs)]
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    seed = cfg.seed if seed is None else seed
    out_dir = Path(out or cfg.out)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"error: output directory not writable: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    started = datetime.now(timezone.utc).isoformat()
    t_all = time.perf_counter()
    summary_jobs = []
    all_reports = []
    for job, objs in zip(cfg.jobs, resolved):
        t0 = time.perf_counter()
        try:
            reports = run_job(cfg, job, objs, out_dir, workers, seed)
        except (HypothesisError, SupportError, ConfigError) as exc:
            print(f"error: job {job.id}: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        csv_path = out_dir / f"{job.id}.csv"
        csv_path.write_text(reports_to_csv(reports), encoding="utf-8", newline="\n")
        stats = summarize(reports)
        summary_jobs.append({"id": job.id, "kind": job.kind, "csv": csv_path.name, **stats, "seconds": time.perf_counter() - t0})
        all_reports.extend(reports)
        print(f"{job.id}: {stats['passed']}/{stats['rows']} passed, worst ratio {stats['worst_ratio']}", file=stream)

    totals = summarize(all_reports)
    summary = {"seed": seed, "started_at": started, "seconds": time.perf_counter() - t_all, "totals": totals, "jobs": summary_jobs}
    (out_dir / "summary.json").write_text(json.dumps(summary, indent=2, default=_json_default))
    return EXIT_OK if totals["passed"] == totals["rows"] else EXIT_FAIL


def _json_default(v):
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    if isinstance(v, np.generic):
        return v.item()
    raise TypeError(f"not serializable: {type(v).__name__}")


def describe_instance(inst: InequalityInstance) -> str:
    lines = [
        f"instance   {inst.instance_id or '(unnamed)'}",
        f"kind       {inst.kind}",
        f"result     {RESULT_NAMES[inst.kind]}",
        f"N          {inst.dim}",
        f"exponent   {inst.p_descr()}",
        f"params     {json.dumps(inst.params(), sort_keys=True)}",
        f"constant   {certified_constant_for(inst)!r}",
    ]
    return "\n".join(lines)


def describe(config_path, job_id: str, stream=None) -> int:
    stream = stream or sys.stdout
    try:
        cfg = load_config(config_path)
        matches = [(i, j) for i, j in enumerate(cfg.jobs) if j.id == job_id]
        if not matches:
            raise ConfigError(f"no job with id {job_id!r}")
        index, job = matches[0]
        objs = resolve_job(job, index)
        instances = objs.get("instances") or [objs["instance"]]
        for inst in instances:
            print(describe_instance(inst), file=stream)
            print(file=stream)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="hp", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="execute every job in a config")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", help="output directory (overrides the config)")
    p_run.add_argument("--jobs", type=int, default=1, help="worker threads for quadrature")
    p_run.add_argument("--seed", type=int, help="override the config seed")
    p_desc = sub.add_parser("describe", help="print resolved instances and their constants")
    p_desc.add_argument("--config", required=True)
    p_desc.add_argument("--job", required=True)
    args = parser.parse_args(argv)
    if args.command == "run":
        return run(args.config, args.out, max(1, args.jobs), args.seed)
    return describe(args.config, args.job)


if __name__ == "__main__":
    sys.exit(main())
